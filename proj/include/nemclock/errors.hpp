#pragma once

#include <stdexcept>
#include <string>

namespace nemclock {

/// Invalid or inconsistent user-supplied configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical stage failed: quadrature did not converge, a state became
/// non-finite, an estimator received degenerate data.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coefficient-table lookup fell outside the tabulated range.
class TableRangeError : public NumericalError {
public:
    TableRangeError(const std::string& what, double position)
        : NumericalError(what), position_(position) {}

    [[nodiscard]] double position() const noexcept { return position_; }

private:
    double position_;
};

} // namespace nemclock
