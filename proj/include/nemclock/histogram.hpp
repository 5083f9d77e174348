#pragma once

#include "nemclock/coefficient_table.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace nemclock {

/// Binned distribution. `masses` are probabilities once normalized;
/// `total_count` keeps the number of samples behind them.
struct Histogram {
    std::vector<double> edges;
    std::vector<double> masses;
    double total_count = 0.0;

    [[nodiscard]] std::size_t bins() const { return masses.size(); }
    [[nodiscard]] double lower() const { return edges.front(); }
    [[nodiscard]] double upper() const { return edges.back(); }
    [[nodiscard]] double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
    [[nodiscard]] double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
    [[nodiscard]] double mass_sum() const;
    /// Throws NumericalError on non-increasing edges or negative masses.
    void validate() const;
    [[nodiscard]] Histogram normalized() const;
    /// Equal bin widths up to 1e-9 relative.
    [[nodiscard]] bool is_uniform() const;
};

[[nodiscard]] std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

/// Normalized histogram of `samples` on [lo, hi) with `bins` equal bins.
/// Samples outside are dropped unless `clamp` puts them in the end bins.
[[nodiscard]] Histogram histogram_of(std::span<const double> samples, double lo, double hi, std::size_t bins,
                                     bool clamp = false);

/// Freedman-Diaconis bin width 2 IQR n^{-1/3} (falls back to the standard
/// deviation when the IQR vanishes).
[[nodiscard]] double freedman_diaconis_width(std::span<const double> samples);

/// Linear-interpolated sample quantile, q in [0, 1].
[[nodiscard]] double quantile(std::span<const double> samples, double q);

/// Streaming equal-width histogram with under/overflow counters.
class HistogramAccumulator {
public:
    HistogramAccumulator(double lo, double hi, std::size_t bins);
    void add(double value);
    void merge(const HistogramAccumulator& other);
    [[nodiscard]] Histogram histogram() const; ///< normalized over in-range samples
    [[nodiscard]] const std::vector<double>& counts() const { return counts_; }
    [[nodiscard]] double underflow() const { return under_; }
    [[nodiscard]] double overflow() const { return over_; }

private:
    double lo_;
    double hi_;
    double inv_width_;
    std::vector<double> counts_;
    double under_ = 0.0;
    double over_ = 0.0;
};

/// Position density on the nodes of a coefficient-table grid, accumulated
/// with linear (cloud-in-cell) weights. End nodes own half cells, so the
/// trapezoid rule over the nodes integrates the density to exactly 1.
class GridDensity {
public:
    explicit GridDensity(const GridSpec& grid);
    void add(double x);
    void merge(const GridDensity& other);
    [[nodiscard]] const GridSpec& grid() const { return grid_; }
    [[nodiscard]] double samples() const { return total_; }
    [[nodiscard]] std::vector<double> density() const;

private:
    GridSpec grid_;
    double inv_spacing_;
    std::vector<double> weights_;
    double total_ = 0.0;
};

/// Trapezoid integral of y over the uniform grid.
[[nodiscard]] double trapezoid(const GridSpec& grid, std::span<const double> y);

} // namespace nemclock
