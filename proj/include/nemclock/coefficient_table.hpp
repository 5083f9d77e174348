#pragma once

#include "nemclock/params.hpp"
#include "nemclock/transport.hpp"

#include "json.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nemclock {

/// Uniform grid x_i = x_min + (x_max - x_min) * i / (nodes - 1).
struct GridSpec {
    double x_min = -1.0;
    double x_max = 1.0;
    std::size_t nodes = 801;

    void validate() const;
    [[nodiscard]] double spacing() const { return (x_max - x_min) / static_cast<double>(nodes - 1); }
    [[nodiscard]] double node(std::size_t i) const {
        return x_min + (x_max - x_min) * (static_cast<double>(i) / static_cast<double>(nodes - 1));
    }
    /// Symmetric grid [-half_width, half_width].
    static GridSpec symmetric(double half_width, std::size_t nodes = 801);
};

enum class Column : std::size_t { excess_occupation = 0, current, shot_noise, friction, diffusion };
inline constexpr std::size_t kColumnCount = 5;
inline constexpr std::array<const char*, kColumnCount> kColumnNames{"excess_occupation", "current", "shot_noise",
                                                                    "friction", "diffusion"};

/// The three columns the Langevin integrator needs, interpolated together.
struct DynamicCoefficients {
    double excess_occupation;
    double friction;
    double diffusion;
};

/// Tabulated transport columns on a uniform grid with piecewise cubic Hermite
/// interpolation. Node slopes are fourth-order finite differences (one-sided
/// at the ends), so cubic data is reproduced exactly and values at nodes are
/// returned verbatim. Immutable after construction.
class CoefficientTable {
public:
    CoefficientTable(GridSpec grid, std::vector<TransportPoint> points, double reference_occupation,
                     std::string fingerprint);

    [[nodiscard]] const GridSpec& grid() const { return grid_; }
    [[nodiscard]] std::size_t size() const { return points_.size(); }
    [[nodiscard]] const std::vector<TransportPoint>& points() const { return points_; }
    [[nodiscard]] double reference_occupation() const { return reference_; }
    [[nodiscard]] const std::string& fingerprint() const { return fingerprint_; }
    [[nodiscard]] std::vector<double> column(Column c) const;

    [[nodiscard]] bool contains(double x) const { return x >= grid_.x_min && x <= grid_.x_max; }

    /// Throws TableRangeError outside [x_min, x_max].
    [[nodiscard]] TransportPoint interpolate(double x) const;
    [[nodiscard]] double interpolate(Column c, double x) const;
    [[nodiscard]] DynamicCoefficients dynamics(double x) const;

    /// Grid node with the largest current; ties within 1e-12 relative go to
    /// the node closest to x = 0.
    [[nodiscard]] double current_maximum_position() const;

private:
    struct Cell {
        std::size_t index;
        double t;
        bool at_node;
    };
    [[nodiscard]] Cell locate(double x) const;
    [[nodiscard]] double eval(std::size_t col, const Cell& cell) const;

    GridSpec grid_;
    std::vector<TransportPoint> points_;
    double reference_;
    std::string fingerprint_;
    double inv_spacing_;
    // per node: value then h * slope for each column
    std::vector<std::array<double, 2 * kColumnCount>> nodes_;
};

/// Fingerprint of everything that determines a table's contents.
[[nodiscard]] std::string table_fingerprint(const SystemParams& params, const QuadratureSettings& quad,
                                            const GridSpec& grid);

/// Evaluates every column at every node on up to `threads` workers.
/// Throws NumericalError naming the node if any column is non-finite.
[[nodiscard]] CoefficientTable build_coefficient_table(const SystemParams& params, const GridSpec& grid,
                                                       const QuadratureSettings& quad = {}, unsigned threads = 1);

/// Same, with an existing N0 (used when tabulating several grids of one device).
[[nodiscard]] CoefficientTable build_coefficient_table(const SystemParams& params, const GridSpec& grid,
                                                       const QuadratureSettings& quad, unsigned threads,
                                                       double reference_occupation);

[[nodiscard]] nlohmann::json table_to_json(const CoefficientTable& table, const SystemParams& params,
                                           const QuadratureSettings& quad);

void save_table(const std::filesystem::path& path, const CoefficientTable& table, const SystemParams& params,
                const QuadratureSettings& quad);

/// Reads a table file; throws NumericalError if it is unreadable or its
/// checksum does not match.
[[nodiscard]] CoefficientTable load_table(const std::filesystem::path& path);

struct CacheLookup {
    std::optional<CoefficientTable> table;
    std::string status; ///< "hit", "missing", "stale fingerprint" or "corrupt: ..."
};

/// Loads `path` only if its fingerprint equals `expected`.
[[nodiscard]] CacheLookup lookup_cached_table(const std::filesystem::path& path, const std::string& expected);

} // namespace nemclock
