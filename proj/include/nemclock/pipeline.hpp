#pragma once

#include "nemclock/clockstats.hpp"
#include "nemclock/coefficient_table.hpp"
#include "nemclock/config.hpp"
#include "nemclock/errors.hpp"
#include "nemclock/histogram.hpp"
#include "nemclock/readout.hpp"
#include "nemclock/tickinfo.hpp"
#include "nemclock/toymodels.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nemclock {

using ProgressLog = std::function<void(const std::string&)>;

/// Runs `body` and prefixes any ConfigError / NumericalError with "[stage] ".
template <class F>
decltype(auto) in_stage(const char* stage, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("[") + stage + "] " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("[") + stage + "] " + e.what());
    }
}

struct TableBuild {
    std::string fingerprint;
    std::string cache_status; ///< "hit", "missing", "stale fingerprint", "corrupt: ...", or "disabled"
    GridSpec grid;
};

struct CoefficientStage {
    CoefficientTable table;
    std::optional<double> amplitude; ///< limit-cycle A0 on the final table
    std::optional<ReducedCycle> cycle;
    std::vector<TableBuild> builds; ///< provisional and final tables, in build order
    std::vector<std::string> notes;
};

/// Half-width of the provisional grid: the level shift F x must sweep the
/// bias window plus 4 max(delta, 1/beta) on either side.
[[nodiscard]] double provisional_extent(const SystemParams& params);

/// Table for the configured device. Without a fixed grid.x_max the extent is
/// sized from a coarse provisional table: max(margin A0, A0 + k sigma_A) above
/// threshold, k max(sigma_thermal, sigma_Gibbs) below, and rebuilt once if the
/// final table's own A0 needs more room. Tables are cached by fingerprint.
[[nodiscard]] CoefficientStage prepare_coefficients(const ExperimentConfig& cfg, unsigned threads,
                                                    const ProgressLog& log = {});

/// Cached build of one table. `use_cache` false skips the cache entirely.
[[nodiscard]] CoefficientTable cached_table(const SystemParams& params, const QuadratureSettings& quad,
                                            const GridSpec& grid, const std::filesystem::path& cache_dir,
                                            bool use_cache, unsigned threads, TableBuild& record);

/// Per-trajectory digest gathered while integrating; full paths are not kept.
struct TrajectoryDigest {
    TickSeries ticks;
    std::vector<double> current;  ///< <I>_x every record_stride steps
    std::vector<double> sample_t; ///< exported sample (trajectory 0 only)
    std::vector<double> sample_x;
    std::vector<double> sample_v;
    std::vector<double> bulk;     ///< interleaved x, v every record_stride steps (optional)
    std::optional<GridDensity> density;
    std::optional<HistogramAccumulator> amplitude; ///< A = sqrt(x^2 + v^2 / w0^2)
    double sum_x = 0.0;
    double sum_x2 = 0.0;
    std::size_t steps = 0;
};

struct SimulationStage {
    SimConfig sim;
    TickPolicy policy;
    double current_interval = 0.0;
    double amplitude_max = 0.0;
    std::vector<TrajectoryDigest> runs;

    [[nodiscard]] std::vector<TickSeries> tick_series() const;
    [[nodiscard]] GridDensity density() const; ///< P(x) on the table nodes, all trajectories
    [[nodiscard]] Histogram amplitude_histogram() const;
    [[nodiscard]] double position_variance() const;
};

struct SimulationOptions {
    bool keep_current = true;
    bool keep_bulk = false;
};

[[nodiscard]] SimulationStage simulate(const ExperimentConfig& cfg, const CoefficientStage& coeffs, unsigned threads,
                                       const SimulationOptions& options = {}, const ProgressLog& log = {});

/// Position of the largest amplitude-histogram bin after a 5-bin moving average.
[[nodiscard]] double amplitude_peak(const Histogram& h);

struct MiRow {
    std::size_t lag = 0;
    MiResult value;
    MiResult shuffled;
};

struct AnalysisStage {
    ClockReport report;
    std::vector<double> waits;
    Histogram wtd_histogram;
    CorrelationCurve correlation;
    Spectrum spectrum;
    std::vector<KlPoint> kl;
    std::vector<MiRow> mi;
    double amplitude_peak = 0.0;
    std::vector<std::string> notes;
};

[[nodiscard]] AnalysisStage analyze(const ExperimentConfig& cfg, const CoefficientStage& coeffs,
                                    const SimulationStage& sim, const ProgressLog& log = {});

struct ToyStage {
    ReducedCycle cycle;
    std::vector<double> lags;
    std::vector<double> position_analytic, position_simulated, position_error;
    std::vector<double> offset_analytic, offset_simulated, offset_error;
    std::vector<double> telegraph_analytic, telegraph_simulated, telegraph_error;
};

/// Toy-model overlays for the device's reduced cycle: closed forms next to
/// simulated estimates. Throws NumericalError below threshold.
[[nodiscard]] ToyStage toy_overlays(const ExperimentConfig& cfg, const CoefficientStage& coeffs, unsigned threads);

} // namespace nemclock
