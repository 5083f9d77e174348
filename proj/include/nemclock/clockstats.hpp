#pragma once

#include "nemclock/coefficient_table.hpp"
#include "nemclock/histogram.hpp"
#include "nemclock/readout.hpp"

#include "json.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nemclock {

/// C(k dt) = E[I(t + k dt) I(t)] - E[I]^2 for k = 0..max_lag.
struct CorrelationCurve {
    double lag_step = 0.0;
    std::vector<double> values;
    std::vector<double> std_errors; ///< across series, or across segments of a single series
    std::size_t series_count = 0;
    std::size_t samples_per_series = 0;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] double lag(std::size_t k) const { return static_cast<double>(k) * lag_step; }
};

/// Unbiased lag estimator over an ensemble of equally sampled series. The
/// mean is the grand mean of all samples; lagged products are summed within
/// each series (zero-padded FFT) and then across series, and divided by the
/// number of pairs at each lag. Throws NumericalError if a series is not
/// longer than max_lag.
[[nodiscard]] CorrelationCurve autocorrelation(const std::vector<std::vector<double>>& series, double sample_interval,
                                               std::size_t max_lag);

struct Spectrum {
    std::vector<double> omega;
    std::vector<double> values;
    double floor = 0.0;
};

struct SpectrumOptions {
    double omega_max = 0.0;  ///< 0 means the Nyquist frequency pi / lag_step
    std::size_t points = 2001;
    bool hann_window = true; ///< taper the correlation before transforming
};

/// S(w) = int dt C(t) e^{i w t} + floor, with the even extension of C and an
/// optional Hann lag window.
[[nodiscard]] Spectrum power_spectrum(const CorrelationCurve& curve, double shot_noise_floor,
                                      const SpectrumOptions& options = {});

struct SpectralPeak {
    double omega = 0.0;
    double height = 0.0;
    double width = 0.0; ///< full width at half height above the floor
};

/// Largest value of S in [omega_min, omega_max], refined by a parabola through
/// the neighbouring points. Throws if the range holds no interior maximum.
[[nodiscard]] SpectralPeak find_spectral_peak(const Spectrum& spectrum, double omega_min, double omega_max);

/// E[Delta_x] = int dx P(x) Delta_x on the table grid.
[[nodiscard]] double expected_shot_noise(const GridDensity& density, const CoefficientTable& table);

[[nodiscard]] std::vector<double> waiting_times(const TickSeries& ticks);
/// Waiting times of each series, concatenated (no gaps across series).
[[nodiscard]] std::vector<double> waiting_times(const std::vector<TickSeries>& ticks);

struct WtdFit {
    double mean = 0.0;
    double variance = 0.0;
    double shape = 0.0; ///< lambda = mean^3 / variance
    std::size_t sample_count = 0;
    double ks_statistic = 0.0;
};

/// Inverse-Gaussian CDF written to stay finite for large lambda / mu.
[[nodiscard]] double inverse_gaussian_cdf(double x, double mean, double shape);

/// Maximum-likelihood inverse-Gaussian fit and its Kolmogorov-Smirnov distance.
[[nodiscard]] WtdFit fit_inverse_gaussian(std::span<const double> samples);

struct AccuracyResolution {
    double accuracy = 0.0;   ///< N = mean^2 / variance
    double resolution = 0.0; ///< nu = 1 / mean
    double mean = 0.0;
    double variance = 0.0;
    bool accuracy_infinite = false; ///< zero variance; accuracy holds +inf
};

[[nodiscard]] AccuracyResolution accuracy_resolution(std::span<const double> samples);

struct EntropyProduction {
    double rate = 0.0;     ///< beta V int P(x) <I>_x dx
    double per_tick = 0.0; ///< rate / nu
};

/// Throws NumericalError if the trapezoid integral of `density` differs from
/// 1 by more than 1e-6.
[[nodiscard]] EntropyProduction entropy_per_tick(const SystemParams& params, const GridSpec& grid,
                                                 std::span<const double> density, const CoefficientTable& table,
                                                 double resolution);

struct AllanPoint {
    double averaging_time = 0.0;
    double variance = 0.0;
    std::size_t differences = 0;
};

/// Non-overlapping Allan variance of the clock reading theta(t) = mu n(t).
/// Windows start at observation_start + origin_offset. Throws NumericalError
/// listing every T whose observation span is shorter than 3 T.
[[nodiscard]] std::vector<AllanPoint> allan_variance(const TickSeries& ticks, double mean_wait,
                                                     std::span<const double> averaging_times,
                                                     double origin_offset = 0.0);

/// Pools the second differences of several independent series.
[[nodiscard]] std::vector<AllanPoint> allan_variance(const std::vector<TickSeries>& ticks, double mean_wait,
                                                     std::span<const double> averaging_times,
                                                     double origin_offset = 0.0);

/// mu / (N T).
[[nodiscard]] double renewal_allan_asymptote(double mean_wait, double accuracy, double averaging_time);

/// Logarithmic grid with `per_decade` points per decade from t_min up to t_max.
[[nodiscard]] std::vector<double> log_grid(double t_min, double t_max, int per_decade = 20);

struct ClockReport {
    std::size_t tick_count = 0;
    WtdFit wtd;
    AccuracyResolution accuracy;
    EntropyProduction entropy;
    std::vector<AllanPoint> allan;
    std::vector<AllanPoint> allan_shifted;
    SpectralPeak spectral_peak;
    double shot_noise_floor = 0.0;
    double mean_current = 0.0;

    [[nodiscard]] nlohmann::json to_json() const;
};

} // namespace nemclock
