#include "nemclock/clockstats.hpp"

#include "nemclock/errors.hpp"
#include "nemclock/fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace nemclock {

namespace {

constexpr std::size_t kErrorSegments = 8;

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return s / static_cast<double>(v.size() - 1);
}

// Lagged sums of one series after removing `mean`.
std::vector<double> centred_sums(std::span<const double> y, double mean, std::size_t max_lag) {
    std::vector<double> c(y.begin(), y.end());
    for (double& v : c) {
        v -= mean;
    }
    return lagged_product_sums(c, max_lag);
}

// Phi(-z) exp(z^2 / 2) for z >= 0.
double mills_scaled(double z) {
    if (z < 30.0) {
        return 0.5 * std::erfc(z / std::numbers::sqrt2) * std::exp(0.5 * z * z);
    }
    const double r = 1.0 / (z * z);
    const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    return series / (z * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

} // namespace

CorrelationCurve autocorrelation(const std::vector<std::vector<double>>& series, double sample_interval,
                                 std::size_t max_lag) {
    if (series.empty()) {
        throw NumericalError("autocorrelation: no series given");
    }
    if (!(sample_interval > 0.0)) {
        throw NumericalError("autocorrelation: sample interval must be > 0");
    }
    double total = 0.0;
    double count = 0.0;
    for (const auto& s : series) {
        if (s.size() <= max_lag) {
            std::ostringstream msg;
            msg << "autocorrelation: series of length " << s.size() << " is not longer than the maximum lag "
                << max_lag;
            throw NumericalError(msg.str());
        }
        total += std::accumulate(s.begin(), s.end(), 0.0);
        count += static_cast<double>(s.size());
    }
    const double mean = total / count;

    CorrelationCurve curve;
    curve.lag_step = sample_interval;
    curve.series_count = series.size();
    curve.samples_per_series = series.front().size();
    std::vector<double> sums(max_lag + 1, 0.0);
    std::vector<double> pairs(max_lag + 1, 0.0);
    std::vector<std::vector<double>> parts; // per-series (or per-segment) estimates for the errors
    for (const auto& s : series) {
        const auto local = centred_sums(s, mean, max_lag);
        std::vector<double> estimate(max_lag + 1);
        for (std::size_t k = 0; k <= max_lag; ++k) {
            sums[k] += local[k];
            pairs[k] += static_cast<double>(s.size() - k);
            estimate[k] = local[k] / static_cast<double>(s.size() - k);
        }
        parts.push_back(std::move(estimate));
    }
    curve.values.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        curve.values[k] = sums[k] / pairs[k];
    }

    if (series.size() == 1) {
        parts.clear();
        const auto& s = series.front();
        const std::size_t seg = s.size() / kErrorSegments;
        if (seg > max_lag) {
            for (std::size_t b = 0; b < kErrorSegments; ++b) {
                const auto local = centred_sums(std::span<const double>(s).subspan(b * seg, seg), mean, max_lag);
                std::vector<double> estimate(max_lag + 1);
                for (std::size_t k = 0; k <= max_lag; ++k) {
                    estimate[k] = local[k] / static_cast<double>(seg - k);
                }
                parts.push_back(std::move(estimate));
            }
        }
    }
    if (parts.size() >= 2) {
        const double j = static_cast<double>(parts.size());
        curve.std_errors.resize(max_lag + 1);
        for (std::size_t k = 0; k <= max_lag; ++k) {
            double m = 0.0;
            for (const auto& p : parts) {
                m += p[k];
            }
            m /= j;
            double ss = 0.0;
            for (const auto& p : parts) {
                ss += (p[k] - m) * (p[k] - m);
            }
            curve.std_errors[k] = std::sqrt(ss / (j - 1.0) / j);
        }
    }
    return curve;
}

Spectrum power_spectrum(const CorrelationCurve& curve, double shot_noise_floor, const SpectrumOptions& options) {
    if (curve.values.empty() || !(curve.lag_step > 0.0)) {
        throw NumericalError("power spectrum: empty correlation curve");
    }
    if (options.points < 2) {
        throw NumericalError("power spectrum: need at least two frequencies");
    }
    const double dt = curve.lag_step;
    const double omega_max = options.omega_max > 0.0 ? options.omega_max : std::numbers::pi / dt;
    const std::size_t lags = curve.values.size();
    std::vector<double> weighted(lags);
    for (std::size_t k = 0; k < lags; ++k) {
        const double w = options.hann_window
                             ? 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(k) /
                                                     static_cast<double>(lags)))
                             : 1.0;
        weighted[k] = w * curve.values[k];
    }
    Spectrum s;
    s.floor = shot_noise_floor;
    s.omega.resize(options.points);
    s.values.resize(options.points);
    for (std::size_t j = 0; j < options.points; ++j) {
        const double omega = omega_max * static_cast<double>(j) / static_cast<double>(options.points - 1);
        double acc = weighted[0];
        for (std::size_t k = 1; k < lags; ++k) {
            acc += 2.0 * weighted[k] * std::cos(omega * dt * static_cast<double>(k));
        }
        s.omega[j] = omega;
        s.values[j] = dt * acc + shot_noise_floor;
    }
    return s;
}

SpectralPeak find_spectral_peak(const Spectrum& s, double omega_min, double omega_max) {
    std::size_t best = s.values.size();
    for (std::size_t j = 0; j < s.values.size(); ++j) {
        if (s.omega[j] < omega_min || s.omega[j] > omega_max) {
            continue;
        }
        if (best == s.values.size() || s.values[j] > s.values[best]) {
            best = j;
        }
    }
    if (best == s.values.size() || best == 0 || best + 1 >= s.values.size() ||
        s.values[best - 1] > s.values[best] || s.values[best + 1] > s.values[best]) {
        throw NumericalError("spectral peak: no interior maximum in the requested range");
    }
    SpectralPeak peak;
    const double y0 = s.values[best - 1];
    const double y1 = s.values[best];
    const double y2 = s.values[best + 1];
    const double h = s.omega[best + 1] - s.omega[best];
    const double denom = y0 - 2.0 * y1 + y2;
    const double shift = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
    peak.omega = s.omega[best] + shift * h;
    peak.height = y1 - 0.25 * (y0 - y2) * shift;

    const double half = s.floor + 0.5 * (peak.height - s.floor);
    auto crossing = [&](std::size_t from, int dir) -> double {
        std::size_t j = from;
        while (true) {
            if ((dir < 0 && j == 0) || (dir > 0 && j + 1 >= s.values.size())) {
                return std::numeric_limits<double>::quiet_NaN();
            }
            const std::size_t next = dir < 0 ? j - 1 : j + 1;
            if (s.values[next] < half) {
                const double f = (s.values[j] - half) / (s.values[j] - s.values[next]);
                return s.omega[j] + f * (s.omega[next] - s.omega[j]);
            }
            j = next;
        }
    };
    peak.width = crossing(best, +1) - crossing(best, -1);
    return peak;
}

double expected_shot_noise(const GridDensity& density, const CoefficientTable& table) {
    if (density.grid().nodes != table.grid().nodes || density.grid().x_min != table.grid().x_min ||
        density.grid().x_max != table.grid().x_max) {
        throw NumericalError("shot-noise floor: density and table grids differ");
    }
    const auto p = density.density();
    const auto delta = table.column(Column::shot_noise);
    std::vector<double> y(p.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = p[i] * delta[i];
    }
    return trapezoid(table.grid(), y);
}

std::vector<double> waiting_times(const TickSeries& ticks) {
    if (ticks.size() < 2) {
        throw NumericalError("waiting times need at least two ticks");
    }
    std::vector<double> w(ticks.size() - 1);
    for (std::size_t i = 1; i < ticks.size(); ++i) {
        w[i - 1] = ticks.tick_times[i] - ticks.tick_times[i - 1];
    }
    return w;
}

std::vector<double> waiting_times(const std::vector<TickSeries>& ticks) {
    std::vector<double> all;
    for (const auto& t : ticks) {
        if (t.size() >= 2) {
            const auto w = waiting_times(t);
            all.insert(all.end(), w.begin(), w.end());
        }
    }
    if (all.empty()) {
        throw NumericalError("waiting times need at least two ticks");
    }
    return all;
}

double inverse_gaussian_cdf(double x, double mean, double shape) {
    if (!(x > 0.0)) {
        return 0.0;
    }
    const double a = std::sqrt(shape / x);
    const double first = normal_cdf(a * (x / mean - 1.0));
    // exp(2 lambda / mu) Phi(-z) = exp(-lambda (x - mu)^2 / (2 x mu^2)) R(z)
    const double z = a * (x / mean + 1.0);
    const double d = x - mean;
    const double second = std::exp(-shape * d * d / (2.0 * x * mean * mean)) * mills_scaled(z);
    return std::min(1.0, first + second);
}

WtdFit fit_inverse_gaussian(std::span<const double> samples) {
    if (samples.size() < 100) {
        throw NumericalError("inverse-Gaussian fit needs at least 100 samples");
    }
    double sum = 0.0;
    double inv_sum = 0.0;
    for (double s : samples) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw NumericalError("inverse-Gaussian fit: samples must be positive and finite");
        }
        sum += s;
        inv_sum += 1.0 / s;
    }
    const double n = static_cast<double>(samples.size());
    const double mu = sum / n;
    const double inv_shape = inv_sum / n - 1.0 / mu;
    if (!(inv_shape > 1e-14 / mu) || !(sample_variance(samples) > 0.0)) {
        throw NumericalError("inverse-Gaussian fit: degenerate (zero) variance");
    }
    WtdFit fit;
    fit.mean = mu;
    fit.shape = 1.0 / inv_shape;
    fit.variance = mu * mu * mu * inv_shape;
    fit.sample_count = samples.size();

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = inverse_gaussian_cdf(sorted[i], fit.mean, fit.shape);
        ks = std::max({ks, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    fit.ks_statistic = ks;
    return fit;
}

AccuracyResolution accuracy_resolution(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw NumericalError("accuracy needs at least two waiting times");
    }
    AccuracyResolution r;
    r.mean = mean_of(samples);
    if (!(r.mean > 0.0)) {
        throw NumericalError("accuracy: mean waiting time must be positive");
    }
    r.variance = sample_variance(samples);
    r.resolution = 1.0 / r.mean;
    // spread at the level of rounding in the tick times counts as none
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * r.mean;
    if (r.variance <= noise * noise) {
        r.accuracy = std::numeric_limits<double>::infinity();
        r.accuracy_infinite = true;
    } else {
        r.accuracy = r.mean * r.mean / r.variance;
    }
    return r;
}

EntropyProduction entropy_per_tick(const SystemParams& params, const GridSpec& grid, std::span<const double> density,
                                   const CoefficientTable& table, double resolution) {
    if (grid.nodes != table.grid().nodes || grid.x_min != table.grid().x_min || grid.x_max != table.grid().x_max) {
        throw NumericalError("entropy production: density and table grids differ");
    }
    const double norm = trapezoid(grid, density);
    if (std::abs(norm - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "entropy production: position density integrates to " << norm << ", not 1";
        throw NumericalError(msg.str());
    }
    if (!(resolution > 0.0)) {
        throw NumericalError("entropy production: resolution must be positive");
    }
    const auto current = table.column(Column::current);
    std::vector<double> y(density.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = density[i] * current[i];
    }
    EntropyProduction e;
    e.rate = params.inverse_temperature * params.voltage() * trapezoid(grid, y);
    e.per_tick = e.rate / resolution;
    return e;
}

namespace {

struct AllanAccumulator {
    double sum = 0.0;
    std::size_t count = 0;
};

void accumulate_allan(const TickSeries& ticks, double mean_wait, double T, double origin_offset,
                      AllanAccumulator& acc) {
    const double start = ticks.observation_start + origin_offset;
    const auto windows = static_cast<std::size_t>(std::floor((ticks.observation_end - start) / T));
    const auto& t = ticks.tick_times;
    double x_prev2 = 0.0;
    double x_prev = 0.0;
    for (std::size_t n = 0; n <= windows; ++n) {
        const double edge = start + static_cast<double>(n) * T;
        const auto count = static_cast<double>(std::upper_bound(t.begin(), t.end(), edge) - t.begin());
        const double x = mean_wait * count - static_cast<double>(n) * T;
        if (n >= 2) {
            const double d = x - 2.0 * x_prev + x_prev2;
            acc.sum += d * d;
            ++acc.count;
        }
        x_prev2 = x_prev;
        x_prev = x;
    }
}

std::vector<AllanPoint> allan_impl(const std::vector<const TickSeries*>& series, double mean_wait,
                                   std::span<const double> averaging_times, double origin_offset) {
    if (!(mean_wait > 0.0)) {
        throw NumericalError("Allan variance: mean waiting time must be positive");
    }
    std::ostringstream bad;
    for (double T : averaging_times) {
        bool ok = T > 0.0;
        for (const auto* s : series) {
            ok = ok && s->observation_end - s->observation_start - origin_offset >= 3.0 * T;
        }
        if (!ok) {
            bad << ' ' << T;
        }
    }
    if (!bad.str().empty()) {
        throw NumericalError("Allan variance: observation span shorter than 3 T for T =" + bad.str());
    }
    std::vector<AllanPoint> out;
    for (double T : averaging_times) {
        AllanAccumulator acc;
        for (const auto* s : series) {
            accumulate_allan(*s, mean_wait, T, origin_offset, acc);
        }
        out.push_back({T, acc.sum / static_cast<double>(acc.count) / (2.0 * T * T), acc.count});
    }
    return out;
}

} // namespace

std::vector<AllanPoint> allan_variance(const TickSeries& ticks, double mean_wait,
                                       std::span<const double> averaging_times, double origin_offset) {
    return allan_impl({&ticks}, mean_wait, averaging_times, origin_offset);
}

std::vector<AllanPoint> allan_variance(const std::vector<TickSeries>& ticks, double mean_wait,
                                       std::span<const double> averaging_times, double origin_offset) {
    std::vector<const TickSeries*> ptrs;
    for (const auto& t : ticks) {
        ptrs.push_back(&t);
    }
    if (ptrs.empty()) {
        throw NumericalError("Allan variance: no tick series");
    }
    return allan_impl(ptrs, mean_wait, averaging_times, origin_offset);
}

double renewal_allan_asymptote(double mean_wait, double accuracy, double averaging_time) {
    return mean_wait / (accuracy * averaging_time);
}

std::vector<double> log_grid(double t_min, double t_max, int per_decade) {
    if (!(t_min > 0.0) || !(t_max >= t_min) || per_decade < 1) {
        throw NumericalError("log grid: need 0 < t_min <= t_max");
    }
    std::vector<double> g;
    for (int k = 0;; ++k) {
        const double t = t_min * std::pow(10.0, static_cast<double>(k) / per_decade);
        if (t > t_max * (1.0 + 1e-12)) {
            break;
        }
        g.push_back(t);
    }
    return g;
}

nlohmann::json ClockReport::to_json() const {
    auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    auto allan_json = [](const std::vector<AllanPoint>& pts) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& p : pts) {
            a.push_back({{"T", p.averaging_time}, {"sigma_y2", p.variance}, {"differences", p.differences}});
        }
        return a;
    };
    return {{"tick_count", tick_count},
            {"waiting_time_fit",
             {{"family", "inverse_gaussian"},
              {"mean", wtd.mean},
              {"variance", wtd.variance},
              {"shape", wtd.shape},
              {"sample_count", wtd.sample_count},
              {"ks_statistic", wtd.ks_statistic}}},
            {"resolution", accuracy.resolution},
            {"accuracy", finite_or_null(accuracy.accuracy)},
            {"accuracy_infinite", accuracy.accuracy_infinite},
            {"mean_wait", accuracy.mean},
            {"wait_variance", accuracy.variance},
            {"entropy_rate", entropy.rate},
            {"entropy_per_tick", entropy.per_tick},
            {"mean_current", mean_current},
            {"shot_noise_floor", shot_noise_floor},
            {"spectral_peak",
             {{"omega", finite_or_null(spectral_peak.omega)},
              {"height", finite_or_null(spectral_peak.height)},
              {"width", finite_or_null(spectral_peak.width)}}},
            {"allan", allan_json(allan)},
            {"allan_shifted_grid", allan_json(allan_shifted)}};
}

} // namespace nemclock
