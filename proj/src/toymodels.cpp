#include "nemclock/toymodels.hpp"

#include "nemclock/errors.hpp"
#include "nemclock/langevin.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace nemclock {

namespace {

constexpr std::uint64_t kToyDomain = 0x544f5953;

// exact Gaussian transition of the amplitude OU process over one step
struct OuStep {
    OuStep(const ReducedCycle& c, double dt)
        : mean(c.amplitude), decay(std::exp(-c.amplitude_damping * dt)),
          sd(std::sqrt(c.amplitude_variance() * -std::expm1(-2.0 * c.amplitude_damping * dt))) {}
    double operator()(double a, double xi) const { return mean + (a - mean) * decay + sd * xi; }
    double mean;
    double decay;
    double sd;
};

double g_balance(const CoefficientTable& table, const SystemParams& params, double a, double* friction) {
    const CycleAverages c = cycle_averages(table, a);
    const double mw = params.oscillator_mass * params.oscillator_frequency;
    if (friction != nullptr) {
        *friction = c.friction_sin2;
    }
    return 2.0 * mw * mw * a * a * c.friction_sin2 - c.diffusion_cos2;
}

} // namespace

void ReducedCycle::validate() const {
    if (!(amplitude > 0.0)) {
        throw NumericalError("reduced cycle: amplitude must be > 0");
    }
    if (!(amplitude_diffusion >= 0.0) || !(phase_diffusion >= 0.0)) {
        throw NumericalError("reduced cycle: diffusion coefficients must be >= 0");
    }
}

double ReducedCycle::amplitude_variance() const {
    return amplitude_diffusion / (2.0 * amplitude_damping);
}

void TelegraphParams::validate() const {
    if (!(rates[0] > 0.0) || !(rates[1] > 0.0)) {
        throw ConfigError("telegraph rates must be > 0");
    }
}

CycleAverages cycle_averages(const CoefficientTable& table, double amplitude, int points) {
    CycleAverages out;
    for (int k = 0; k < points; ++k) {
        const double phi = kTwoPi * k / points;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const double x = amplitude * c;
        const double g = table.interpolate(Column::friction, x);
        const double d = table.interpolate(Column::diffusion, x);
        out.friction_sin2 += g * s * s;
        out.diffusion_cos2 += d * c * c;
        out.diffusion_sin2 += d * s * s;
    }
    out.friction_sin2 /= points;
    out.diffusion_cos2 /= points;
    out.diffusion_sin2 /= points;
    return out;
}

double amplitude_drift(const CoefficientTable& table, const SystemParams& params, double amplitude) {
    const CycleAverages c = cycle_averages(table, amplitude);
    const double mw = params.oscillator_mass * params.oscillator_frequency;
    return -amplitude * c.friction_sin2 + c.diffusion_cos2 / (2.0 * amplitude * mw * mw);
}

std::optional<double> limit_cycle_amplitude(const CoefficientTable& table, const SystemParams& params) {
    const GridSpec& grid = table.grid();
    const double a_max = std::min(-grid.x_min, grid.x_max) / 1.5;
    if (!(a_max > 0.0)) {
        throw NumericalError("limit cycle: coefficient table must straddle x = 0");
    }
    constexpr int kNodes = 64;
    const double a_min = a_max / 1000.0;
    std::vector<double> a(kNodes);
    std::vector<double> g(kNodes);
    int first_negative = -1; // first amplitude with net negative damping over the cycle
    for (int k = 0; k < kNodes; ++k) {
        a[k] = a_min * std::pow(a_max / a_min, static_cast<double>(k) / (kNodes - 1));
        double friction = 0.0;
        g[k] = g_balance(table, params, a[k], &friction);
        if (first_negative < 0 && friction < 0.0) {
            first_negative = k;
        }
    }
    if (first_negative < 0) {
        return std::nullopt;
    }
    int bracket = -1;
    for (int k = first_negative; k + 1 < kNodes; ++k) {
        if (g[k] < 0.0 && g[k + 1] >= 0.0) {
            bracket = k;
            break;
        }
    }
    if (bracket < 0) {
        std::ostringstream msg;
        msg << "limit cycle: amplitude still growing at A=" << a_max << "; the coefficient table (|x| <= "
            << std::min(-grid.x_min, grid.x_max) << ") is too narrow";
        throw NumericalError(msg.str());
    }
    double lo = a[bracket];
    double hi = a[bracket + 1];
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g_balance(table, params, mid, nullptr) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

ReducedCycle reduced_coefficients(const CoefficientTable& table, const SystemParams& params, double amplitude) {
    if (!(amplitude > 0.0)) {
        throw NumericalError("reduced coefficients: amplitude must be > 0");
    }
    const double mw = params.oscillator_mass * params.oscillator_frequency;
    const double h = 1e-3 * amplitude;
    const CycleAverages c = cycle_averages(table, amplitude);
    ReducedCycle r;
    r.amplitude = amplitude;
    r.amplitude_damping =
        -(amplitude_drift(table, params, amplitude + h) - amplitude_drift(table, params, amplitude - h)) / (2.0 * h);
    r.amplitude_diffusion = c.diffusion_sin2 / (mw * mw);
    r.phase_diffusion = c.diffusion_cos2 / (amplitude * amplitude * mw * mw);
    if (!std::isfinite(r.amplitude_damping) || !std::isfinite(r.amplitude_diffusion) ||
        !std::isfinite(r.phase_diffusion)) {
        std::ostringstream msg;
        msg << "reduced coefficients at A=" << amplitude << " are not finite";
        throw NumericalError(msg.str());
    }
    return r;
}

double analytic_position_autocorrelation(const ReducedCycle& cycle, double omega0, double t) {
    t = std::abs(t);
    const double va = cycle.amplitude_variance() * std::exp(-cycle.amplitude_damping * t);
    return (cycle.amplitude * cycle.amplitude + va) * 0.5 * std::cos(omega0 * t) *
           std::exp(-0.5 * cycle.phase_diffusion * t);
}

double TelegraphStatics::transition(int i, int j, double t) const {
    // lambda_i / Lambda is the stationary weight of the other state
    const int other = 1 - i;
    const double moved = stationary[other] * -std::expm1(-relaxation_rate * std::abs(t));
    return i == j ? 1.0 - moved : moved;
}

TelegraphStatics telegraph_statics(const TelegraphParams& p) {
    p.validate();
    TelegraphStatics s;
    s.relaxation_rate = p.rates[0] + p.rates[1];
    s.stationary = {p.rates[1] / s.relaxation_rate, p.rates[0] / s.relaxation_rate};
    return s;
}

double telegraph_correlation(const TelegraphParams& p, double t) {
    p.validate();
    const double lam = p.rates[0] + p.rates[1];
    const double d = p.means[1] - p.means[0];
    return d * d * p.rates[0] * p.rates[1] * std::exp(-lam * std::abs(t)) / (lam * lam);
}

double offset_model_correlation(const OffsetModelParams& p, double omega0, double t) {
    const double b = p.offset_scale;
    const double va = p.cycle.amplitude_variance() * std::exp(-p.cycle.amplitude_damping * std::abs(t));
    return analytic_position_autocorrelation(p.cycle, omega0, t) + b * b * va;
}

ToySeries simulate_toy(const ToySpec& spec, double duration, double dt, std::uint64_t seed, std::size_t index) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("toy simulation: dt must be > 0");
    }
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw ConfigError("toy simulation: duration must be >= 0");
    }
    const auto n = static_cast<std::size_t>(std::floor(duration / dt * (1.0 + 1e-12))) + 1;
    ToySeries out;
    out.sample_interval = dt;
    out.values.resize(n);
    std::mt19937_64 rng = make_stream(seed, index, kToyDomain);
    std::normal_distribution<double> normal;
    const double sqrt_dt = std::sqrt(dt);

    auto check_ou = [](const ReducedCycle& c) {
        c.validate();
        if (!(c.amplitude_damping > 0.0)) {
            throw ConfigError("toy simulation: amplitude damping must be > 0");
        }
    };

    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, OuAmplitudeSpec>) {
                check_ou(s.cycle);
                const OuStep step(s.cycle, dt);
                double a = s.cycle.amplitude + std::sqrt(s.cycle.amplitude_variance()) * normal(rng);
                out.values[0] = a;
                for (std::size_t k = 1; k < n; ++k) {
                    a = step(a, normal(rng));
                    out.values[k] = a;
                }
            } else if constexpr (std::is_same_v<S, PhaseDiffusionSpec>) {
                s.cycle.validate();
                const double sd = std::sqrt(s.cycle.phase_diffusion) * sqrt_dt;
                std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
                double phi = uniform(rng);
                out.values[0] = phi;
                for (std::size_t k = 1; k < n; ++k) {
                    phi += s.omega0 * dt + sd * normal(rng);
                    out.values[k] = phi;
                }
            } else if constexpr (std::is_same_v<S, TelegraphSpec>) {
                const TelegraphStatics st = telegraph_statics(s.params);
                std::uniform_real_distribution<double> uniform(0.0, 1.0);
                int state = uniform(rng) < st.stationary[0] ? 0 : 1;
                std::exponential_distribution<double> hold0(s.params.rates[0]);
                std::exponential_distribution<double> hold1(s.params.rates[1]);
                double next = state == 0 ? hold0(rng) : hold1(rng);
                for (std::size_t k = 0; k < n; ++k) {
                    const double t = static_cast<double>(k) * dt;
                    while (next <= t) {
                        state = 1 - state;
                        next += state == 0 ? hold0(rng) : hold1(rng);
                    }
                    out.values[k] = s.params.means[state];
                }
            } else {
                const ReducedCycle& c = s.params.cycle;
                check_ou(c);
                const OuStep step(c, dt);
                const double sp = std::sqrt(c.phase_diffusion) * sqrt_dt;
                std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
                double a = c.amplitude + std::sqrt(c.amplitude_variance()) * normal(rng);
                double phi = uniform(rng);
                const double b = s.params.offset_scale;
                const double ceiling = s.params.ceiling;
                out.values[0] = a * (std::cos(phi) - b) + ceiling;
                for (std::size_t k = 1; k < n; ++k) {
                    a = step(a, normal(rng));
                    phi += s.omega0 * dt + sp * normal(rng);
                    out.values[k] = a * (std::cos(phi) - b) + ceiling;
                }
            }
        },
        spec);
    return out;
}

} // namespace nemclock
