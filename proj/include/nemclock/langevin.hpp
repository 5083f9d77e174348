#pragma once

#include "nemclock/coefficient_table.hpp"
#include "nemclock/errors.hpp"
#include "nemclock/params.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace nemclock {

struct SimConfig {
    double time_step = kTwoPi / 200.0;
    double burn_in = 200.0 * kTwoPi;
    double duration = 2200.0 * kTwoPi; ///< total integrated time, burn-in included
    std::uint64_t seed = 1;
    std::size_t ensemble_size = 1;
    std::size_t record_stride = 1;
    /// Overrides the thermal initial draw when set: (x, v).
    std::optional<std::pair<double, double>> initial_state;

    void validate() const;
    [[nodiscard]] std::size_t total_steps() const;
    [[nodiscard]] std::size_t burn_in_steps() const;
    [[nodiscard]] std::size_t recorded_samples() const;
};

/// Post-burn-in samples x(t_0 + k * sample_interval), v(...).
struct Trajectory {
    double t0 = 0.0;
    double sample_interval = 0.0;
    std::vector<double> positions;
    std::vector<double> velocities;
    std::uint64_t seed = 0;
    std::size_t index = 0;
    std::string params_hash;

    [[nodiscard]] std::size_t size() const { return positions.size(); }
    [[nodiscard]] double time(std::size_t k) const { return t0 + static_cast<double>(k) * sample_interval; }
    [[nodiscard]] std::vector<double> times() const;
};

/// Independent generator for trajectory `index` of a run seeded with `seed`.
/// `domain` separates unrelated uses of the same (seed, index).
[[nodiscard]] std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0);

inline constexpr std::uint64_t kLangevinDomain = 0x4c414e47;

/// Initial (x, v) from the equilibrium Gibbs state of the bare oscillator at
/// the lead temperature, redrawn until x lies inside the table.
[[nodiscard]] std::pair<double, double> thermal_initial_state(const SystemParams& params, const CoefficientTable& table,
                                                              std::mt19937_64& rng);

/// Integrates one trajectory and calls `observe(step, t, x, v)` for every
/// state from the end of the burn-in to the final step.
///
/// Semi-implicit (symplectic) Euler-Maruyama:
///   v' = v + [-gamma_x v - w0^2 x + (F/m) n_x] dt + (sqrt(D_x)/m) dW
///   x' = x + v' dt
template <class Observer>
void integrate_with(const CoefficientTable& table, const SystemParams& params, const SimConfig& sim,
                    std::size_t index, Observer&& observe) {
    std::mt19937_64 rng = make_stream(sim.seed, index, kLangevinDomain);
    auto [x, v] = sim.initial_state ? *sim.initial_state : thermal_initial_state(params, table, rng);
    std::normal_distribution<double> normal;

    const double dt = sim.time_step;
    const double sqrt_dt = std::sqrt(dt);
    const double w2 = params.oscillator_frequency * params.oscillator_frequency;
    const double force = params.force_per_charge() / params.oscillator_mass;
    const double inv_m = 1.0 / params.oscillator_mass;
    const std::size_t total = sim.total_steps();
    const std::size_t burn = sim.burn_in_steps();

    if (!table.contains(x)) {
        std::ostringstream msg;
        msg << "initial position x=" << x << " is outside the coefficient table";
        throw TableRangeError(msg.str(), x);
    }
    if (burn == 0) {
        observe(std::size_t{0}, 0.0, x, v);
    }
    for (std::size_t step = 1; step <= total; ++step) {
        DynamicCoefficients c;
        try {
            c = table.dynamics(x);
        } catch (const TableRangeError& e) {
            std::ostringstream msg;
            msg << "trajectory " << index << " left the coefficient table at t=" << (step - 1) * dt << ": "
                << e.what();
            throw TableRangeError(msg.str(), x);
        }
        const double noise = std::sqrt(std::max(c.diffusion, 0.0)) * inv_m * sqrt_dt * normal(rng);
        v += (-c.friction * v - w2 * x + force * c.excess_occupation) * dt + noise;
        x += v * dt;
        if (!std::isfinite(x) || !std::isfinite(v)) {
            std::ostringstream msg;
            msg << "trajectory " << index << " became non-finite at t=" << step * dt;
            throw NumericalError(msg.str());
        }
        if (step >= burn) {
            observe(step, static_cast<double>(step) * dt, x, v);
        }
    }
}

[[nodiscard]] Trajectory integrate_trajectory(const CoefficientTable& table, const SystemParams& params,
                                              const SimConfig& sim, std::size_t index = 0);

/// sim.ensemble_size trajectories, stream i keyed by (sim.seed, i).
[[nodiscard]] std::vector<Trajectory> sample_stationary_ensemble(const CoefficientTable& table,
                                                                 const SystemParams& params, const SimConfig& sim,
                                                                 unsigned threads = 1);

/// Stationary position variance of the harmonic oscillator with constant
/// friction and diffusion: D / (2 m^2 gamma w0^2).
[[nodiscard]] double thermal_position_variance(double friction, double diffusion, const SystemParams& params);

} // namespace nemclock
