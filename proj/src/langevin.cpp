#include "nemclock/langevin.hpp"

#include "nemclock/parallel.hpp"

#include <cmath>

namespace nemclock {

void SimConfig::validate() const {
    if (!(time_step > 0.0) || !std::isfinite(time_step)) {
        throw ConfigError("sim.time_step must be > 0");
    }
    if (!(burn_in >= 0.0)) {
        throw ConfigError("sim.burn_in must be >= 0");
    }
    if (!(duration > burn_in) || !std::isfinite(duration)) {
        throw ConfigError("sim.duration must exceed sim.burn_in");
    }
    if (ensemble_size < 1) {
        throw ConfigError("sim.ensemble_size must be >= 1");
    }
    if (record_stride < 1) {
        throw ConfigError("sim.record_stride must be >= 1");
    }
}

std::size_t SimConfig::total_steps() const {
    return static_cast<std::size_t>(std::llround(duration / time_step));
}

std::size_t SimConfig::burn_in_steps() const {
    return static_cast<std::size_t>(std::llround(burn_in / time_step));
}

std::size_t SimConfig::recorded_samples() const {
    return (total_steps() - burn_in_steps()) / record_stride + 1;
}

std::vector<double> Trajectory::times() const {
    std::vector<double> t(size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        t[k] = time(k);
    }
    return t;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(domain >> 32)};
    return std::mt19937_64(seq);
}

std::pair<double, double> thermal_initial_state(const SystemParams& params, const CoefficientTable& table,
                                                std::mt19937_64& rng) {
    const double m = params.oscillator_mass;
    const double w = params.oscillator_frequency;
    const double t = 1.0 / params.inverse_temperature;
    std::normal_distribution<double> sx(0.0, std::sqrt(t / (m * w * w)));
    std::normal_distribution<double> sv(0.0, std::sqrt(t / m));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double x = sx(rng);
        const double v = sv(rng);
        if (table.contains(x)) {
            return {x, v};
        }
    }
    throw NumericalError("coefficient table is too narrow for a thermal initial state");
}

Trajectory integrate_trajectory(const CoefficientTable& table, const SystemParams& params, const SimConfig& sim,
                                std::size_t index) {
    sim.validate();
    Trajectory traj;
    traj.seed = sim.seed;
    traj.index = index;
    traj.params_hash = table.fingerprint();
    traj.sample_interval = sim.time_step * static_cast<double>(sim.record_stride);
    traj.t0 = static_cast<double>(sim.burn_in_steps()) * sim.time_step;
    const std::size_t n = sim.recorded_samples();
    traj.positions.reserve(n);
    traj.velocities.reserve(n);
    const std::size_t burn = sim.burn_in_steps();
    const std::size_t stride = sim.record_stride;
    integrate_with(table, params, sim, index, [&](std::size_t step, double, double x, double v) {
        if ((step - burn) % stride == 0) {
            traj.positions.push_back(x);
            traj.velocities.push_back(v);
        }
    });
    return traj;
}

std::vector<Trajectory> sample_stationary_ensemble(const CoefficientTable& table, const SystemParams& params,
                                                   const SimConfig& sim, unsigned threads) {
    sim.validate();
    std::vector<Trajectory> out(sim.ensemble_size);
    parallel_for(sim.ensemble_size, threads,
                 [&](std::size_t i) { out[i] = integrate_trajectory(table, params, sim, i); });
    return out;
}

double thermal_position_variance(double friction, double diffusion, const SystemParams& params) {
    const double m = params.oscillator_mass;
    const double w = params.oscillator_frequency;
    return diffusion / (2.0 * m * m * friction * w * w);
}

} // namespace nemclock
