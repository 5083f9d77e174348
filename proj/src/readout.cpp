#include "nemclock/readout.hpp"

#include "nemclock/errors.hpp"

#include <numbers>

namespace nemclock {

TickPolicy TickPolicy::from_table(const CoefficientTable& table, const SystemParams& params) {
    return {table.current_maximum_position(), 0.25 * std::numbers::pi / params.oscillator_frequency};
}

TickSeries TickDetector::finish(std::string source) const {
    TickSeries s;
    s.tick_times = ticks_;
    s.policy = policy_;
    s.source = std::move(source);
    s.observation_start = start_;
    s.observation_end = prev_t_;
    return s;
}

std::vector<double> transduce(const Trajectory& traj, const CoefficientTable& table) {
    std::vector<double> current(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        current[k] = table.interpolate(Column::current, traj.positions[k]);
    }
    return current;
}

TickSeries detect_ticks(const Trajectory& traj, const CoefficientTable& table, const SystemParams& params) {
    return detect_ticks(traj, TickPolicy::from_table(table, params));
}

TickSeries detect_ticks(const Trajectory& traj, const TickPolicy& policy) {
    if (!(policy.refractory >= 0.0)) {
        throw ConfigError("readout: refractory window must be >= 0");
    }
    TickDetector detector(policy);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        detector.feed(traj.time(k), traj.positions[k]);
    }
    return detector.finish(traj.params_hash + "/" + std::to_string(traj.seed) + "/" + std::to_string(traj.index));
}

TickSeries detect_ticks(const std::vector<double>& times, const std::vector<double>& positions,
                        const TickPolicy& policy, std::string source) {
    if (times.size() != positions.size()) {
        throw NumericalError("detect_ticks: time and position series differ in length");
    }
    if (!(policy.refractory >= 0.0)) {
        throw ConfigError("readout: refractory window must be >= 0");
    }
    TickDetector detector(policy);
    for (std::size_t k = 0; k < times.size(); ++k) {
        detector.feed(times[k], positions[k]);
    }
    return detector.finish(std::move(source));
}

} // namespace nemclock
