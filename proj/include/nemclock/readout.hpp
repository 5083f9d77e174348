#pragma once

#include "nemclock/coefficient_table.hpp"
#include "nemclock/langevin.hpp"

#include <numbers>
#include <string>
#include <vector>

namespace nemclock {

/// A tick is registered whenever x crosses `level` (in either direction);
/// crossings closer than `refractory` to the previous tick are dropped.
struct TickPolicy {
    double level = 0.0;
    double refractory = 0.25 * std::numbers::pi;

    /// Level at the current maximum of the table, default refractory window
    /// 0.25 pi / w0.
    static TickPolicy from_table(const CoefficientTable& table, const SystemParams& params);
};

struct TickSeries {
    std::vector<double> tick_times;
    TickPolicy policy;
    std::string source; ///< fingerprint of the generating trajectory or run
    double observation_start = 0.0;
    double observation_end = 0.0;

    [[nodiscard]] std::size_t size() const { return tick_times.size(); }
};

/// Incremental crossing detector fed one state at a time.
class TickDetector {
public:
    explicit TickDetector(TickPolicy policy) : policy_(policy) {}

    void feed(double t, double x) {
        if (started_) {
            const double level = policy_.level;
            if ((prev_x_ < level && x >= level) || (prev_x_ > level && x <= level)) {
                const double tc = prev_t_ + (level - prev_x_) / (x - prev_x_) * (t - prev_t_);
                if (!have_tick_ || tc - last_tick_ >= policy_.refractory) {
                    ticks_.push_back(tc);
                    last_tick_ = tc;
                    have_tick_ = true;
                }
            }
        } else {
            start_ = t;
            started_ = true;
        }
        prev_t_ = t;
        prev_x_ = x;
    }

    [[nodiscard]] TickSeries finish(std::string source) const;
    [[nodiscard]] const std::vector<double>& ticks() const { return ticks_; }

private:
    TickPolicy policy_;
    std::vector<double> ticks_;
    bool started_ = false;
    bool have_tick_ = false;
    double start_ = 0.0;
    double prev_t_ = 0.0;
    double prev_x_ = 0.0;
    double last_tick_ = 0.0;
};

/// I(t_k) = <I>_{x(t_k)} on the trajectory's sampling grid.
[[nodiscard]] std::vector<double> transduce(const Trajectory& traj, const CoefficientTable& table);

[[nodiscard]] TickSeries detect_ticks(const Trajectory& traj, const CoefficientTable& table,
                                      const SystemParams& params);
[[nodiscard]] TickSeries detect_ticks(const Trajectory& traj, const TickPolicy& policy);

/// Ticks of an arbitrary sampled path x(t_k).
[[nodiscard]] TickSeries detect_ticks(const std::vector<double>& times, const std::vector<double>& positions,
                                      const TickPolicy& policy, std::string source = {});

} // namespace nemclock
