#pragma once

#include "nemclock/coefficient_table.hpp"
#include "nemclock/params.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace nemclock {

/// Linearized motion near the limit cycle:
///   dA   = -gamma_A (A - A0) dt + sqrt(D_A) dW_A
///   dphi = w0 dt + sqrt(D_phi) dW_phi
struct ReducedCycle {
    double amplitude = 0.0;
    double amplitude_damping = 0.0;
    double amplitude_diffusion = 0.0;
    double phase_diffusion = 0.0;

    void validate() const;
    /// D_A / (2 gamma_A)
    [[nodiscard]] double amplitude_variance() const;
};

struct TelegraphParams {
    std::array<double, 2> rates{1.0, 1.0}; ///< rate of leaving state 1 and state 2
    std::array<double, 2> means{0.0, 1.0};

    void validate() const;
};

/// I(t) = A(t) [cos phi(t) - b] + c
struct OffsetModelParams {
    double offset_scale = 0.0;
    double ceiling = 0.0;
    ReducedCycle cycle;
};

/// (1/2pi) * contour integral of f(phi) over one turn at x = A cos phi,
/// 256-point trapezoid.
struct CycleAverages {
    double friction_sin2 = 0.0;  ///< <gamma sin^2>
    double diffusion_cos2 = 0.0; ///< <D cos^2>
    double diffusion_sin2 = 0.0; ///< <D sin^2>
};

[[nodiscard]] CycleAverages cycle_averages(const CoefficientTable& table, double amplitude, int points = 256);

/// Cycle-averaged amplitude drift
///   h(A) = -A <gamma sin^2> + <D cos^2> / (2 A w0^2 m^2).
[[nodiscard]] double amplitude_drift(const CoefficientTable& table, const SystemParams& params, double amplitude);

/// Self-oscillation amplitude: the root of 2 m^2 A^2 w0^2 <gamma sin^2> = <D cos^2>
/// where the drift turns from growth to decay. Scans 64 log-spaced
/// amplitudes on (0, x_max / 1.5] and bisects. Returns nullopt when the
/// cycle-averaged friction is positive for every scanned amplitude. Throws
/// NumericalError when negative damping extends past the scanned range.
[[nodiscard]] std::optional<double> limit_cycle_amplitude(const CoefficientTable& table,
                                                          const SystemParams& params);

/// gamma_A = -h'(A0) by central difference with step 1e-3 A0,
/// D_A = <D sin^2> / (w0 m)^2, D_phi = <D cos^2> / (A0 w0 m)^2.
[[nodiscard]] ReducedCycle reduced_coefficients(const CoefficientTable& table, const SystemParams& params,
                                                double amplitude);

/// (A0^2 + D_A e^{-gamma_A t} / (2 gamma_A)) cos(w0 t) e^{-D_phi t / 2} / 2
[[nodiscard]] double analytic_position_autocorrelation(const ReducedCycle& cycle, double omega0, double t);

struct TelegraphStatics {
    std::array<double, 2> stationary{};
    double relaxation_rate = 0.0; ///< lambda_1 + lambda_2

    /// p_{j|i}(t): probability of state j at time t given state i at 0.
    [[nodiscard]] double transition(int i, int j, double t) const;
};

[[nodiscard]] TelegraphStatics telegraph_statics(const TelegraphParams& p);

/// (I2 - I1)^2 lambda_1 lambda_2 e^{-(lambda_1 + lambda_2)|t|} / (lambda_1 + lambda_2)^2
[[nodiscard]] double telegraph_correlation(const TelegraphParams& p, double t);

/// Oscillatory term of analytic_position_autocorrelation plus
/// b^2 D_A e^{-gamma_A t} / (2 gamma_A).
[[nodiscard]] double offset_model_correlation(const OffsetModelParams& p, double omega0, double t);

struct OuAmplitudeSpec {
    ReducedCycle cycle;
};
struct PhaseDiffusionSpec {
    ReducedCycle cycle;
    double omega0 = 1.0;
};
struct TelegraphSpec {
    TelegraphParams params;
};
/// With b = c = 0 this is the position x = A cos phi.
struct OffsetModelSpec {
    OffsetModelParams params;
    double omega0 = 1.0;
};

using ToySpec = std::variant<OuAmplitudeSpec, PhaseDiffusionSpec, TelegraphSpec, OffsetModelSpec>;

/// Samples at t = k dt, k = 0..floor(duration / dt).
/// OU: A(t). Phase: unwrapped phi(t). Telegraph: the current of the occupied
/// state. Offset model: I(t).
struct ToySeries {
    double sample_interval = 0.0;
    std::vector<double> values;
};

/// The amplitude uses the exact OU transition over each step, the phase an
/// Euler-Maruyama step (exact for constant coefficients), the telegraph exact
/// exponential holding times. Initial states are drawn from the stationary law (uniform phase).
[[nodiscard]] ToySeries simulate_toy(const ToySpec& spec, double duration, double dt, std::uint64_t seed,
                                     std::size_t index = 0);

} // namespace nemclock
