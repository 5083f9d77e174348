#pragma once

#include "nemclock/params.hpp"

#include <complex>

namespace nemclock {

/// Steady-state electronic quantities conditioned on a frozen oscillator position.
struct TransportPoint {
    double position = 0.0;
    double excess_occupation = 0.0; ///< <c^dag c>_x - N0
    double current = 0.0;           ///< <I>_x
    double shot_noise = 0.0;        ///< Delta_x
    double friction = 0.0;          ///< gamma_x
    double diffusion = 0.0;         ///< D_x
};

struct Occupation {
    double total = 0.0;
    double excess = 0.0;
};

struct ShotNoiseTerms {
    double thermal = 0.0;
    double partition = 0.0;
    [[nodiscard]] double total() const { return thermal + partition; }
};

struct FrictionDiffusion {
    double friction = 0.0;
    double diffusion = 0.0;
    double step = 0.0; ///< stencil step at which the derivative converged
};

/// 1 / (exp(beta (E - mu)) + 1), evaluated without overflow.
[[nodiscard]] double fermi_dirac(double energy, double mu, double beta);

/// Lorentzian tunnelling rate kappa(E) = Gamma delta^2 / ((E - w)^2 + delta^2).
[[nodiscard]] double spectral_density(double energy, const LeadSpec& lead);

/// Retarded lead self-energy (Gamma delta / 2) / (E - w + i delta).
/// Its imaginary part is exactly -kappa(E) / 2.
[[nodiscard]] std::complex<double> lead_self_energy(double energy, const LeadSpec& lead);

/// Retarded dot Green's function 1 / (E - eps + F x - chi_L - chi_R).
[[nodiscard]] std::complex<double> retarded_green(double energy, double x, const SystemParams& params);

/// Resonant-level transmission in [0, 1].
[[nodiscard]] double transmission(double energy, double x, const SystemParams& params);

/// Mean dot charge with the electromechanical shift removed (F = 0).
[[nodiscard]] double reference_occupation(const SystemParams& params, const QuadratureSettings& quad = {});

[[nodiscard]] Occupation conditional_occupation(double x, const SystemParams& params,
                                                const QuadratureSettings& quad = {});

/// Same as above with a precomputed reference occupation N0.
[[nodiscard]] Occupation conditional_occupation(double x, const SystemParams& params, double reference,
                                                const QuadratureSettings& quad);

[[nodiscard]] double conditional_current(double x, const SystemParams& params,
                                         const QuadratureSettings& quad = {});

[[nodiscard]] ShotNoiseTerms conditional_shot_noise_terms(double x, const SystemParams& params,
                                                          const QuadratureSettings& quad = {});

[[nodiscard]] double conditional_shot_noise(double x, const SystemParams& params,
                                            const QuadratureSettings& quad = {});

/// Unsymmetrized force-noise spectrum
/// S_x(w) = F^2 \int dE/2pi sigma<(E) sigma>(E + w).
/// With this convention S_x(-w) = exp(-beta w) S_x(w) in equilibrium, so
/// dS/dw > 0 there and the friction is positive.
[[nodiscard]] double charge_noise_spectrum(double x, double omega, const SystemParams& params,
                                           const QuadratureSettings& quad = {});

/// Five-point central estimate of dS_x/dw at w = 0 with the given step.
[[nodiscard]] double noise_spectrum_slope(double x, double step, const SystemParams& params,
                                          const QuadratureSettings& quad = {});

/// D_x = S_x(0) and m gamma_x = dS_x/dw at 0. The stencil starts at
/// h = 0.05 w0 and is halved until successive estimates agree to 1e-3.
[[nodiscard]] FrictionDiffusion friction_and_diffusion(double x, const SystemParams& params,
                                                       const QuadratureSettings& quad = {});

/// All columns at one position; `reference` is N0 from reference_occupation().
[[nodiscard]] TransportPoint transport_point(double x, const SystemParams& params, double reference,
                                             const QuadratureSettings& quad = {});

} // namespace nemclock
