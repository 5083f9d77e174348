#include "nemclock/transport.hpp"

#include "nemclock/errors.hpp"
#include "nemclock/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

namespace nemclock {

namespace {

constexpr double kInvPi = std::numbers::inv_pi;
constexpr double kInvTwoPi = 0.5 * std::numbers::inv_pi;

// 1 / (e^u + 1) for u = beta (E - mu).
inline double fermi_of(double u) {
    if (u > 0.0) {
        const double e = std::exp(-u);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(u));
}

struct LeadState {
    double kappa;
    double fill; // f
    double hole; // 1 - f
};

inline LeadState lead_state(double energy, const LeadSpec& lead, double beta) {
    const double u = beta * (energy - lead.chemical_potential);
    return {spectral_density(energy, lead), fermi_of(u), fermi_of(-u)};
}

inline double green_abs2(double energy, double level, const SystemParams& p) {
    const std::complex<double> denom =
        energy - level - lead_self_energy(energy, p.left) - lead_self_energy(energy, p.right);
    return 1.0 / std::norm(denom);
}

// tau and 1 - tau from the same Green's function. With
// 1/|G|^2 = (E - level - Re chi)^2 + (kL + kR)^2 / 4, the reflection is
// |G|^2 [(E - level - Re chi)^2 + (kL - kR)^2 / 4], free of cancellation
// when tau is close to 1.
struct TauPair {
    double tau;
    double reflection;
};

inline TauPair transmission_pair(double energy, double level, const SystemParams& p) {
    const std::complex<double> chi = lead_self_energy(energy, p.left) + lead_self_energy(energy, p.right);
    const double kl = spectral_density(energy, p.left);
    const double kr = spectral_density(energy, p.right);
    const double detuning = energy - level - chi.real();
    const double g2 = 1.0 / (detuning * detuning + chi.imag() * chi.imag());
    const double half_diff = 0.5 * (kl - kr);
    return {std::min(kl * kr * g2, 1.0), (detuning * detuning + half_diff * half_diff) * g2};
}

// Dot level including the oscillator shift.
inline double shifted_level(double x, const SystemParams& p) {
    return p.dot_energy - p.force_per_charge() * x;
}

struct Window {
    double lo;
    double hi;
    std::vector<double> features;
};

Window energy_window(double level, double shift, const SystemParams& p, const QuadratureSettings& q) {
    const double pad = q.window_factor *
                       std::max({p.left.bandwidth, p.right.bandwidth, 1.0 / p.inverse_temperature});
    std::vector<double> features{p.left.band_center, p.right.band_center, p.left.chemical_potential,
                                 p.right.chemical_potential, level};
    // resolve the Fermi edges when the temperature is small against the band scales
    const double t = 1.0 / p.inverse_temperature;
    for (double mu : {p.left.chemical_potential, p.right.chemical_potential}) {
        for (double k : {2.0, 10.0, 40.0}) {
            features.push_back(mu - k * t);
            features.push_back(mu + k * t);
        }
    }
    if (shift != 0.0) {
        const std::size_t n = features.size();
        for (std::size_t i = 0; i < n; ++i) {
            features.push_back(features[i] - shift);
        }
    }
    const auto [mn, mx] = std::minmax_element(features.begin(), features.end());
    return {*mn - pad, *mx + pad, features};
}

template <class F>
double integrate_energy(F&& f, const Window& w, const QuadratureSettings& q, const char* what) {
    const auto pts = make_breakpoints(w.lo, w.hi, w.features);
    return integrate_panels(std::forward<F>(f), pts, q.relative_tolerance, q.max_depth, what).value;
}

void warn_once(std::atomic<bool>& flag, const std::string& msg) {
    if (!flag.exchange(true)) {
        std::clog << "warning: " << msg << '\n';
    }
}

std::atomic<bool> g_transmission_warned{false};
std::atomic<bool> g_frequency_warned{false};

double occupation_total(double level, const SystemParams& p, const QuadratureSettings& q) {
    const double beta = p.inverse_temperature;
    auto integrand = [&](double e) {
        const LeadState l = lead_state(e, p.left, beta);
        const LeadState r = lead_state(e, p.right, beta);
        return green_abs2(e, level, p) * (l.kappa * l.fill + r.kappa * r.fill);
    };
    // sigma< falls off only as 1/E^4 below the bias window, so the tails are added
    const Window w = energy_window(level, 0.0, p, q);
    const double body = integrate_energy(integrand, w, q, "occupation");
    const double tails = integrate_tails(integrand, w.lo, w.hi, q.relative_tolerance, "occupation").value;
    return kInvTwoPi * (body + tails);
}

} // namespace

double fermi_dirac(double energy, double mu, double beta) {
    return fermi_of(beta * (energy - mu));
}

double spectral_density(double energy, const LeadSpec& lead) {
    const double d = energy - lead.band_center;
    const double w2 = lead.bandwidth * lead.bandwidth;
    return lead.peak_rate * w2 / (d * d + w2);
}

std::complex<double> lead_self_energy(double energy, const LeadSpec& lead) {
    const double d = energy - lead.band_center;
    const double w = lead.bandwidth;
    const double denom = d * d + w * w;
    const double scale = 0.5 * lead.peak_rate * w;
    // scale / (d + i w) split by hand so Im is exactly -kappa/2
    return {scale * d / denom, -0.5 * lead.peak_rate * w * w / denom};
}

std::complex<double> retarded_green(double energy, double x, const SystemParams& p) {
    const std::complex<double> denom =
        energy - shifted_level(x, p) - lead_self_energy(energy, p.left) - lead_self_energy(energy, p.right);
    return 1.0 / denom;
}

double transmission(double energy, double x, const SystemParams& p) {
    const double tau = spectral_density(energy, p.left) * spectral_density(energy, p.right) *
                       green_abs2(energy, shifted_level(x, p), p);
    if (tau > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "transmission " << tau << " > 1 at E=" << energy << ", x=" << x << "; clipped";
        warn_once(g_transmission_warned, msg.str());
    }
    return std::min(tau, 1.0);
}

double reference_occupation(const SystemParams& params, const QuadratureSettings& quad) {
    return occupation_total(params.dot_energy, params, quad);
}

Occupation conditional_occupation(double x, const SystemParams& params, const QuadratureSettings& quad) {
    return conditional_occupation(x, params, reference_occupation(params, quad), quad);
}

Occupation conditional_occupation(double x, const SystemParams& params, double reference,
                                  const QuadratureSettings& quad) {
    const double total = occupation_total(shifted_level(x, params), params, quad);
    return {total, total - reference};
}

double conditional_current(double x, const SystemParams& p, const QuadratureSettings& q) {
    const double beta = p.inverse_temperature;
    const double level = shifted_level(x, p);
    auto integrand = [&](double e) {
        const double window = fermi_dirac(e, p.left.chemical_potential, beta) -
                              fermi_dirac(e, p.right.chemical_potential, beta);
        if (window == 0.0) {
            return 0.0;
        }
        return transmission(e, x, p) * window;
    };
    return kInvPi * integrate_energy(integrand, energy_window(level, 0.0, p, q), q, "current");
}

ShotNoiseTerms conditional_shot_noise_terms(double x, const SystemParams& p, const QuadratureSettings& q) {
    const double beta = p.inverse_temperature;
    const Window w = energy_window(shifted_level(x, p), 0.0, p, q);
    auto thermal = [&](double e) {
        const LeadState l = lead_state(e, p.left, beta);
        const LeadState r = lead_state(e, p.right, beta);
        return transmission(e, x, p) * (l.fill * l.hole + r.fill * r.hole);
    };
    auto partition = [&](double e) {
        const double diff = fermi_dirac(e, p.left.chemical_potential, beta) -
                            fermi_dirac(e, p.right.chemical_potential, beta);
        if (diff == 0.0) {
            return 0.0;
        }
        const TauPair t = transmission_pair(e, shifted_level(x, p), p);
        return t.tau * t.reflection * diff * diff;
    };
    ShotNoiseTerms terms;
    terms.thermal = 2.0 * kInvPi * integrate_energy(thermal, w, q, "shot noise (thermal)");
    terms.partition = 2.0 * kInvPi * integrate_energy(partition, w, q, "shot noise (partition)");
    return terms;
}

double conditional_shot_noise(double x, const SystemParams& params, const QuadratureSettings& quad) {
    return conditional_shot_noise_terms(x, params, quad).total();
}

double charge_noise_spectrum(double x, double omega, const SystemParams& p, const QuadratureSettings& q) {
    const double gamma = std::min(p.left.peak_rate, p.right.peak_rate);
    if (std::abs(omega) > 0.2 * gamma) {
        std::ostringstream msg;
        msg << "noise spectrum evaluated at |w| = " << std::abs(omega)
            << ", outside the quasi-adiabatic regime |w| << Gamma = " << gamma;
        warn_once(g_frequency_warned, msg.str());
    }
    const double beta = p.inverse_temperature;
    const double level = shifted_level(x, p);
    auto integrand = [&](double e) {
        const LeadState l = lead_state(e, p.left, beta);
        const LeadState r = lead_state(e, p.right, beta);
        const double lesser = green_abs2(e, level, p) * (l.kappa * l.fill + r.kappa * r.fill);
        const double e2 = e + omega;
        const LeadState l2 = lead_state(e2, p.left, beta);
        const LeadState r2 = lead_state(e2, p.right, beta);
        const double greater = green_abs2(e2, level, p) * (l2.kappa * l2.hole + r2.kappa * r2.hole);
        return lesser * greater;
    };
    const double f = p.force_per_charge();
    return f * f * kInvTwoPi *
           integrate_energy(integrand, energy_window(level, omega, p, q), q, "charge noise spectrum");
}

double noise_spectrum_slope(double x, double step, const SystemParams& p, const QuadratureSettings& q) {
    const double sp1 = charge_noise_spectrum(x, step, p, q);
    const double sm1 = charge_noise_spectrum(x, -step, p, q);
    const double sp2 = charge_noise_spectrum(x, 2.0 * step, p, q);
    const double sm2 = charge_noise_spectrum(x, -2.0 * step, p, q);
    return (-sp2 + 8.0 * sp1 - 8.0 * sm1 + sm2) / (12.0 * step);
}

FrictionDiffusion friction_and_diffusion(double x, const SystemParams& p, const QuadratureSettings& q) {
    constexpr int kMaxHalvings = 6;
    constexpr double kAgreement = 1e-3;
    const double diffusion = charge_noise_spectrum(x, 0.0, p, q);
    // S varies on the electronic energy scale; this floor only matters near zeros of gamma_x
    const double scale = std::max({p.left.bandwidth, p.right.bandwidth, 1.0 / p.inverse_temperature});
    const double floor = 1e-2 * diffusion / scale;

    double h = 0.05 * p.oscillator_frequency;
    double previous = noise_spectrum_slope(x, h, p, q);
    std::ostringstream stencil;
    stencil << "h=" << h << ": " << previous;
    for (int i = 0; i < kMaxHalvings; ++i) {
        h *= 0.5;
        const double current = noise_spectrum_slope(x, h, p, q);
        stencil << "; h=" << h << ": " << current;
        if (!std::isfinite(current)) {
            break;
        }
        if (std::abs(current - previous) <= kAgreement * std::max(std::abs(current), floor)) {
            return {current / p.oscillator_mass, diffusion, h};
        }
        previous = current;
    }
    std::ostringstream msg;
    msg << "friction derivative at x=" << x << " did not settle (" << stencil.str() << ")";
    throw NumericalError(msg.str());
}

TransportPoint transport_point(double x, const SystemParams& params, double reference,
                               const QuadratureSettings& quad) {
    TransportPoint pt;
    pt.position = x;
    pt.excess_occupation = conditional_occupation(x, params, reference, quad).excess;
    pt.current = conditional_current(x, params, quad);
    pt.shot_noise = conditional_shot_noise(x, params, quad);
    const FrictionDiffusion fd = friction_and_diffusion(x, params, quad);
    pt.friction = fd.friction;
    pt.diffusion = fd.diffusion;
    return pt;
}

} // namespace nemclock
