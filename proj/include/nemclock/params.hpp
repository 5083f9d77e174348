#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace nemclock {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// One electronic reservoir with a Lorentzian band of states.
struct LeadSpec {
    double band_center = 0.0;
    double bandwidth = 5.0;
    double peak_rate = 10.0;
    double chemical_potential = 0.0;

    void validate(const char* name) const;
};

/// Physical constants of the device in reduced units (hbar = k_B = e = 1).
///
/// The dot level is shifted by the oscillator to `dot_energy - F x`, with the
/// force per charge F = coupling * sqrt(mass * oscillator_frequency).
struct SystemParams {
    LeadSpec left{2.5, 5.0, 10.0, 50.0};
    LeadSpec right{-2.5, 5.0, 10.0, -50.0};
    double dot_energy = 0.0;
    double inverse_temperature = 0.1;
    double coupling = 0.5;
    double oscillator_mass = 1.0;
    double oscillator_frequency = 1.0;

    [[nodiscard]] double voltage() const { return left.chemical_potential - right.chemical_potential; }
    [[nodiscard]] double force_per_charge() const {
        return coupling * std::sqrt(oscillator_mass * oscillator_frequency);
    }
    /// Zero-point length 1/sqrt(2 m w0).
    [[nodiscard]] double zero_point_length() const {
        return 1.0 / std::sqrt(2.0 * oscillator_mass * oscillator_frequency);
    }
    [[nodiscard]] double period() const { return kTwoPi / oscillator_frequency; }

    /// Throws ConfigError on violated invariants.
    void validate() const;

    /// Human-readable notes for violated quasi-adiabatic conditions
    /// (min(1/beta, V) and Gamma must dominate w0 and the coupling).
    [[nodiscard]] std::vector<std::string> adiabatic_warnings() const;

    /// Same device with the bias split symmetrically, mu_L = -mu_R = V/2.
    [[nodiscard]] SystemParams with_voltage(double voltage) const;

    /// lambda = 0.5, Gamma = 10, beta w0 = 0.1, w_L = -w_R = 2.5, delta = 5,
    /// eps = 0, symmetric bias.
    static SystemParams reference_device(double voltage);
};

/// Energy-integral settings shared by all transport quantities.
struct QuadratureSettings {
    double relative_tolerance = 1e-8;
    /// Half-width padding of the integration window in units of max(delta, 1/beta).
    double window_factor = 10.0;
    unsigned max_depth = 20;
};

} // namespace nemclock
