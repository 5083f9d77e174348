#include "nemclock/params.hpp"

#include "nemclock/errors.hpp"

#include <algorithm>
#include <sstream>

namespace nemclock {

void LeadSpec::validate(const char* name) const {
    if (!(bandwidth > 0.0)) {
        throw ConfigError(std::string(name) + " lead: bandwidth must be > 0");
    }
    if (!(peak_rate > 0.0)) {
        throw ConfigError(std::string(name) + " lead: peak_rate must be > 0");
    }
    if (!std::isfinite(band_center) || !std::isfinite(chemical_potential)) {
        throw ConfigError(std::string(name) + " lead: band_center and chemical_potential must be finite");
    }
}

void SystemParams::validate() const {
    left.validate("left");
    right.validate("right");
    if (!(inverse_temperature > 0.0)) {
        throw ConfigError("inverse_temperature must be > 0");
    }
    if (!(oscillator_mass > 0.0)) {
        throw ConfigError("oscillator_mass must be > 0");
    }
    if (!(oscillator_frequency > 0.0)) {
        throw ConfigError("oscillator_frequency must be > 0");
    }
    if (!std::isfinite(coupling) || !std::isfinite(dot_energy)) {
        throw ConfigError("coupling and dot_energy must be finite");
    }
}

std::vector<std::string> SystemParams::adiabatic_warnings() const {
    // "much greater" is read as a factor of 5
    constexpr double kMargin = 5.0;
    std::vector<std::string> notes;
    const double slow = std::max(oscillator_frequency, std::abs(coupling));
    const double thermal = 1.0 / inverse_temperature;
    const double bias = std::abs(voltage());
    const double gamma = std::min(left.peak_rate, right.peak_rate);
    auto check = [&](double fast, const char* label) {
        if (fast < kMargin * slow) {
            std::ostringstream msg;
            msg << "quasi-adiabatic condition weak: " << label << " = " << fast
                << " is not >> max(w0, lambda) = " << slow;
            notes.push_back(msg.str());
        }
    };
    check(std::min(thermal, bias), "min(1/beta, V)");
    check(gamma, "Gamma");
    return notes;
}

SystemParams SystemParams::with_voltage(double voltage) const {
    SystemParams p = *this;
    p.left.chemical_potential = 0.5 * voltage;
    p.right.chemical_potential = -0.5 * voltage;
    return p;
}

SystemParams SystemParams::reference_device(double voltage) {
    SystemParams p;
    p.left = LeadSpec{2.5, 5.0, 10.0, 0.0};
    p.right = LeadSpec{-2.5, 5.0, 10.0, 0.0};
    p.dot_energy = 0.0;
    p.inverse_temperature = 0.1;
    p.coupling = 0.5;
    p.oscillator_mass = 1.0;
    p.oscillator_frequency = 1.0;
    return p.with_voltage(voltage);
}

} // namespace nemclock
