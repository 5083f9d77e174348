#include "nemclock/serialization.hpp"

#include "nemclock/errors.hpp"

#include <algorithm>
#include <string>

namespace nemclock {

using nlohmann::json;

namespace {

double number(const json& j, const char* key, const char* where) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError(std::string(where) + ": missing key '" + key + "'");
    }
    if (!it->is_number()) {
        throw ConfigError(std::string(where) + ": '" + key + "' must be a number");
    }
    return it->get<double>();
}

LeadSpec lead_from_json(const json& j, const char* where) {
    require_known_keys(j, {"band_center", "bandwidth", "peak_rate", "chemical_potential"}, where);
    return {number(j, "band_center", where), number(j, "bandwidth", where), number(j, "peak_rate", where),
            number(j, "chemical_potential", where)};
}

} // namespace

void require_known_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) {
        throw ConfigError(std::string(where) + ": expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!known) {
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
        }
    }
}

json to_json(const LeadSpec& lead) {
    return {{"band_center", lead.band_center},
            {"bandwidth", lead.bandwidth},
            {"peak_rate", lead.peak_rate},
            {"chemical_potential", lead.chemical_potential}};
}

json to_json(const SystemParams& p) {
    return {{"left", to_json(p.left)},
            {"right", to_json(p.right)},
            {"dot_energy", p.dot_energy},
            {"inverse_temperature", p.inverse_temperature},
            {"coupling", p.coupling},
            {"oscillator_mass", p.oscillator_mass},
            {"oscillator_frequency", p.oscillator_frequency}};
}

json to_json(const QuadratureSettings& q) {
    return {{"relative_tolerance", q.relative_tolerance},
            {"window_factor", q.window_factor},
            {"max_depth", q.max_depth}};
}

SystemParams system_params_from_json(const json& j) {
    require_known_keys(j, {"left", "right", "dot_energy", "inverse_temperature", "coupling", "oscillator_mass",
                           "oscillator_frequency"},
                       "system");
    SystemParams p;
    if (!j.contains("left") || !j.contains("right")) {
        throw ConfigError("system: both 'left' and 'right' leads are required");
    }
    p.left = lead_from_json(j.at("left"), "system.left");
    p.right = lead_from_json(j.at("right"), "system.right");
    p.dot_energy = number(j, "dot_energy", "system");
    p.inverse_temperature = number(j, "inverse_temperature", "system");
    p.coupling = number(j, "coupling", "system");
    p.oscillator_mass = number(j, "oscillator_mass", "system");
    p.oscillator_frequency = number(j, "oscillator_frequency", "system");
    p.validate();
    return p;
}

QuadratureSettings quadrature_from_json(const json& j) {
    require_known_keys(j, {"relative_tolerance", "window_factor", "max_depth"}, "quadrature");
    QuadratureSettings q;
    if (j.contains("relative_tolerance")) {
        q.relative_tolerance = number(j, "relative_tolerance", "quadrature");
    }
    if (j.contains("window_factor")) {
        q.window_factor = number(j, "window_factor", "quadrature");
    }
    if (j.contains("max_depth")) {
        q.max_depth = static_cast<unsigned>(number(j, "max_depth", "quadrature"));
    }
    if (!(q.relative_tolerance > 0.0 && q.relative_tolerance < 1.0)) {
        throw ConfigError("quadrature.relative_tolerance must lie in (0, 1)");
    }
    if (!(q.window_factor > 0.0)) {
        throw ConfigError("quadrature.window_factor must be > 0");
    }
    return q;
}

} // namespace nemclock
