#include "nemclock/config.hpp"

#include "nemclock/errors.hpp"
#include "nemclock/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nemclock {

using nlohmann::json;

namespace {

std::string path_of(const std::string& where, const char* key) {
    return where.empty() ? std::string(key) : where + "." + key;
}

void read(const json& j, const char* key, const std::string& where, double& out) {
    if (!j.contains(key)) {
        return;
    }
    if (!j.at(key).is_number()) {
        throw ConfigError(path_of(where, key) + " must be a number");
    }
    out = j.at(key).get<double>();
    if (!std::isfinite(out)) {
        throw ConfigError(path_of(where, key) + " must be finite");
    }
}

template <class Int>
void read_integer(const json& j, const char* key, const std::string& where, Int& out) {
    if (!j.contains(key)) {
        return;
    }
    const json& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_unsigned() ? false : v.get<long long>() < 0)) {
        throw ConfigError(path_of(where, key) + " must be a non-negative integer");
    }
    out = v.get<Int>();
}

void read(const json& j, const char* key, const std::string& where, bool& out) {
    if (!j.contains(key)) {
        return;
    }
    if (!j.at(key).is_boolean()) {
        throw ConfigError(path_of(where, key) + " must be true or false");
    }
    out = j.at(key).get<bool>();
}

template <class T>
void read_list(const json& j, const char* key, const std::string& where, std::vector<T>& out) {
    if (!j.contains(key)) {
        return;
    }
    const json& v = j.at(key);
    if (!v.is_array()) {
        throw ConfigError(path_of(where, key) + " must be a list");
    }
    out.clear();
    for (const json& e : v) {
        if constexpr (std::is_floating_point_v<T>) {
            if (!e.is_number()) {
                throw ConfigError(path_of(where, key) + " must contain numbers");
            }
        } else {
            if (!e.is_number_integer() || (!e.is_number_unsigned() && e.get<long long>() < 0)) {
                throw ConfigError(path_of(where, key) + " must contain non-negative integers");
            }
        }
        out.push_back(e.get<T>());
    }
}

void read_pair(const json& j, const char* key, const std::string& where, std::array<double, 2>& out) {
    std::vector<double> v;
    read_list(j, key, where, v);
    if (!j.contains(key)) {
        return;
    }
    if (v.size() != 2) {
        throw ConfigError(path_of(where, key) + " must have exactly two entries");
    }
    out = {v[0], v[1]};
}

const json& section(const json& j, const char* key) {
    static const json empty = json::object();
    if (!j.contains(key) || j.at(key).is_null()) {
        return empty;
    }
    if (!j.at(key).is_object()) {
        throw ConfigError(std::string(key) + " must be an object");
    }
    return j.at(key);
}

void read_lead(const json& j, const std::string& where, LeadSpec& lead) {
    require_known_keys(j, {"band_center", "bandwidth", "peak_rate"}, where.c_str());
    read(j, "band_center", where, lead.band_center);
    read(j, "bandwidth", where, lead.bandwidth);
    read(j, "peak_rate", where, lead.peak_rate);
}

SystemParams read_system(const json& j) {
    require_known_keys(j, {"voltage", "dot_energy", "inverse_temperature", "coupling", "oscillator_mass",
                           "oscillator_frequency", "left", "right"},
                       "system");
    SystemParams p = SystemParams::reference_device(100.0);
    double voltage = 100.0;
    read(j, "voltage", "system", voltage);
    read(j, "dot_energy", "system", p.dot_energy);
    read(j, "inverse_temperature", "system", p.inverse_temperature);
    read(j, "coupling", "system", p.coupling);
    read(j, "oscillator_mass", "system", p.oscillator_mass);
    read(j, "oscillator_frequency", "system", p.oscillator_frequency);
    if (j.contains("left")) {
        read_lead(j.at("left"), "system.left", p.left);
    }
    if (j.contains("right")) {
        read_lead(j.at("right"), "system.right", p.right);
    }
    p = p.with_voltage(voltage);
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("system: ") + e.what());
    }
    return p;
}

json lead_json(const LeadSpec& l) {
    return {{"band_center", l.band_center}, {"bandwidth", l.bandwidth}, {"peak_rate", l.peak_rate}};
}

} // namespace

SimConfig SimSettings::to_sim_config(const SystemParams& params) const {
    const double period = params.period();
    SimConfig s;
    s.time_step = period / steps_per_period;
    const auto burn_steps = static_cast<std::size_t>(std::llround(burn_in_periods * steps_per_period));
    const auto run_steps = static_cast<std::size_t>(std::llround(duration_periods * steps_per_period));
    s.burn_in = static_cast<double>(burn_steps) * s.time_step;
    s.duration = static_cast<double>(burn_steps + run_steps) * s.time_step;
    s.seed = seed;
    s.ensemble_size = ensemble_size;
    s.record_stride = record_stride;
    return s;
}

void ExperimentConfig::validate() const {
    system.validate();
    if (grid.nodes < 16) {
        throw ConfigError("grid.nodes must be >= 16");
    }
    if (grid.provisional_nodes < 16) {
        throw ConfigError("grid.provisional_nodes must be >= 16");
    }
    if (grid.x_max && !(*grid.x_max > 0.0)) {
        throw ConfigError("grid.x_max must be > 0");
    }
    if (!(grid.amplitude_margin >= 1.0)) {
        throw ConfigError("grid.amplitude_margin must be >= 1");
    }
    if (!(grid.spread_sigmas > 0.0)) {
        throw ConfigError("grid.spread_sigmas must be > 0");
    }
    if (sim.steps_per_period < 4) {
        throw ConfigError("sim.steps_per_period must be >= 4");
    }
    if (!(sim.burn_in_periods >= 0.0)) {
        throw ConfigError("sim.burn_in_periods must be >= 0");
    }
    if (!(sim.duration_periods > 0.0)) {
        throw ConfigError("sim.duration_periods must be > 0");
    }
    if (sim.ensemble_size < 1 || sim.record_stride < 1) {
        throw ConfigError("sim.ensemble_size and sim.record_stride must be >= 1");
    }
    if (!(sim.sample_periods >= 0.0)) {
        throw ConfigError("sim.sample_periods must be >= 0");
    }
    if (!(readout.refractory_periods >= 0.0)) {
        throw ConfigError("readout.refractory_periods must be >= 0");
    }
    if (!(analysis.correlation_max_lag_periods > 0.0)) {
        throw ConfigError("analysis.correlation_max_lag_periods must be > 0");
    }
    if (analysis.spectrum_points < 2 || !(analysis.spectrum_omega_max > 0.0)) {
        throw ConfigError("analysis.spectrum_points must be >= 2 and spectrum_omega_max > 0");
    }
    if (!(analysis.peak_window[0] >= 0.0 && analysis.peak_window[1] > analysis.peak_window[0])) {
        throw ConfigError("analysis.peak_window must be [lo, hi] with 0 <= lo < hi");
    }
    if (analysis.allan_per_decade < 1 || !(analysis.allan_min_waits > 0.0) || !(analysis.allan_origin_shift >= 0.0)) {
        throw ConfigError("analysis.allan_* settings out of range");
    }
    for (unsigned n : analysis.kl_n) {
        if (n < 1) {
            throw ConfigError("analysis.kl_n entries must be >= 1");
        }
    }
    for (std::size_t m : analysis.mi_lags) {
        if (m < 1) {
            throw ConfigError("analysis.mi_lags entries must be >= 1");
        }
    }
    if (analysis.amplitude_bins < 2) {
        throw ConfigError("analysis.amplitude_bins must be >= 2");
    }
    for (double v : sweep_voltages) {
        if (!(v >= 0.0)) {
            throw ConfigError("sweep.voltages must be >= 0");
        }
    }
    toymodel.telegraph.validate();
    if (!(toymodel.duration_periods > 0.0) || toymodel.ensemble_size < 1 || toymodel.steps_per_period < 4 ||
        !(toymodel.correlation_max_lag_periods > 0.0) ||
        toymodel.correlation_max_lag_periods >= toymodel.duration_periods) {
        throw ConfigError("toymodel settings out of range");
    }
    if (output.directory.empty()) {
        throw ConfigError("output.directory must not be empty");
    }
}

json ExperimentConfig::to_json() const {
    json analysis_json = {{"correlation_max_lag_periods", analysis.correlation_max_lag_periods},
                          {"spectrum_points", analysis.spectrum_points},
                          {"spectrum_omega_max", analysis.spectrum_omega_max},
                          {"peak_window", analysis.peak_window},
                          {"hann_window", analysis.hann_window},
                          {"allan_per_decade", analysis.allan_per_decade},
                          {"allan_min_waits", analysis.allan_min_waits},
                          {"allan_origin_shift", analysis.allan_origin_shift},
                          {"kl_n", analysis.kl_n},
                          {"kl_bootstrap", analysis.kl_bootstrap},
                          {"mi_lags", analysis.mi_lags},
                          {"amplitude_bins", analysis.amplitude_bins}};
    return {{"schema_version", kConfigSchemaVersion},
            {"system",
             {{"voltage", system.voltage()},
              {"dot_energy", system.dot_energy},
              {"inverse_temperature", system.inverse_temperature},
              {"coupling", system.coupling},
              {"oscillator_mass", system.oscillator_mass},
              {"oscillator_frequency", system.oscillator_frequency},
              {"left", lead_json(system.left)},
              {"right", lead_json(system.right)}}},
            {"quadrature", nemclock::to_json(quadrature)},
            {"grid",
             {{"nodes", grid.nodes},
              {"x_max", grid.x_max ? json(*grid.x_max) : json(nullptr)},
              {"provisional_nodes", grid.provisional_nodes},
              {"amplitude_margin", grid.amplitude_margin},
              {"spread_sigmas", grid.spread_sigmas}}},
            {"sim",
             {{"steps_per_period", sim.steps_per_period},
              {"burn_in_periods", sim.burn_in_periods},
              {"duration_periods", sim.duration_periods},
              {"seed", sim.seed},
              {"ensemble_size", sim.ensemble_size},
              {"record_stride", sim.record_stride},
              {"sample_periods", sim.sample_periods}}},
            {"readout", {{"refractory_periods", readout.refractory_periods}}},
            {"analysis", analysis_json},
            {"sweep", {{"voltages", sweep_voltages}}},
            {"toymodel",
             {{"telegraph_rates", toymodel.telegraph.rates},
              {"telegraph_means", toymodel.telegraph.means},
              {"offset_scale", toymodel.offset_scale},
              {"duration_periods", toymodel.duration_periods},
              {"ensemble_size", toymodel.ensemble_size},
              {"correlation_max_lag_periods", toymodel.correlation_max_lag_periods},
              {"steps_per_period", toymodel.steps_per_period}}},
            {"output",
             {{"directory", output.directory.generic_string()},
              {"figures", output.figures},
              {"trajectory_binary", output.trajectory_binary}}},
            {"cache_dir", effective_cache_dir().generic_string()}};
}

std::filesystem::path ExperimentConfig::effective_cache_dir() const {
    return cache_dir ? *cache_dir : output.directory / "coeff_cache";
}

ExperimentConfig ExperimentConfig::with_voltage(double voltage) const {
    ExperimentConfig c = *this;
    c.system = system.with_voltage(voltage);
    return c;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config: expected a JSON object at the top level");
    }
    require_known_keys(j, {"schema_version", "system", "quadrature", "grid", "sim", "readout", "analysis", "sweep",
                           "toymodel", "output", "cache_dir"},
                       "config");
    if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer()) {
        throw ConfigError("config: integer schema_version is required");
    }
    if (j.at("schema_version").get<int>() != kConfigSchemaVersion) {
        std::ostringstream msg;
        msg << "config: unsupported schema_version " << j.at("schema_version").dump() << " (expected "
            << kConfigSchemaVersion << ")";
        throw ConfigError(msg.str());
    }
    ExperimentConfig c;
    c.system = read_system(section(j, "system"));
    if (j.contains("quadrature")) {
        c.quadrature = quadrature_from_json(section(j, "quadrature"));
    }

    const json& g = section(j, "grid");
    require_known_keys(g, {"nodes", "x_max", "provisional_nodes", "amplitude_margin", "spread_sigmas"}, "grid");
    read_integer(g, "nodes", "grid", c.grid.nodes);
    if (g.contains("x_max") && !g.at("x_max").is_null()) {
        double x = 0.0;
        read(g, "x_max", "grid", x);
        c.grid.x_max = x;
    }
    read_integer(g, "provisional_nodes", "grid", c.grid.provisional_nodes);
    read(g, "amplitude_margin", "grid", c.grid.amplitude_margin);
    read(g, "spread_sigmas", "grid", c.grid.spread_sigmas);

    const json& s = section(j, "sim");
    require_known_keys(s, {"steps_per_period", "burn_in_periods", "duration_periods", "seed", "ensemble_size",
                           "record_stride", "sample_periods"},
                       "sim");
    read_integer(s, "steps_per_period", "sim", c.sim.steps_per_period);
    read(s, "burn_in_periods", "sim", c.sim.burn_in_periods);
    read(s, "duration_periods", "sim", c.sim.duration_periods);
    read_integer(s, "seed", "sim", c.sim.seed);
    read_integer(s, "ensemble_size", "sim", c.sim.ensemble_size);
    read_integer(s, "record_stride", "sim", c.sim.record_stride);
    read(s, "sample_periods", "sim", c.sim.sample_periods);

    const json& r = section(j, "readout");
    require_known_keys(r, {"refractory_periods"}, "readout");
    read(r, "refractory_periods", "readout", c.readout.refractory_periods);

    const json& a = section(j, "analysis");
    require_known_keys(a, {"correlation_max_lag_periods", "spectrum_points", "spectrum_omega_max", "peak_window",
                           "hann_window", "allan_per_decade", "allan_min_waits", "allan_origin_shift", "kl_n",
                           "kl_bootstrap", "mi_lags", "amplitude_bins"},
                       "analysis");
    read(a, "correlation_max_lag_periods", "analysis", c.analysis.correlation_max_lag_periods);
    read_integer(a, "spectrum_points", "analysis", c.analysis.spectrum_points);
    read(a, "spectrum_omega_max", "analysis", c.analysis.spectrum_omega_max);
    read_pair(a, "peak_window", "analysis", c.analysis.peak_window);
    read(a, "hann_window", "analysis", c.analysis.hann_window);
    read_integer(a, "allan_per_decade", "analysis", c.analysis.allan_per_decade);
    read(a, "allan_min_waits", "analysis", c.analysis.allan_min_waits);
    read(a, "allan_origin_shift", "analysis", c.analysis.allan_origin_shift);
    read_list(a, "kl_n", "analysis", c.analysis.kl_n);
    read_integer(a, "kl_bootstrap", "analysis", c.analysis.kl_bootstrap);
    read_list(a, "mi_lags", "analysis", c.analysis.mi_lags);
    read_integer(a, "amplitude_bins", "analysis", c.analysis.amplitude_bins);

    const json& sw = section(j, "sweep");
    require_known_keys(sw, {"voltages"}, "sweep");
    read_list(sw, "voltages", "sweep", c.sweep_voltages);

    const json& t = section(j, "toymodel");
    require_known_keys(t, {"telegraph_rates", "telegraph_means", "offset_scale", "duration_periods", "ensemble_size",
                           "correlation_max_lag_periods", "steps_per_period"},
                       "toymodel");
    read_pair(t, "telegraph_rates", "toymodel", c.toymodel.telegraph.rates);
    read_pair(t, "telegraph_means", "toymodel", c.toymodel.telegraph.means);
    read(t, "offset_scale", "toymodel", c.toymodel.offset_scale);
    read(t, "duration_periods", "toymodel", c.toymodel.duration_periods);
    read_integer(t, "ensemble_size", "toymodel", c.toymodel.ensemble_size);
    read(t, "correlation_max_lag_periods", "toymodel", c.toymodel.correlation_max_lag_periods);
    read_integer(t, "steps_per_period", "toymodel", c.toymodel.steps_per_period);

    const json& o = section(j, "output");
    require_known_keys(o, {"directory", "figures", "trajectory_binary"}, "output");
    if (o.contains("directory")) {
        if (!o.at("directory").is_string()) {
            throw ConfigError("output.directory must be a string");
        }
        c.output.directory = o.at("directory").get<std::string>();
    }
    read(o, "figures", "output", c.output.figures);
    read(o, "trajectory_binary", "output", c.output.trajectory_binary);

    if (j.contains("cache_dir") && !j.at("cache_dir").is_null()) {
        if (!j.at("cache_dir").is_string()) {
            throw ConfigError("cache_dir must be a string");
        }
        c.cache_dir = j.at("cache_dir").get<std::string>();
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
}

} // namespace nemclock
