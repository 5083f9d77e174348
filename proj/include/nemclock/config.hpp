#pragma once

#include "nemclock/langevin.hpp"
#include "nemclock/params.hpp"
#include "nemclock/toymodels.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace nemclock {

inline constexpr int kConfigSchemaVersion = 1;

struct GridConfig {
    std::size_t nodes = 801;
    /// Fixed half-width; unset means sized from the limit-cycle estimate.
    std::optional<double> x_max;
    std::size_t provisional_nodes = 161;
    double amplitude_margin = 1.5; ///< x_max >= margin * A0
    double spread_sigmas = 10.0;   ///< x_max >= A0 + k sigma_A, or k sigma_thermal below threshold
};

/// Times in mechanical periods 2 pi / w0.
struct SimSettings {
    int steps_per_period = 200;
    double burn_in_periods = 5000.0;
    double duration_periods = 10000.0; ///< observed span after the burn-in
    std::uint64_t seed = 1;
    std::size_t ensemble_size = 1;
    std::size_t record_stride = 10; ///< integration steps per stored current sample
    double sample_periods = 20.0;   ///< length of the exported trajectory sample (trajectory 0)

    [[nodiscard]] SimConfig to_sim_config(const SystemParams& params) const;
};

struct ReadoutConfig {
    double refractory_periods = 0.125;
};

struct AnalysisConfig {
    double correlation_max_lag_periods = 100.0;
    std::size_t spectrum_points = 2001;
    double spectrum_omega_max = 4.0; ///< units of w0
    std::array<double, 2> peak_window{1.2, 2.8};
    bool hann_window = true;
    int allan_per_decade = 20;
    double allan_min_waits = 1.0; ///< smallest T in mean waiting times
    double allan_origin_shift = 0.5; ///< shifted grid: origin offset in mean waits
    std::vector<unsigned> kl_n{1, 2, 4, 8, 16};
    unsigned kl_bootstrap = 40;
    std::vector<std::size_t> mi_lags{1, 10, 100};
    std::size_t amplitude_bins = 200;
};

struct ToyConfig {
    TelegraphParams telegraph{{0.01, 0.05}, {0.0, 1.0}};
    double offset_scale = 0.5;
    double duration_periods = 2000.0;
    std::size_t ensemble_size = 8;
    double correlation_max_lag_periods = 50.0;
    int steps_per_period = 40;
};

struct OutputConfig {
    std::filesystem::path directory = "nemclock_out";
    bool figures = true;
    bool trajectory_binary = false;
};

struct ExperimentConfig {
    SystemParams system = SystemParams::reference_device(100.0);
    QuadratureSettings quadrature;
    GridConfig grid;
    SimSettings sim;
    ReadoutConfig readout;
    AnalysisConfig analysis;
    std::vector<double> sweep_voltages;
    ToyConfig toymodel;
    OutputConfig output;
    std::optional<std::filesystem::path> cache_dir; ///< default <output>/coeff_cache

    void validate() const;
    /// Every effective parameter, defaults included.
    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::filesystem::path effective_cache_dir() const;
    [[nodiscard]] ExperimentConfig with_voltage(double voltage) const;
};

/// Strict reader: unknown keys, wrong types and a missing or unsupported
/// schema_version raise ConfigError. Absent keys keep their defaults.
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& j);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace nemclock
