#pragma once

#include "nemclock/pipeline.hpp"
#include "nemclock/svg.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace nemclock {

struct CsvColumn {
    std::string name;
    std::vector<double> values;
};

/// Comma-separated, header row, shortest round-trip doubles. Columns must
/// have equal length.
[[nodiscard]] std::string format_csv(const std::vector<CsvColumn>& columns);

/// A run directory. Every file goes through here so its FNV-1a digest ends up
/// in the manifest.
class OutputDirectory {
public:
    explicit OutputDirectory(std::filesystem::path root);

    [[nodiscard]] const std::filesystem::path& root() const { return root_; }
    void text(const std::string& relative, const std::string& content);
    void csv(const std::string& relative, const std::vector<CsvColumn>& columns);
    void json(const std::string& relative, const nlohmann::json& value);
    void svg(const std::string& relative, const PlotSpec& plot);
    [[nodiscard]] const std::map<std::string, std::string>& digests() const { return digests_; }

private:
    std::filesystem::path root_;
    std::map<std::string, std::string> digests_;
};

/// Prefix for files of one sweep voltage, e.g. "V_100/".
[[nodiscard]] std::string voltage_directory(double voltage);

void write_coefficients(OutputDirectory& out, const std::string& prefix, const ExperimentConfig& cfg,
                        const CoefficientStage& coeffs);
void write_simulation(OutputDirectory& out, const std::string& prefix, const ExperimentConfig& cfg,
                      const CoefficientStage& coeffs, const SimulationStage& sim);
void write_ticks(OutputDirectory& out, const std::string& prefix, const ExperimentConfig& cfg,
                 const SimulationStage& sim);
void write_analysis(OutputDirectory& out, const std::string& prefix, const ExperimentConfig& cfg,
                    const CoefficientStage& coeffs, const AnalysisStage& analysis);
void write_toy(OutputDirectory& out, const std::string& prefix, const ExperimentConfig& cfg, const ToyStage& toy);

struct SweepRow {
    double voltage = 0.0;
    const CoefficientStage* coeffs = nullptr;
    const AnalysisStage* analysis = nullptr;
};
void write_sweep_summary(OutputDirectory& out, const ExperimentConfig& cfg, const std::vector<SweepRow>& rows);

struct CycleRow {
    double voltage = 0.0;
    std::optional<ReducedCycle> cycle;
};
void write_phase_coherence(OutputDirectory& out, const ExperimentConfig& cfg, const std::vector<CycleRow>& rows);

/// Everything that determines the outputs. Paths are left out so runs into
/// different directories compare equal.
struct ManifestInputs {
    std::string command;
    const ExperimentConfig* config = nullptr;
    std::vector<const CoefficientStage*> tables;
    std::vector<const SimulationStage*> simulations;
};
[[nodiscard]] nlohmann::json manifest_json(const ManifestInputs& inputs, const OutputDirectory& out);

/// Run facts that may differ between identical runs: thread count, cache
/// hits, wall-clock timings.
struct ExecutionRecord {
    unsigned threads = 1;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::vector<const CoefficientStage*> tables;
};
[[nodiscard]] nlohmann::json execution_json(const ExecutionRecord& record);

} // namespace nemclock
