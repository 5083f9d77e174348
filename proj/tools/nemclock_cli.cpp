// nemclock command-line driver.

#include "nemclock/config.hpp"
#include "nemclock/errors.hpp"
#include "nemclock/outputs.hpp"
#include "nemclock/pipeline.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

using namespace nemclock;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    bool quiet = false;
};

struct StageTimer {
    ExecutionRecord& record;
    const char* name;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    ~StageTimer() {
        record.stage_seconds.emplace_back(
            name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
};

class Session {
public:
    Session(std::string command, ExperimentConfig cfg, const Options& opt)
        : command_(std::move(command)), cfg_(std::move(cfg)), opt_(opt), out_(cfg_.output.directory) {
        exec_.threads = opt.threads;
        if (!opt.quiet) {
            log_ = [](const std::string& msg) { std::cerr << msg << '\n'; };
        }
    }

    template <class F>
    decltype(auto) stage(const char* name, F&& body) {
        if (log_) {
            log_(std::string("[") + name + "]");
        }
        StageTimer timer{exec_, name};
        return in_stage(name, std::forward<F>(body));
    }

    const CoefficientStage& coefficients(const ExperimentConfig& cfg) {
        auto& c = tables_.emplace_back(std::make_unique<CoefficientStage>(
            stage("coeffs", [&] { return prepare_coefficients(cfg, opt_.threads, log_); })));
        for (const auto& n : c->notes) {
            say(n);
        }
        return *c;
    }

    const SimulationStage& simulation(const ExperimentConfig& cfg, const CoefficientStage& coeffs) {
        SimulationOptions so;
        so.keep_bulk = cfg.output.trajectory_binary;
        return *sims_.emplace_back(std::make_unique<SimulationStage>(
            stage("simulate", [&] { return simulate(cfg, coeffs, opt_.threads, so, log_); })));
    }

    /// coeffs -> simulate -> ticks -> analyze for one voltage, files under `prefix`.
    const AnalysisStage& pipeline(const ExperimentConfig& cfg, const std::string& prefix, int depth) {
        const CoefficientStage& coeffs = coefficients(cfg);
        stage("write", [&] { write_coefficients(out_, prefix, cfg, coeffs); });
        if (depth < 1) {
            return empty_;
        }
        const SimulationStage& sim = simulation(cfg, coeffs);
        stage("write", [&] { write_simulation(out_, prefix, cfg, coeffs, sim); });
        if (depth < 2) {
            return empty_;
        }
        stage("ticks", [&] { write_ticks(out_, prefix, cfg, sim); });
        if (depth < 3) {
            return empty_;
        }
        const AnalysisStage& a = *analyses_.emplace_back(
            std::make_unique<AnalysisStage>(stage("analyze", [&] { return analyze(cfg, coeffs, sim, log_); })));
        for (const auto& n : a.notes) {
            say(n);
        }
        stage("write", [&] { write_analysis(out_, prefix, cfg, coeffs, a); });
        return a;
    }

    [[nodiscard]] const ExperimentConfig& config() const { return cfg_; }
    [[nodiscard]] OutputDirectory& out() { return out_; }
    [[nodiscard]] const std::vector<std::unique_ptr<CoefficientStage>>& tables() const { return tables_; }
    [[nodiscard]] unsigned threads() const { return opt_.threads; }

    void say(const std::string& msg) const {
        if (log_) {
            log_(msg);
        }
    }

    void finish() {
        ManifestInputs mi{command_, &cfg_, {}, {}};
        for (const auto& t : tables_) {
            mi.tables.push_back(t.get());
            exec_.tables.push_back(t.get());
        }
        for (const auto& s : sims_) {
            mi.simulations.push_back(s.get());
        }
        const nlohmann::json manifest = manifest_json(mi, out_);
        out_.json("manifest.json", manifest);
        out_.json("execution.json", execution_json(exec_));
        say("wrote " + out_.root().string());
    }

private:
    std::string command_;
    ExperimentConfig cfg_;
    Options opt_;
    OutputDirectory out_;
    ExecutionRecord exec_;
    ProgressLog log_;
    std::vector<std::unique_ptr<CoefficientStage>> tables_;
    std::vector<std::unique_ptr<SimulationStage>> sims_;
    std::vector<std::unique_ptr<AnalysisStage>> analyses_;
    AnalysisStage empty_;
};

ExperimentConfig effective_config(const Options& opt) {
    ExperimentConfig cfg = opt.config.empty() ? ExperimentConfig{} : load_config(opt.config);
    if (opt.seed) {
        cfg.sim.seed = *opt.seed;
    }
    if (opt.out) {
        cfg.output.directory = *opt.out;
    }
    cfg.validate();
    return cfg;
}

void run_sweep(Session& s) {
    const ExperimentConfig& cfg = s.config();
    if (cfg.sweep_voltages.empty()) {
        throw ConfigError("[sweep] sweep.voltages is empty");
    }
    std::vector<SweepRow> rows;
    for (double v : cfg.sweep_voltages) {
        const ExperimentConfig cv = cfg.with_voltage(v);
        std::ostringstream label;
        label << "V = " << v;
        s.say(label.str());
        const AnalysisStage& a = s.pipeline(cv, voltage_directory(v), 3);
        rows.push_back({v, s.tables().back().get(), &a});
    }
    s.stage("summary", [&] { write_sweep_summary(s.out(), cfg, rows); });
}

void run_toymodel(Session& s) {
    const ExperimentConfig& cfg = s.config();
    const CoefficientStage& coeffs = s.coefficients(cfg);
    const ToyStage toy = s.stage("toymodel", [&] { return toy_overlays(cfg, coeffs, s.threads()); });
    s.stage("write", [&] { write_toy(s.out(), "", cfg, toy); });

    std::vector<double> voltages = cfg.sweep_voltages;
    if (voltages.empty()) {
        voltages.push_back(cfg.system.voltage());
    }
    std::vector<CycleRow> rows;
    for (double v : voltages) {
        const CoefficientStage& c = v == cfg.system.voltage() ? coeffs : s.coefficients(cfg.with_voltage(v));
        rows.push_back({v, c.cycle});
    }
    s.stage("write", [&] { write_phase_coherence(s.out(), cfg, rows); });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nanoelectromechanical clock: transport coefficients, Langevin simulation and tick statistics"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("-c,--config", opt.config, "JSON config file (defaults apply when omitted)")->check(CLI::ExistingFile);
    app.add_option("--seed", opt.seed, "Override sim.seed");
    app.add_option("--threads", opt.threads, "Worker threads; outputs do not depend on it")->check(CLI::PositiveNumber);
    app.add_option("-o,--out", opt.out, "Override output.directory");
    app.add_flag("-q,--quiet", opt.quiet, "No progress messages");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"coeffs", "Build (or load from cache) the coefficient table"},
        {"simulate", "coeffs, then integrate the Langevin ensemble"},
        {"ticks", "simulate, then export tick times"},
        {"analyze", "Full pipeline without figures"},
        {"run", "Full pipeline: coeffs, simulate, ticks, analyze, figures"},
        {"sweep", "Full pipeline for every sweep voltage plus a summary table"},
        {"toymodel", "Reduced limit-cycle model and toy-process overlays"},
        {"config", "Print the effective config as JSON"}};
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help)->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        ExperimentConfig cfg = in_stage("config", [&] { return effective_config(opt); });
        if (command == "config") {
            std::cout << cfg.to_json().dump(2) << '\n';
            return 0;
        }
        if (command == "analyze") {
            cfg.output.figures = false;
        }
        Session s(command, cfg, opt);
        if (command == "sweep") {
            run_sweep(s);
        } else if (command == "toymodel") {
            run_toymodel(s);
        } else {
            const int depth = command == "coeffs" ? 0 : command == "simulate" ? 1 : command == "ticks" ? 2 : 3;
            s.pipeline(s.config(), "", depth);
        }
        s.finish();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
