#include "nemclock/outputs.hpp"

#include "nemclock/errors.hpp"
#include "nemclock/hashing.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

namespace nemclock {

using nlohmann::json;

namespace {

void append_double(std::string& s, double v) {
    if (std::isnan(v)) {
        s += "nan";
        return;
    }
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    s.append(buf, r.ptr);
}

json cycle_json(const std::optional<ReducedCycle>& c) {
    if (!c) {
        return nullptr;
    }
    const double ratio = c->phase_diffusion / (4.0 * c->amplitude_damping);
    return {{"amplitude", c->amplitude},
            {"amplitude_damping", c->amplitude_damping},
            {"amplitude_diffusion", c->amplitude_diffusion},
            {"phase_diffusion", c->phase_diffusion},
            {"amplitude_std", std::sqrt(c->amplitude_variance())},
            {"phase_coherence_ratio", ratio}};
}

json grid_json(const GridSpec& g) { return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"nodes", g.nodes}}; }

PlotSeries line(std::string label, std::vector<double> x, std::vector<double> y, bool dashed = false) {
    PlotSeries s;
    s.label = std::move(label);
    s.x = std::move(x);
    s.y = std::move(y);
    s.dashed = dashed;
    return s;
}

PlotSeries points(std::string label, std::vector<double> x, std::vector<double> y) {
    PlotSeries s = line(std::move(label), std::move(x), std::move(y));
    s.markers = true;
    return s;
}

std::vector<double> histogram_density(const Histogram& h) {
    std::vector<double> d(h.bins());
    const double total = h.mass_sum();
    for (std::size_t i = 0; i < h.bins(); ++i) {
        d[i] = total > 0.0 ? h.masses[i] / (total * h.width(i)) : 0.0;
    }
    return d;
}

std::vector<double> histogram_centers(const Histogram& h) {
    std::vector<double> c(h.bins());
    for (std::size_t i = 0; i < h.bins(); ++i) {
        c[i] = h.center(i);
    }
    return c;
}

double inverse_gaussian_pdf(double x, double mean, double shape) {
    if (!(x > 0.0)) {
        return 0.0;
    }
    const double d = x - mean;
    return std::sqrt(shape / (2.0 * std::numbers::pi * x * x * x)) * std::exp(-shape * d * d / (2.0 * mean * mean * x));
}

void write_allan(OutputDirectory& out, const std::string& name, const std::vector<AllanPoint>& pts, double mean,
                 double accuracy) {
    CsvColumn t{"averaging_time", {}}, v{"allan_variance", {}}, r{"renewal_prediction", {}}, n{"differences", {}};
    for (const auto& p : pts) {
        t.values.push_back(p.averaging_time);
        v.values.push_back(p.variance);
        r.values.push_back(renewal_allan_asymptote(mean, accuracy, p.averaging_time));
        n.values.push_back(static_cast<double>(p.differences));
    }
    out.csv(name, {t, v, r, n});
}

} // namespace

std::string format_csv(const std::vector<CsvColumn>& columns) {
    std::string s;
    if (columns.empty()) {
        return s;
    }
    const std::size_t rows = columns.front().values.size();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].values.size() != rows) {
            throw NumericalError("csv column '" + columns[c].name + "' has " +
                                 std::to_string(columns[c].values.size()) + " rows, expected " +
                                 std::to_string(rows));
        }
        s += (c ? "," : "") + columns[c].name;
    }
    s += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) {
                s += ',';
            }
            append_double(s, columns[c].values[r]);
        }
        s += '\n';
    }
    return s;
}

OutputDirectory::OutputDirectory(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
}

void OutputDirectory::text(const std::string& relative, const std::string& content) {
    const auto path = root_ / relative;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) {
        throw ConfigError("cannot write " + path.string());
    }
    digests_[relative] = fingerprint_of(content);
}

void OutputDirectory::csv(const std::string& relative, const std::vector<CsvColumn>& columns) {
    text(relative, format_csv(columns));
}

void OutputDirectory::json(const std::string& relative, const nlohmann::json& value) {
    text(relative, value.dump(2) + "\n");
}

void OutputDirectory::svg(const std::string& relative, const PlotSpec& plot) { text(relative, render_svg(plot)); }

std::string voltage_directory(double voltage) {
    std::string s = "V_";
    append_double(s, voltage);
    return s + "/";
}

void write_coefficients(OutputDirectory& out, const std::string& prefix, const ExperimentConfig& cfg,
                        const CoefficientStage& coeffs) {
    const CoefficientTable& t = coeffs.table;
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        x[i] = t.grid().node(i);
    }
    std::vector<CsvColumn> cols{{"x", x}};
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        cols.push_back({kColumnNames[c], t.column(static_cast<Column>(c))});
    }
    out.csv(prefix + "coefficients.csv", cols);

    json builds = json::array();
    for (const auto& b : coeffs.builds) {
        builds.push_back({{"fingerprint", b.fingerprint}, {"grid", grid_json(b.grid)}});
    }
    out.json(prefix + "coefficients.json", {{"fingerprint", t.fingerprint()},
                                            {"voltage", cfg.system.voltage()},
                                            {"grid", grid_json(t.grid())},
                                            {"reference_occupation", t.reference_occupation()},
                                            {"current_maximum_position", t.current_maximum_position()},
                                            {"friction_at_origin", t.interpolate(Column::friction, 0.0)},
                                            {"diffusion_at_origin", t.interpolate(Column::diffusion, 0.0)},
                                            {"limit_cycle", cycle_json(coeffs.cycle)},
                                            {"tables_built", builds},
                                            {"notes", coeffs.notes}});

    if (!cfg.output.figures) {
        return;
    }
    std::string v = "V = ";
    append_double(v, cfg.system.voltage());
    out.svg(prefix + "figures/coefficients_current.svg",
            {"Mean current vs position (" + v + ")", "x", "<I>_x", false, false,
             {line("<I>_x", x, t.column(Column::current)), line("Delta_x", x, t.column(Column::shot_noise), true)}});
    out.svg(prefix + "figures/coefficients_friction.svg",
            {"Friction vs position", "x", "gamma_x", false, false, {line("gamma_x", x, t.column(Column::friction))}});
    out.svg(prefix + "figures/coefficients_diffusion.svg",
            {"Diffusion vs position", "x", "D_x", false, false, {line("D_x", x, t.column(Column::diffusion))}});
}

void write_simulation(OutputDirectory& out, const std::string& prefix, const ExperimentConfig& cfg,
                      const CoefficientStage& coeffs, const SimulationStage& sim) {
    const CoefficientTable& table = coeffs.table;
    const TrajectoryDigest& first = sim.runs.front();
    std::vector<double> current(first.sample_x.size());
    for (std::size_t i = 0; i < current.size(); ++i) {
        current[i] = table.interpolate(Column::current, first.sample_x[i]);
    }
    out.csv(prefix + "trajectory_sample.csv",
            {{"t", first.sample_t}, {"x", first.sample_x}, {"v", first.sample_v}, {"current", current}});
    out.json(prefix + "trajectory_sample.json", {{"trajectory", 0},
                                                 {"time_step", sim.sim.time_step},
                                                 {"start", first.sample_t.empty() ? 0.0 : first.sample_t.front()},
                                                 {"samples", first.sample_t.size()},
                                                 {"seed", sim.sim.seed},
                                                 {"table_fingerprint", table.fingerprint()},
                                                 {"tick_level", sim.policy.level}});

    if (cfg.output.trajectory_binary) {
        std::string bytes;
        bytes.reserve(first.bulk.size() * sizeof(double));
        for (double v : first.bulk) {
            char b[sizeof(double)];
            std::memcpy(b, &v, sizeof(double));
            bytes.append(b, sizeof(double));
        }
        out.text(prefix + "trajectory.bin", bytes);
        out.json(prefix + "trajectory_bin.json", {{"layout", "interleaved x, v as native float64"},
                                                  {"trajectory", 0},
                                                  {"sample_interval", sim.current_interval},
                                                  {"start", sim.sim.burn_in},
                                                  {"records", first.bulk.size() / 2}});
    }

    const GridDensity density = sim.density();
    std::vector<double> x(table.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = table.grid().node(i);
    }
    const std::vector<double> p = density.density();
    out.csv(prefix + "position_density.csv", {{"x", x}, {"density", p}});

    const Histogram amp = sim.amplitude_histogram();
    const auto centers = histogram_centers(amp);
    const auto amp_density = histogram_density(amp);
    out.csv(prefix + "amplitude_histogram.csv", {{"amplitude", centers}, {"density", amp_density}});

    if (!cfg.output.figures) {
        return;
    }
    out.svg(prefix + "figures/trajectory.svg",
            {"Oscillator position", "t", "x", false, false, {line("x(t)", first.sample_t, first.sample_x)}});
    out.svg(prefix + "figures/current_trace.svg",
            {"Transduced current", "t", "<I>_x(t)", false, false, {line("current", first.sample_t, current)}});
    out.svg(prefix + "figures/position_density.svg",
            {"Stationary position density", "x", "P(x)", false, false, {line("P(x)", x, p)}});
    PlotSpec ap{"Amplitude histogram", "A", "density", false, false, {line("Langevin", centers, amp_density)}};
    if (coeffs.cycle) {
        double top = 0.0;
        for (double d : amp_density) {
            top = std::max(top, d);
        }
        ap.series.push_back(line("limit cycle A0", {coeffs.cycle->amplitude, coeffs.cycle->amplitude}, {0.0, top}, true));
    }
    out.svg(prefix + "figures/amplitude_histogram.svg", ap);
}

void write_ticks(OutputDirectory& out, const std::string& prefix, const ExperimentConfig& cfg,
                 const SimulationStage& sim) {
    CsvColumn traj{"trajectory", {}}, time{"time", {}};
    json runs = json::array();
    for (std::size_t i = 0; i < sim.runs.size(); ++i) {
        const TickSeries& t = sim.runs[i].ticks;
        for (double v : t.tick_times) {
            traj.values.push_back(static_cast<double>(i));
            time.values.push_back(v);
        }
        runs.push_back({{"trajectory", i},
                        {"source", t.source},
                        {"ticks", t.size()},
                        {"observation_start", t.observation_start},
                        {"observation_end", t.observation_end}});
    }
    out.csv(prefix + "ticks.csv", {traj, time});
    out.json(prefix + "ticks.json", {{"level", sim.policy.level},
                                     {"refractory", sim.policy.refractory},
                                     {"crossings", "both directions, linear interpolation within a step"},
                                     {"voltage", cfg.system.voltage()},
                                     {"runs", runs}});
}

void write_analysis(OutputDirectory& out, const std::string& prefix, const ExperimentConfig& cfg,
                    const CoefficientStage& coeffs, const AnalysisStage& a) {
    const ClockReport& r = a.report;
    json report = r.to_json();
    report["voltage"] = cfg.system.voltage();
    report["amplitude_histogram_peak"] = a.amplitude_peak;
    report["limit_cycle"] = cycle_json(coeffs.cycle);
    report["notes"] = a.notes;
    out.json(prefix + "clock_report.json", report);

    std::vector<double> lags(a.correlation.size());
    for (std::size_t k = 0; k < lags.size(); ++k) {
        lags[k] = a.correlation.lag(k);
    }
    out.csv(prefix + "correlation.csv",
            {{"lag", lags}, {"correlation", a.correlation.values}, {"std_error", a.correlation.std_errors}});
    out.csv(prefix + "spectrum.csv", {{"omega", a.spectrum.omega}, {"spectrum", a.spectrum.values}});

    const Histogram& w = a.wtd_histogram;
    const auto centers = histogram_centers(w);
    const auto density = histogram_density(w);
    std::vector<double> fit(centers.size());
    for (std::size_t i = 0; i < fit.size(); ++i) {
        fit[i] = inverse_gaussian_pdf(centers[i], r.wtd.mean, r.wtd.shape);
    }
    out.csv(prefix + "wtd_histogram.csv", {{"tau", centers}, {"density", density}, {"inverse_gaussian", fit}});

    const double mean = r.accuracy.mean;
    const double accuracy = r.accuracy.accuracy;
    write_allan(out, prefix + "allan.csv", r.allan, mean, accuracy);
    write_allan(out, prefix + "allan_shifted.csv", r.allan_shifted, mean, accuracy);

    CsvColumn kn{"n", {}}, kv{"kl", {}}, ke{"bootstrap_error", {}}, ku{"kl_eps_x10", {}}, kd{"kl_eps_div10", {}},
        kb{"bins", {}}, ks{"samples", {}};
    for (const auto& k : a.kl) {
        kn.values.push_back(k.n);
        kv.values.push_back(k.value);
        ke.values.push_back(k.bootstrap_error);
        ku.values.push_back(k.value_eps_up);
        kd.values.push_back(k.value_eps_down);
        kb.values.push_back(static_cast<double>(k.bins));
        ks.values.push_back(static_cast<double>(k.samples));
    }
    out.csv(prefix + "tick_kl.csv", {kn, kv, ke, ku, kd, kb, ks});

    CsvColumn mm{"m", {}}, mv{"mi", {}}, mbias{"bias_bound", {}}, msh{"shuffled_mi", {}}, mp{"pairs", {}},
        mbins{"bins", {}};
    for (const auto& row : a.mi) {
        mm.values.push_back(static_cast<double>(row.lag));
        mv.values.push_back(row.value.value);
        mbias.values.push_back(row.value.bias_bound);
        msh.values.push_back(row.shuffled.value);
        mp.values.push_back(static_cast<double>(row.value.pairs));
        mbins.values.push_back(static_cast<double>(row.value.bins));
    }
    out.csv(prefix + "tick_mi.csv", {mm, mv, mbias, msh, mp, mbins});

    if (!cfg.output.figures) {
        return;
    }
    out.svg(prefix + "figures/correlation.svg",
            {"Current autocorrelation", "tau", "C(tau)", false, false, {line("C(tau)", lags, a.correlation.values)}});
    out.svg(prefix + "figures/spectrum.svg",
            {"Current power spectrum", "omega", "S(omega)", false, true,
             {line("S(omega)", a.spectrum.omega, a.spectrum.values)}});
    out.svg(prefix + "figures/wtd.svg", {"Waiting-time distribution", "tau", "W(tau)", false, false,
                                        {line("histogram", centers, density), line("inverse Gaussian", centers, fit, true)}});

    auto allan_series = [&](const std::vector<AllanPoint>& pts, std::vector<double>& t, std::vector<double>& v,
                            std::vector<double>& renewal) {
        for (const auto& p : pts) {
            t.push_back(p.averaging_time);
            v.push_back(p.variance);
            renewal.push_back(renewal_allan_asymptote(mean, accuracy, p.averaging_time));
        }
    };
    std::vector<double> t1, v1, r1, t2, v2, r2;
    allan_series(r.allan, t1, v1, r1);
    allan_series(r.allan_shifted, t2, v2, r2);
    out.svg(prefix + "figures/allan.svg", {"Allan variance", "T", "sigma_y^2", true, true,
                                          {points("sigma_y^2", t1, v1), points("shifted grid", t2, v2),
                                           line("renewal mu/(N T)", t1, r1, true)}});
    out.svg(prefix + "figures/tick_kl.svg",
            {"Relative entropy of n-tick sums", "n", "D_KL", true, false, {points("D_KL(P_n || W^n)", kn.values, kv.values)}});
    out.svg(prefix + "figures/tick_mi.svg", {"Pairwise mutual information", "m", "I (nats)", true, false,
                                            {points("I(m)", mm.values, mv.values), points("shuffled", mm.values, msh.values),
                                             line("bias bound", mm.values, mbias.values, true)}});
}

void write_toy(OutputDirectory& out, const std::string& prefix, const ExperimentConfig& cfg, const ToyStage& toy) {
    const ToyConfig& tc = cfg.toymodel;
    out.json(prefix + "reduced_cycle.json",
             {{"voltage", cfg.system.voltage()},
              {"cycle", cycle_json(toy.cycle)},
              {"telegraph", {{"rates", tc.telegraph.rates}, {"means", tc.telegraph.means}}},
              {"offset_scale", tc.offset_scale}});
    out.csv(prefix + "toy_overlays.csv", {{"lag", toy.lags},
                                          {"position_analytic", toy.position_analytic},
                                          {"position_simulated", toy.position_simulated},
                                          {"position_std_error", toy.position_error},
                                          {"offset_analytic", toy.offset_analytic},
                                          {"offset_simulated", toy.offset_simulated},
                                          {"offset_std_error", toy.offset_error},
                                          {"telegraph_analytic", toy.telegraph_analytic},
                                          {"telegraph_simulated", toy.telegraph_simulated},
                                          {"telegraph_std_error", toy.telegraph_error}});
    if (!cfg.output.figures) {
        return;
    }
    out.svg(prefix + "figures/toy_position.svg",
            {"Position autocorrelation on the limit cycle", "t", "<x(t)x(0)>", false, false,
             {line("simulated", toy.lags, toy.position_simulated), line("closed form", toy.lags, toy.position_analytic, true)}});
    out.svg(prefix + "figures/toy_offset.svg",
            {"Offset model correlation", "t", "C(t)", false, false,
             {line("simulated", toy.lags, toy.offset_simulated), line("closed form", toy.lags, toy.offset_analytic, true)}});
    out.svg(prefix + "figures/toy_telegraph.svg",
            {"Telegraph correlation", "t", "C(t)", false, false,
             {line("simulated", toy.lags, toy.telegraph_simulated),
              line("closed form", toy.lags, toy.telegraph_analytic, true)}});
}

void write_sweep_summary(OutputDirectory& out, const ExperimentConfig& cfg, const std::vector<SweepRow>& rows) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CsvColumn v{"voltage", {}}, a0{"limit_cycle_amplitude", {}}, peak{"amplitude_histogram_peak", {}},
        ticks{"tick_count", {}}, mean{"mean_wait", {}}, acc{"accuracy", {}}, res{"resolution", {}},
        ent{"entropy_per_tick", {}}, ks{"ks_statistic", {}}, om{"spectral_peak_omega", {}},
        wd{"spectral_peak_width", {}}, pc{"phase_coherence_ratio", {}};
    PlotSpec allan{"Allan variance across voltages", "T", "sigma_y^2", true, true, {}};
    for (const auto& row : rows) {
        const ClockReport& r = row.analysis->report;
        const auto& c = row.coeffs->cycle;
        v.values.push_back(row.voltage);
        a0.values.push_back(c ? c->amplitude : nan);
        peak.values.push_back(row.analysis->amplitude_peak);
        ticks.values.push_back(static_cast<double>(r.tick_count));
        mean.values.push_back(r.accuracy.mean);
        acc.values.push_back(r.accuracy.accuracy);
        res.values.push_back(r.accuracy.resolution);
        ent.values.push_back(r.entropy.per_tick);
        ks.values.push_back(r.wtd.ks_statistic);
        om.values.push_back(r.spectral_peak.omega);
        wd.values.push_back(r.spectral_peak.width);
        pc.values.push_back(c ? c->phase_diffusion / (4.0 * c->amplitude_damping) : nan);
        PlotSeries s;
        s.label = "V = ";
        append_double(s.label, row.voltage);
        for (const auto& p : r.allan) {
            s.x.push_back(p.averaging_time);
            s.y.push_back(p.variance);
        }
        allan.series.push_back(std::move(s));
    }
    out.csv("summary.csv", {v, a0, peak, ticks, mean, acc, res, ent, ks, om, wd, pc});
    if (!cfg.output.figures) {
        return;
    }
    out.svg("figures/accuracy_vs_voltage.svg",
            {"Accuracy vs voltage", "V", "N", false, true, {points("N", v.values, acc.values)}});
    out.svg("figures/entropy_vs_voltage.svg",
            {"Entropy per tick vs voltage", "V", "Delta S per tick", false, true, {points("entropy", v.values, ent.values)}});
    out.svg("figures/allan_vs_voltage.svg", allan);
}

void write_phase_coherence(OutputDirectory& out, const ExperimentConfig& cfg, const std::vector<CycleRow>& rows) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CsvColumn v{"voltage", {}}, a0{"amplitude", {}}, ga{"amplitude_damping", {}}, da{"amplitude_diffusion", {}},
        dp{"phase_diffusion", {}}, ratio{"phase_coherence_ratio", {}};
    for (const auto& row : rows) {
        v.values.push_back(row.voltage);
        a0.values.push_back(row.cycle ? row.cycle->amplitude : nan);
        ga.values.push_back(row.cycle ? row.cycle->amplitude_damping : nan);
        da.values.push_back(row.cycle ? row.cycle->amplitude_diffusion : nan);
        dp.values.push_back(row.cycle ? row.cycle->phase_diffusion : nan);
        ratio.values.push_back(row.cycle ? row.cycle->phase_diffusion / (4.0 * row.cycle->amplitude_damping) : nan);
    }
    out.csv("phase_coherence.csv", {v, a0, ga, da, dp, ratio});
    if (cfg.output.figures) {
        out.svg("figures/phase_coherence.svg", {"Phase coherence on the limit cycle", "V", "D_phi / (4 gamma_A)", false,
                                                true, {points("D_phi / 4 gamma_A", v.values, ratio.values)}});
    }
}

json manifest_json(const ManifestInputs& in, const OutputDirectory& out) {
    json config = in.config->to_json();
    config["output"].erase("directory");
    config.erase("cache_dir");
    const std::string config_text = config.dump();

    json tables = json::array();
    for (const auto* c : in.tables) {
        tables.push_back({{"fingerprint", c->table.fingerprint()}, {"grid", grid_json(c->table.grid())}});
    }
    json sources = json::array();
    for (const auto* s : in.simulations) {
        for (const auto& r : s->runs) {
            sources.push_back(r.ticks.source);
        }
    }
    json outputs = json::object();
    for (const auto& [name, digest] : out.digests()) {
        outputs[name] = digest;
    }
    return {{"schema_version", kConfigSchemaVersion},
            {"command", in.command},
            {"config", config},
            {"config_hash", fingerprint_of(config_text)},
            {"seed", in.config->sim.seed},
            {"rng", "mt19937_64 per trajectory, seed_seq(seed, trajectory index, stream domain)"},
            {"tables", tables},
            {"trajectory_sources", sources},
            {"outputs", outputs}};
}

json execution_json(const ExecutionRecord& rec) {
    json tables = json::array();
    for (const auto* c : rec.tables) {
        for (const auto& b : c->builds) {
            tables.push_back({{"fingerprint", b.fingerprint}, {"grid", grid_json(b.grid)}, {"cache", b.cache_status}});
        }
    }
    json timings = json::object();
    for (const auto& [stage, seconds] : rec.stage_seconds) {
        timings[stage] = timings.contains(stage) ? timings[stage].get<double>() + seconds : seconds;
    }
    return {{"threads", rec.threads}, {"tables", tables}, {"stage_seconds", timings}};
}

} // namespace nemclock
