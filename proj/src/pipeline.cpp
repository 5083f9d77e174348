#include "nemclock/pipeline.hpp"

#include "nemclock/errors.hpp"
#include "nemclock/hashing.hpp"
#include "nemclock/langevin.hpp"
#include "nemclock/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nemclock {

namespace {

constexpr std::uint64_t kShuffleSeedSalt = 0x4d49;

void say(const ProgressLog& log, const std::string& msg) {
    if (log) {
        log(msg);
    }
}

GridSpec symmetric_grid(double half_width, std::size_t nodes) {
    GridSpec g;
    g.x_min = -half_width;
    g.x_max = half_width;
    g.nodes = nodes;
    g.validate();
    return g;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

/// Half-width the final grid needs, judged from `table`. nullopt when the
/// limit cycle runs past the table.
std::optional<double> required_extent(const CoefficientTable& table, const ExperimentConfig& cfg,
                                      std::vector<std::string>& notes) {
    const SystemParams& p = cfg.system;
    std::optional<double> a0;
    try {
        a0 = limit_cycle_amplitude(table, p);
    } catch (const NumericalError& e) {
        notes.push_back(e.what());
        return std::nullopt;
    }
    const double mw2 = p.oscillator_mass * p.oscillator_mass * p.oscillator_frequency * p.oscillator_frequency;
    if (a0) {
        const ReducedCycle c = reduced_coefficients(table, p, *a0);
        const double sigma = c.amplitude_damping > 0.0 ? std::sqrt(c.amplitude_variance()) : 0.0;
        return std::max(cfg.grid.amplitude_margin * *a0, *a0 + cfg.grid.spread_sigmas * sigma);
    }
    const double g0 = table.interpolate(Column::friction, 0.0);
    const double d0 = table.interpolate(Column::diffusion, 0.0);
    const double thermal = g0 > 0.0 ? std::sqrt(d0 / (2.0 * mw2 * g0)) : 0.0;
    const double gibbs = std::sqrt(1.0 / (p.inverse_temperature * p.oscillator_mass * p.oscillator_frequency *
                                          p.oscillator_frequency));
    return cfg.grid.spread_sigmas * std::max(thermal, gibbs);
}

std::string tick_source(const std::string& table_fp, std::uint64_t seed, std::size_t index) {
    std::ostringstream s;
    s << table_fp << ':' << seed << ':' << index;
    return fingerprint_of(s.str());
}

} // namespace

double provisional_extent(const SystemParams& p) {
    const double reach = std::max({std::abs(p.left.chemical_potential), std::abs(p.right.chemical_potential),
                                   std::abs(p.left.band_center), std::abs(p.right.band_center)});
    const double width =
        std::max({p.left.bandwidth, p.right.bandwidth, 1.0 / p.inverse_temperature});
    return (std::abs(p.dot_energy) + reach + 4.0 * width) / p.force_per_charge();
}

CoefficientTable cached_table(const SystemParams& params, const QuadratureSettings& quad, const GridSpec& grid,
                              const std::filesystem::path& cache_dir, bool use_cache, unsigned threads,
                              TableBuild& record) {
    record.grid = grid;
    record.fingerprint = table_fingerprint(params, quad, grid);
    const auto path = cache_dir / ("table-" + record.fingerprint + ".json");
    if (use_cache) {
        CacheLookup hit = lookup_cached_table(path, record.fingerprint);
        record.cache_status = hit.status;
        if (hit.table) {
            return std::move(*hit.table);
        }
    } else {
        record.cache_status = "disabled";
    }
    CoefficientTable table = build_coefficient_table(params, grid, quad, threads);
    if (use_cache) {
        std::filesystem::create_directories(cache_dir);
        save_table(path, table, params, quad);
    }
    return table;
}

CoefficientStage prepare_coefficients(const ExperimentConfig& cfg, unsigned threads, const ProgressLog& log) {
    const SystemParams& p = cfg.system;
    const auto cache_dir = cfg.effective_cache_dir();
    std::vector<TableBuild> builds;
    std::vector<std::string> notes;
    auto build = [&](const GridSpec& g) {
        TableBuild rec;
        CoefficientTable t = cached_table(p, cfg.quadrature, g, cache_dir, true, threads, rec);
        say(log, "table |x| <= " + fmt(g.x_max) + " (" + std::to_string(g.nodes) + " nodes): cache " +
                     rec.cache_status);
        builds.push_back(rec);
        return t;
    };

    std::optional<CoefficientTable> table;
    if (cfg.grid.x_max) {
        table = build(symmetric_grid(*cfg.grid.x_max, cfg.grid.nodes));
    } else {
        const double cap = provisional_extent(p);
        const CoefficientTable coarse = build(symmetric_grid(cap, cfg.grid.provisional_nodes));
        double extent = required_extent(coarse, cfg, notes).value_or(cap);
        if (extent > cap) {
            notes.push_back("grid extent " + fmt(extent) + " capped at the provisional half-width " + fmt(cap));
            extent = cap;
        }
        table = build(symmetric_grid(extent, cfg.grid.nodes));
        std::optional<double> need = required_extent(*table, cfg, notes);
        if (!need) {
            need = std::min(cap, 1.5 * extent);
        }
        if (*need > 1.02 * extent && extent < cap) {
            const double wider = std::min(*need, cap);
            notes.push_back("grid widened from " + fmt(extent) + " to " + fmt(wider));
            table = build(symmetric_grid(wider, cfg.grid.nodes));
        }
    }

    CoefficientStage out{std::move(*table), std::nullopt, std::nullopt, std::move(builds), std::move(notes)};
    out.amplitude = limit_cycle_amplitude(out.table, p);
    if (out.amplitude) {
        out.cycle = reduced_coefficients(out.table, p, *out.amplitude);
        say(log, "limit cycle A0 = " + fmt(*out.amplitude) + ", D_phi/4gamma_A = " +
                     fmt(out.cycle->phase_diffusion / (4.0 * out.cycle->amplitude_damping)));
    } else {
        say(log, "no limit cycle (below threshold)");
    }
    return out;
}

std::vector<TickSeries> SimulationStage::tick_series() const {
    std::vector<TickSeries> out;
    out.reserve(runs.size());
    for (const auto& r : runs) {
        out.push_back(r.ticks);
    }
    return out;
}

GridDensity SimulationStage::density() const {
    GridDensity total = *runs.front().density;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        total.merge(*runs[i].density);
    }
    return total;
}

Histogram SimulationStage::amplitude_histogram() const {
    HistogramAccumulator total = *runs.front().amplitude;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        total.merge(*runs[i].amplitude);
    }
    return total.histogram();
}

double SimulationStage::position_variance() const {
    double n = 0.0;
    double s = 0.0;
    double s2 = 0.0;
    for (const auto& r : runs) {
        n += static_cast<double>(r.steps);
        s += r.sum_x;
        s2 += r.sum_x2;
    }
    const double m = s / n;
    return s2 / n - m * m;
}

SimulationStage simulate(const ExperimentConfig& cfg, const CoefficientStage& coeffs, unsigned threads,
                         const SimulationOptions& options, const ProgressLog& log) {
    const SystemParams& params = cfg.system;
    const CoefficientTable& table = coeffs.table;
    SimulationStage out;
    out.sim = cfg.sim.to_sim_config(params);
    out.sim.validate();
    out.policy = TickPolicy::from_table(table, params);
    out.policy.refractory = cfg.readout.refractory_periods * params.period();
    out.current_interval = out.sim.time_step * static_cast<double>(out.sim.record_stride);
    out.amplitude_max = std::max(-table.grid().x_min, table.grid().x_max);
    out.runs.resize(out.sim.ensemble_size);

    const std::size_t burn = out.sim.burn_in_steps();
    const std::size_t first = burn;
    const std::size_t stride = out.sim.record_stride;
    const auto sample_steps = static_cast<std::size_t>(std::llround(cfg.sim.sample_periods * cfg.sim.steps_per_period));
    const double inv_w = 1.0 / params.oscillator_frequency;
    say(log, "integrating " + std::to_string(out.sim.ensemble_size) + " trajectories x " +
                 std::to_string(out.sim.total_steps()) + " steps");

    parallel_for(out.sim.ensemble_size, threads, [&](std::size_t i) {
        TrajectoryDigest d;
        d.density.emplace(table.grid());
        d.amplitude.emplace(0.0, out.amplitude_max, cfg.analysis.amplitude_bins);
        TickDetector detector(out.policy);
        const std::size_t expected = (out.sim.total_steps() - first) / stride + 1;
        if (options.keep_current) {
            d.current.reserve(expected);
        }
        if (options.keep_bulk) {
            d.bulk.reserve(2 * expected);
        }
        integrate_with(table, params, out.sim, i, [&](std::size_t step, double t, double x, double v) {
            const std::size_t r = step - first;
            detector.feed(t, x);
            d.density->add(x);
            const double vw = v * inv_w;
            d.amplitude->add(std::sqrt(x * x + vw * vw));
            d.sum_x += x;
            d.sum_x2 += x * x;
            ++d.steps;
            if (r % stride == 0) {
                if (options.keep_current) {
                    d.current.push_back(table.interpolate(Column::current, x));
                }
                if (options.keep_bulk) {
                    d.bulk.push_back(x);
                    d.bulk.push_back(v);
                }
            }
            if (i == 0 && r <= sample_steps) {
                d.sample_t.push_back(t);
                d.sample_x.push_back(x);
                d.sample_v.push_back(v);
            }
        });
        d.ticks = detector.finish(tick_source(table.fingerprint(), out.sim.seed, i));
        out.runs[i] = std::move(d);
    });
    return out;
}

double amplitude_peak(const Histogram& h) {
    const std::size_t n = h.bins();
    if (n == 0) {
        throw NumericalError("amplitude histogram is empty");
    }
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i < 2 ? 0 : i - 2;
        const std::size_t hi = std::min(n - 1, i + 2);
        double s = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) {
            s += h.masses[k];
        }
        s /= static_cast<double>(hi - lo + 1);
        if (s > best) {
            best = s;
            arg = i;
        }
    }
    return h.center(arg);
}

AnalysisStage analyze(const ExperimentConfig& cfg, const CoefficientStage& coeffs, const SimulationStage& sim,
                      const ProgressLog& log) {
    const SystemParams& params = cfg.system;
    const CoefficientTable& table = coeffs.table;
    const AnalysisConfig& ac = cfg.analysis;
    AnalysisStage out;

    const std::vector<TickSeries> ticks = sim.tick_series();
    for (const auto& t : ticks) {
        out.report.tick_count += t.size();
    }
    out.waits = waiting_times(ticks);
    say(log, std::to_string(out.report.tick_count) + " ticks, " + std::to_string(out.waits.size()) + " waits");
    out.report.wtd = fit_inverse_gaussian(out.waits);
    out.report.accuracy = accuracy_resolution(out.waits);

    const GridDensity density = sim.density();
    const std::vector<double> p = density.density();
    out.report.entropy = entropy_per_tick(params, table.grid(), p, table, out.report.accuracy.resolution);
    out.report.shot_noise_floor = expected_shot_noise(density, table);
    {
        const auto current = table.column(Column::current);
        std::vector<double> weighted(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            weighted[i] = p[i] * current[i];
        }
        out.report.mean_current = trapezoid(table.grid(), weighted);
    }

    {
        const auto [mn, mx] = std::minmax_element(out.waits.begin(), out.waits.end());
        const double width = freedman_diaconis_width(out.waits);
        const auto bins = static_cast<std::size_t>(
            std::clamp(std::ceil((*mx - *mn) / width), 1.0, 4000.0));
        const double pad = 1e-9 * (*mx - *mn + 1.0);
        out.wtd_histogram = histogram_of(out.waits, *mn, *mx + pad, bins);
    }

    // current correlation and spectrum
    std::vector<std::vector<double>> series;
    series.reserve(sim.runs.size());
    std::size_t shortest = std::numeric_limits<std::size_t>::max();
    for (const auto& r : sim.runs) {
        series.push_back(r.current);
        shortest = std::min(shortest, r.current.size());
    }
    auto max_lag = static_cast<std::size_t>(
        std::llround(ac.correlation_max_lag_periods * params.period() / sim.current_interval));
    if (max_lag + 1 >= shortest) {
        max_lag = shortest / 2;
        out.notes.push_back("correlation lag range reduced to half the series length (" +
                            fmt(static_cast<double>(max_lag) * sim.current_interval / params.period()) +
                            " periods)");
    }
    out.correlation = autocorrelation(series, sim.current_interval, max_lag);
    SpectrumOptions so;
    so.omega_max = ac.spectrum_omega_max * params.oscillator_frequency;
    so.points = ac.spectrum_points;
    so.hann_window = ac.hann_window;
    out.spectrum = power_spectrum(out.correlation, out.report.shot_noise_floor, so);
    try {
        out.report.spectral_peak = find_spectral_peak(out.spectrum, ac.peak_window[0] * params.oscillator_frequency,
                                                      ac.peak_window[1] * params.oscillator_frequency);
    } catch (const NumericalError& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out.report.spectral_peak = {nan, nan, nan};
        out.notes.push_back(std::string("spectral peak: ") + e.what());
    }

    // Allan variance on a log grid and on a half-step shifted grid
    const double mu = out.report.accuracy.mean;
    double span = std::numeric_limits<double>::infinity();
    for (const auto& t : ticks) {
        span = std::min(span, t.observation_end - t.observation_start);
    }
    const double t_min = ac.allan_min_waits * mu;
    const double t_max = span / 3.0;
    if (t_max > t_min) {
        const std::vector<double> grid = log_grid(t_min, t_max, ac.allan_per_decade);
        out.report.allan = allan_variance(ticks, mu, grid);
        std::vector<double> shifted;
        const double factor = std::pow(10.0, 0.5 / ac.allan_per_decade);
        for (double t : grid) {
            if (t * factor <= t_max) {
                shifted.push_back(t * factor);
            }
        }
        if (!shifted.empty()) {
            out.report.allan_shifted = allan_variance(ticks, mu, shifted, ac.allan_origin_shift * mu);
        }
    } else {
        out.notes.push_back("Allan variance skipped: run shorter than 3 mean waits");
    }

    // tick correlations
    std::vector<unsigned> ns;
    for (unsigned n : ac.kl_n) {
        if (out.waits.size() >= static_cast<std::size_t>(n) + 100) {
            ns.push_back(n);
        } else {
            out.notes.push_back("KL n=" + std::to_string(n) + " skipped: too few waits");
        }
    }
    KlOptions ko;
    ko.bootstrap_replicates = ac.kl_bootstrap;
    ko.seed = cfg.sim.seed;
    out.kl = kl_profile(out.waits, ns, ko);
    for (std::size_t m : ac.mi_lags) {
        if (out.waits.size() < m + 1000) {
            out.notes.push_back("MI lag " + std::to_string(m) + " skipped: fewer than 1000 pairs");
            continue;
        }
        MiRow row;
        row.lag = m;
        row.value = pairwise_mutual_information(out.waits, m);
        row.shuffled = shuffled_mutual_information(out.waits, m, cfg.sim.seed ^ kShuffleSeedSalt);
        out.mi.push_back(row);
    }

    out.amplitude_peak = amplitude_peak(sim.amplitude_histogram());
    return out;
}

ToyStage toy_overlays(const ExperimentConfig& cfg, const CoefficientStage& coeffs, unsigned threads) {
    if (!coeffs.cycle) {
        throw NumericalError("toy overlays need a limit cycle; the device is below threshold");
    }
    const ToyConfig& tc = cfg.toymodel;
    const double w0 = cfg.system.oscillator_frequency;
    const double period = cfg.system.period();
    const double dt = period / tc.steps_per_period;
    const double duration = tc.duration_periods * period;
    const auto max_lag = static_cast<std::size_t>(std::llround(tc.correlation_max_lag_periods * tc.steps_per_period));

    ToyStage out;
    out.cycle = *coeffs.cycle;
    OffsetModelParams position{0.0, 0.0, out.cycle};
    OffsetModelParams offset{tc.offset_scale, 1.0, out.cycle};

    auto ensemble = [&](const ToySpec& spec, std::size_t base) {
        std::vector<std::vector<double>> runs(tc.ensemble_size);
        parallel_for(tc.ensemble_size, threads, [&](std::size_t i) {
            runs[i] = simulate_toy(spec, duration, dt, cfg.sim.seed, base + i).values;
        });
        return autocorrelation(runs, dt, max_lag);
    };
    const CorrelationCurve cp = ensemble(OffsetModelSpec{position, w0}, 0);
    const CorrelationCurve co = ensemble(OffsetModelSpec{offset, w0}, 1u << 20);
    const CorrelationCurve ct = ensemble(TelegraphSpec{tc.telegraph}, 2u << 20);

    const std::size_t step = std::max<std::size_t>(1, max_lag / 400);
    for (std::size_t k = 0; k <= max_lag; k += step) {
        const double t = cp.lag(k);
        out.lags.push_back(t);
        out.position_analytic.push_back(analytic_position_autocorrelation(out.cycle, w0, t));
        out.position_simulated.push_back(cp.values[k]);
        out.position_error.push_back(cp.std_errors[k]);
        out.offset_analytic.push_back(offset_model_correlation(offset, w0, t));
        out.offset_simulated.push_back(co.values[k]);
        out.offset_error.push_back(co.std_errors[k]);
        out.telegraph_analytic.push_back(telegraph_correlation(tc.telegraph, t));
        out.telegraph_simulated.push_back(ct.values[k]);
        out.telegraph_error.push_back(ct.std_errors[k]);
    }
    return out;
}

} // namespace nemclock
