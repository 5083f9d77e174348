#include "doctest.h"

#include "nemclock/clockstats.hpp"
#include "nemclock/errors.hpp"
#include "nemclock/toymodels.hpp"
#include "support/oracles.hpp"
#include "support/tables.hpp"

#include <cmath>

using namespace nemclock;

namespace {

GridSpec wide_grid() {
    GridSpec g;
    g.x_min = -30.0;
    g.x_max = 30.0;
    g.nodes = 801;
    return g;
}

// gamma(x) = -g0 + k x^2 with constant D: a van der Pol-like limit cycle
CoefficientTable vdp_table(double g0, double k, double d) {
    return support::make_table(
        wide_grid(), [](double) { return 0.0; }, [](double) { return 1.0; },
        [=](double x) { return -g0 + k * x * x; }, [=](double) { return d; });
}

ReducedCycle sample_cycle() {
    ReducedCycle c;
    c.amplitude = 3.0;
    c.amplitude_damping = 0.2;
    c.amplitude_diffusion = 0.4;
    c.phase_diffusion = 0.02;
    return c;
}

} // namespace

TEST_CASE("no limit cycle without negative damping") {
    const auto table = support::constant_table(wide_grid(), 0.01, 0.02);
    CHECK_FALSE(limit_cycle_amplitude(table, SystemParams{}).has_value());
}

TEST_CASE("van der Pol table: amplitude and reduced coefficients") {
    const double g0 = 0.05;
    const double k = 0.002;
    const double d = 0.01;
    const auto table = vdp_table(g0, k, d);
    // <gamma sin^2> = -g0/2 + k A^2/8 and <D cos^2> = D/2, so
    // k A^4 / 4 - g0 A^2 - D/2 = 0
    const double a2 = 2.0 * (g0 + std::sqrt(g0 * g0 + k * d / 2.0)) / k;
    const double a0 = std::sqrt(a2);
    const auto found = limit_cycle_amplitude(table, SystemParams{});
    REQUIRE(found.has_value());
    CHECK(*found == doctest::Approx(a0).epsilon(1e-9));

    const ReducedCycle r = reduced_coefficients(table, SystemParams{}, a0);
    // h(A) = g0 A/2 - k A^3/8 + D/(4A)
    const double dh = g0 / 2.0 - 3.0 * k * a2 / 8.0 - d / (4.0 * a2);
    CHECK(r.amplitude_damping == doctest::Approx(-dh).epsilon(1e-6));
    CHECK(r.amplitude_damping > 0.0);
    CHECK(r.amplitude_diffusion == doctest::Approx(d / 2.0).epsilon(1e-12));
    CHECK(r.phase_diffusion == doctest::Approx(d / (2.0 * a2)).epsilon(1e-12));
    CHECK(amplitude_drift(table, SystemParams{}, a0) == doctest::Approx(0.0).scale(1e-3));
}

TEST_CASE("limit cycle beyond the table is reported") {
    GridSpec g = wide_grid();
    g.x_min = -4.0;
    g.x_max = 4.0;
    const auto table = support::make_table(
        g, [](double) { return 0.0; }, [](double) { return 1.0; }, [](double) { return -0.1; },
        [](double) { return 0.01; });
    CHECK_THROWS_AS(limit_cycle_amplitude(table, SystemParams{}), NumericalError);
}

TEST_CASE("constant coefficients give the hand-evaluated cycle averages") {
    const auto table = support::constant_table(wide_grid(), 0.03, 0.5);
    const ReducedCycle r = reduced_coefficients(table, SystemParams{}, 4.0);
    CHECK(r.phase_diffusion == doctest::Approx(0.5 / (2.0 * 16.0)).epsilon(1e-12));
    CHECK(r.amplitude_diffusion == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("four-fold diffusion scales D_A and D_phi by four") {
    auto bump = [](double scale) {
        return support::make_table(
            wide_grid(), [](double) { return 0.0; }, [](double) { return 1.0; },
            [](double x) { return -0.02 + 0.001 * x * x; },
            [=](double x) { return scale * (0.01 + 0.02 * std::exp(-x * x / 8.0)); });
    };
    const ReducedCycle a = reduced_coefficients(bump(1.0), SystemParams{}, 6.0);
    const ReducedCycle b = reduced_coefficients(bump(4.0), SystemParams{}, 6.0);
    CHECK(b.amplitude_diffusion == doctest::Approx(4.0 * a.amplitude_diffusion).epsilon(1e-12));
    CHECK(b.phase_diffusion == doctest::Approx(4.0 * a.phase_diffusion).epsilon(1e-12));
}

TEST_CASE("cycle averages are converged at 256 points") {
    const auto table = support::make_table(
        wide_grid(), [](double) { return 0.0; }, [](double) { return 1.0; },
        [](double x) { return -0.02 + 0.001 * x * x + 0.03 * std::exp(-x * x / 8.0); },
        [](double x) { return 0.01 + 0.02 * std::exp(-x * x / 8.0); });
    for (double a : {0.5, 3.0, 11.0}) {
        const CycleAverages c1 = cycle_averages(table, a, 256);
        const CycleAverages c2 = cycle_averages(table, a, 512);
        CHECK(std::abs(c1.friction_sin2 - c2.friction_sin2) <= 1e-8 * std::abs(c2.friction_sin2));
        CHECK(std::abs(c1.diffusion_cos2 - c2.diffusion_cos2) <= 1e-8 * c2.diffusion_cos2);
        CHECK(std::abs(c1.diffusion_sin2 - c2.diffusion_sin2) <= 1e-8 * c2.diffusion_sin2);
    }
}

TEST_CASE("position autocorrelation closed form") {
    const ReducedCycle c = sample_cycle();
    CHECK(analytic_position_autocorrelation(c, 1.0, 0.0) == doctest::Approx((9.0 + 1.0) / 2.0));
    CHECK(std::abs(analytic_position_autocorrelation(c, 1.0, 5000.0)) < 1e-12);
    for (double t = 0.0; t < 100.0; t += 0.37) {
        CHECK(std::abs(analytic_position_autocorrelation(c, 1.0, t)) <= analytic_position_autocorrelation(c, 1.0, 0.0));
    }
}

TEST_CASE("telegraph statics") {
    TelegraphParams p;
    p.rates = {0.3, 0.3};
    CHECK(telegraph_statics(p).stationary[0] == doctest::Approx(0.5));

    p.rates = {0.3, 0.9};
    const TelegraphStatics s = telegraph_statics(p);
    CHECK(s.stationary[0] == doctest::Approx(0.75));
    CHECK(s.stationary[1] == doctest::Approx(0.25));
    for (double t : {0.0, 0.1, 1.0, 7.0, 1e3}) {
        for (int i = 0; i < 2; ++i) {
            CHECK(s.transition(i, 0, t) + s.transition(i, 1, t) == doctest::Approx(1.0).epsilon(1e-15));
        }
    }
    CHECK(s.transition(0, 0, 0.0) == 1.0);
    CHECK(s.transition(0, 1, 0.0) == 0.0);
    CHECK(s.transition(1, 0, 1e3) == doctest::Approx(0.75));
    CHECK(s.transition(0, 0, 1e3) == doctest::Approx(0.75));
    // rate out of state 1 is lambda_1
    CHECK(s.transition(0, 1, 1e-6) == doctest::Approx(0.3e-6).epsilon(1e-5));
}

TEST_CASE("telegraph correlation") {
    TelegraphParams p;
    p.rates = {0.3, 0.9};
    p.means = {1.0, 3.0};
    CHECK(telegraph_correlation(p, 0.0) == doctest::Approx(0.75 * 0.25 * 4.0));
    CHECK(telegraph_correlation(p, 1.3) == telegraph_correlation(p, -1.3));
    CHECK(telegraph_correlation(p, 100.0) < 1e-40);
    p.means = {2.0, 2.0};
    CHECK(telegraph_correlation(p, 0.5) == 0.0);
}

TEST_CASE("offset model correlation") {
    OffsetModelParams p;
    p.cycle = sample_cycle();
    p.ceiling = 5.0;
    for (double t : {0.0, 0.7, 3.0}) {
        CHECK(offset_model_correlation(p, 1.0, t) == analytic_position_autocorrelation(p.cycle, 1.0, t));
    }
    p.offset_scale = 0.5;
    CHECK(offset_model_correlation(p, 1.0, 0.0) - analytic_position_autocorrelation(p.cycle, 1.0, 0.0) ==
          doctest::Approx(0.25 * 0.4 / 0.4));
}

TEST_CASE("toy OU amplitude has the stationary variance D_A / 2 gamma_A") {
    ReducedCycle c = sample_cycle();
    c.amplitude_damping = 1.0;
    c.amplitude_diffusion = 2.0;
    const ToySeries s = simulate_toy(OuAmplitudeSpec{c}, 1e5 - 0.1, 0.1, 42);
    REQUIRE(s.values.size() == 1000000);
    CHECK(oracle::mean(s.values) == doctest::Approx(3.0).epsilon(0.01));
    CHECK(oracle::variance(s.values) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("toy phase diffusion grows linearly with slope D_phi") {
    ReducedCycle c = sample_cycle();
    c.phase_diffusion = 0.05;
    const double dt = 0.01;
    const ToySeries s = simulate_toy(PhaseDiffusionSpec{c, 1.0}, 2e4, dt, 7);
    const std::size_t lag = 100;
    std::vector<double> inc;
    for (std::size_t k = 0; k + lag < s.values.size(); k += lag) {
        inc.push_back(s.values[k + lag] - s.values[k] - 1.0 * lag * dt);
    }
    const double slope = oracle::variance(inc) / (lag * dt);
    const double err = c.phase_diffusion * std::sqrt(2.0 / inc.size());
    CHECK(std::abs(slope - c.phase_diffusion) < 3.0 * err);
}

TEST_CASE("toy telegraph occupancy and correlation") {
    TelegraphParams p;
    p.rates = {0.3, 0.7};
    p.means = {0.0, 1.0};
    std::vector<std::vector<double>> runs;
    std::vector<double> occ;
    for (std::size_t i = 0; i < 16; ++i) {
        ToySeries s = simulate_toy(TelegraphSpec{p}, 2000.0, 0.05, 5, i);
        occ.push_back(1.0 - oracle::mean(s.values));
        runs.push_back(std::move(s.values));
    }
    const double p1 = telegraph_statics(p).stationary[0];
    CHECK(std::abs(oracle::mean(occ) - p1) < 3.0 * std::sqrt(oracle::variance(occ) / occ.size()));

    const CorrelationCurve cc = autocorrelation(runs, 0.05, 200);
    int outside = 0;
    for (int j = 0; j < 20; ++j) {
        const std::size_t k = static_cast<std::size_t>(j) * 10;
        outside += std::abs(cc.values[k] - telegraph_correlation(p, cc.lag(k))) > 3.0 * cc.std_errors[k];
    }
    CHECK(outside == 0);
}

TEST_CASE("toy OU amplitude with phase diffusion matches the position autocorrelation") {
    OffsetModelParams p;
    p.cycle = sample_cycle();
    std::vector<std::vector<double>> runs;
    for (std::size_t i = 0; i < 16; ++i) {
        runs.push_back(simulate_toy(OffsetModelSpec{p, 1.0}, 4000.0, 0.05, 9, i).values);
    }
    const CorrelationCurve cc = autocorrelation(runs, 0.05, 600);
    int outside = 0;
    for (int j = 0; j < 20; ++j) {
        const std::size_t k = static_cast<std::size_t>(j) * 30;
        outside += std::abs(cc.values[k] - analytic_position_autocorrelation(p.cycle, 1.0, cc.lag(k))) >
                   3.0 * cc.std_errors[k];
    }
    CHECK(outside == 0);

    p.offset_scale = 0.6;
    p.ceiling = 2.0;
    runs.clear();
    for (std::size_t i = 0; i < 16; ++i) {
        runs.push_back(simulate_toy(OffsetModelSpec{p, 1.0}, 4000.0, 0.05, 10, i).values);
    }
    const CorrelationCurve co = autocorrelation(runs, 0.05, 600);
    outside = 0;
    for (int j = 0; j < 20; ++j) {
        const std::size_t k = static_cast<std::size_t>(j) * 30;
        outside += std::abs(co.values[k] - offset_model_correlation(p, 1.0, co.lag(k))) > 3.0 * co.std_errors[k];
    }
    CHECK(outside == 0);
}

TEST_CASE("toy simulation is deterministic per seed and index") {
    const ReducedCycle c = sample_cycle();
    const auto a = simulate_toy(OuAmplitudeSpec{c}, 10.0, 0.1, 3, 1);
    const auto b = simulate_toy(OuAmplitudeSpec{c}, 10.0, 0.1, 3, 1);
    const auto d = simulate_toy(OuAmplitudeSpec{c}, 10.0, 0.1, 3, 2);
    CHECK(a.values == b.values);
    CHECK(a.values != d.values);
    CHECK(a.values.size() == 101);
    CHECK_THROWS_AS(simulate_toy(OuAmplitudeSpec{c}, 10.0, 0.0, 3), ConfigError);
}
