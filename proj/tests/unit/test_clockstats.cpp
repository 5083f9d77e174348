#include "doctest.h"

#include "nemclock/clockstats.hpp"
#include "nemclock/errors.hpp"
#include "support/oracles.hpp"
#include "support/tables.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace nemclock;

namespace {

TickSeries ticks_from_waits(const std::vector<double>& waits, double start = 0.0) {
    TickSeries s;
    s.observation_start = start;
    double t = start;
    for (double w : waits) {
        t += w;
        s.tick_times.push_back(t);
    }
    s.observation_end = t;
    return s;
}

std::vector<double> exponential_waits(double mean, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> e(1.0 / mean);
    std::vector<double> w(n);
    for (double& x : w) {
        x = e(rng);
    }
    return w;
}

} // namespace

TEST_CASE("autocorrelation of a constant series vanishes") {
    const std::vector<std::vector<double>> s{std::vector<double>(500, 3.25), std::vector<double>(500, 3.25)};
    const auto c = autocorrelation(s, 0.1, 50);
    for (double v : c.values) {
        CHECK(v == 0.0);
    }
    CHECK_THROWS_AS(autocorrelation(s, 0.1, 500), NumericalError);
}

TEST_CASE("autocorrelation at lag zero is the sample variance") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(2.0, 1.5);
    std::vector<double> y(4000);
    for (double& v : y) {
        v = n(rng);
    }
    const auto c = autocorrelation({y}, 1.0, 100);
    const double m = oracle::mean(y);
    double ss = 0.0;
    for (double v : y) {
        ss += (v - m) * (v - m);
    }
    CHECK(c.values[0] == doctest::Approx(ss / y.size()).epsilon(1e-12));
    for (std::size_t k = 0; k < c.size(); ++k) {
        CHECK(std::abs(c.values[k]) <= c.values[0]);
    }
    REQUIRE(c.std_errors.size() == c.size());
}

TEST_CASE("random-phase sinusoid") {
    const double a = 2.0;
    const double dt = 0.05;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<std::vector<double>> ensemble;
    for (int j = 0; j < 400; ++j) {
        const double phi = phase(rng);
        std::vector<double> y(4000);
        for (std::size_t k = 0; k < y.size(); ++k) {
            y[k] = a * std::cos(dt * k + phi);
        }
        ensemble.push_back(std::move(y));
    }
    const auto c = autocorrelation(ensemble, dt, 400);
    for (std::size_t k = 0; k < c.size(); k += 20) {
        CHECK(std::abs(c.values[k] - 0.5 * a * a * std::cos(c.lag(k))) < 0.02 * a * a);
    }
}

TEST_CASE("Ornstein-Uhlenbeck input matches the exponential correlation") {
    // exact AR(1) discretisation of an OU process with rate g and variance s2
    const double g = 0.5;
    const double s2 = 1.7;
    const double dt = 0.1;
    const double r = std::exp(-g * dt);
    std::vector<std::vector<double>> ensemble;
    for (int j = 0; j < 24; ++j) {
        std::mt19937_64 rng(100 + j);
        std::normal_distribution<double> n;
        std::vector<double> y(20000);
        double x = std::sqrt(s2) * n(rng);
        for (double& v : y) {
            v = x;
            x = r * x + std::sqrt(s2 * (1.0 - r * r)) * n(rng);
        }
        ensemble.push_back(std::move(y));
    }
    const auto c = autocorrelation(ensemble, dt, 100);
    int outside = 0;
    for (std::size_t k = 0; k < c.size(); k += 5) {
        const double exact = s2 * std::exp(-g * c.lag(k));
        outside += std::abs(c.values[k] - exact) > 3.0 * c.std_errors[k];
    }
    CHECK(outside <= 1);
}

TEST_CASE("power spectrum") {
    SUBCASE("zero correlation gives the floor") {
        CorrelationCurve c;
        c.lag_step = 0.2;
        c.values.assign(100, 0.0);
        const auto s = power_spectrum(c, 0.7, {.omega_max = 5.0, .points = 51});
        for (double v : s.values) {
            CHECK(v == 0.7);
        }
    }
    SUBCASE("cosine correlation peaks at its frequency") {
        CorrelationCurve c;
        c.lag_step = 0.05;
        for (int k = 0; k < 4000; ++k) {
            c.values.push_back(std::cos(2.0 * c.lag_step * k));
        }
        const auto s = power_spectrum(c, 0.0, {.omega_max = 4.0, .points = 4001});
        const auto peak = find_spectral_peak(s, 0.5, 4.0);
        CHECK(peak.omega == doctest::Approx(2.0).epsilon(1e-3));
        CHECK(peak.width > 0.0);
        CHECK(peak.width < 0.05);
    }
    SUBCASE("Lorentzian line of a damped cosine") {
        // C = exp(-a t) cos(w t) -> peak at w, FWHM 2a
        CorrelationCurve c;
        c.lag_step = 0.02;
        for (int k = 0; k < 40000; ++k) {
            const double t = c.lag_step * k;
            c.values.push_back(std::exp(-0.05 * t) * std::cos(2.0 * t));
        }
        const auto s = power_spectrum(c, 0.1, {.omega_max = 3.0, .points = 3001, .hann_window = false});
        const auto peak = find_spectral_peak(s, 1.0, 3.0);
        CHECK(peak.omega == doctest::Approx(2.0).epsilon(1e-3));
        CHECK(peak.width == doctest::Approx(0.1).epsilon(0.03));
        CHECK(peak.height == doctest::Approx(0.1 + 1.0 / 0.05 + 0.05 / (0.0025 + 16.0)).epsilon(0.01));
    }
}

TEST_CASE("waiting_times") {
    TickSeries t;
    t.tick_times = {0.0, 1.0, 3.0};
    CHECK(waiting_times(t) == std::vector<double>{1.0, 2.0});
    t.tick_times = {0.0};
    CHECK_THROWS_AS(waiting_times(t), NumericalError);
    TickSeries periodic;
    for (int i = 0; i < 10; ++i) {
        periodic.tick_times.push_back(0.5 * i);
    }
    for (double w : waiting_times(periodic)) {
        CHECK(w == 0.5);
    }
}

TEST_CASE("inverse Gaussian CDF") {
    for (double x : {0.3, 0.9, 1.0, 1.4, 3.0}) {
        CHECK(inverse_gaussian_cdf(x, 1.0, 2.0) == doctest::Approx(oracle::inverse_gaussian_cdf(x, 1.0, 2.0)).epsilon(1e-12));
    }
    // lambda / mu far beyond where exp(2 lambda / mu) overflows
    double prev = 0.0;
    for (double x = 0.99; x <= 1.01; x += 0.0005) {
        const double f = inverse_gaussian_cdf(x, 1.0, 1e6);
        CHECK(std::isfinite(f));
        CHECK(f >= prev);
        prev = f;
    }
    CHECK(inverse_gaussian_cdf(1.0, 1.0, 1e6) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("inverse Gaussian fit on exact samples") {
    const double mu = 1.0;
    const double var = 0.01;
    const double lambda = mu * mu * mu / var;
    std::mt19937_64 rng(77);
    std::vector<double> s(100000);
    for (double& v : s) {
        v = oracle::sample_inverse_gaussian(mu, lambda, rng);
    }
    const auto fit = fit_inverse_gaussian(s);
    const double n = static_cast<double>(s.size());
    CHECK(std::abs(fit.mean - mu) < 3.0 * std::sqrt(var / n));
    CHECK(std::abs(fit.variance - var) < 3.0 * var * std::sqrt(2.0 / n));
    CHECK(fit.sample_count == s.size());
    CHECK(fit.ks_statistic < 1.63 / std::sqrt(n)); // 1% critical value
    CHECK(fit.shape == doctest::Approx(lambda).epsilon(0.02));

    CHECK_THROWS_AS(fit_inverse_gaussian(std::vector<double>(200, 1.5)), NumericalError);
    std::vector<double> bad(s.begin(), s.begin() + 200);
    bad[7] = -1.0;
    CHECK_THROWS_AS(fit_inverse_gaussian(bad), NumericalError);
    CHECK_THROWS_AS(fit_inverse_gaussian(std::vector<double>(s.begin(), s.begin() + 50)), NumericalError);
}

TEST_CASE("accuracy and resolution") {
    const auto w = exponential_waits(2.0, 100000, 3);
    const auto r = accuracy_resolution(w);
    CHECK(r.accuracy == doctest::Approx(1.0).epsilon(0.03));
    CHECK(r.resolution == doctest::Approx(0.5).epsilon(0.01));
    CHECK(!r.accuracy_infinite);

    const auto p = accuracy_resolution(std::vector<double>(50, 0.1));
    CHECK(p.accuracy_infinite);
    CHECK(std::isinf(p.accuracy));
    CHECK(p.resolution == doctest::Approx(10.0));
    CHECK_THROWS_AS(accuracy_resolution(std::vector<double>{1.0}), NumericalError);
}

TEST_CASE("entropy production") {
    const GridSpec g{-5.0, 5.0, 101};
    const auto table = support::constant_table(g, 0.1, 0.1);
    GridDensity density(g);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
        density.add(std::clamp(n(rng), -5.0, 5.0));
    }
    const auto p = density.density();
    CHECK(trapezoid(g, p) == doctest::Approx(1.0).epsilon(1e-12));

    SystemParams params = SystemParams::reference_device(0.0);
    CHECK(entropy_per_tick(params, g, p, table, 0.3).rate == 0.0);

    params = SystemParams::reference_device(10.0);
    const auto e1 = entropy_per_tick(params, g, p, table, 0.3);
    params.inverse_temperature *= 2.0;
    const auto e2 = entropy_per_tick(params, g, p, table, 0.3);
    CHECK(e2.rate == doctest::Approx(2.0 * e1.rate).epsilon(1e-14));
    CHECK(e1.per_tick == doctest::Approx(e1.rate / 0.3));

    auto scaled = p;
    for (double& v : scaled) {
        v *= 1.001;
    }
    CHECK_THROWS_AS(entropy_per_tick(params, g, scaled, table, 0.3), NumericalError);
}

TEST_CASE("Allan variance") {
    SUBCASE("periodic clock is exact") {
        std::vector<double> w(2000, 0.25);
        const auto t = ticks_from_waits(w);
        const std::vector<double> T{1.0, 5.0, 25.0};
        for (const auto& p : allan_variance(t, 0.25, T)) {
            CHECK(p.variance == doctest::Approx(0.0).scale(1.0).epsilon(1e-20));
        }
    }
    SUBCASE("Poisson ticks follow mu / T") {
        const double mu = 1.0;
        const auto t = ticks_from_waits(exponential_waits(mu, 2000000, 8));
        const auto grid = log_grid(100.0, 1000.0, 5);
        for (const auto& p : allan_variance(t, mu, grid)) {
            const double scaled = p.variance * p.averaging_time / mu;
            CHECK(scaled > 0.8);
            CHECK(scaled < 1.25);
        }
    }
    SUBCASE("renewal input with accuracy N") {
        const double mu = 2.0;
        const double accuracy = 100.0;
        std::mt19937_64 rng(12);
        std::vector<double> w(1000000);
        for (double& v : w) {
            v = oracle::sample_inverse_gaussian(mu, mu * accuracy, rng);
        }
        const auto t = ticks_from_waits(w);
        const auto grid = log_grid(200.0, 2000.0, 4);
        const auto pts = allan_variance(t, oracle::mean(w), grid);
        for (const auto& p : pts) {
            CHECK(p.variance * p.averaging_time * accuracy / mu == doctest::Approx(1.0).epsilon(0.2));
        }
        // shifting the window origin by a non-multiple of T changes nothing beyond noise
        const auto shifted = allan_variance(t, oracle::mean(w), grid, 37.3);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            CHECK(shifted[i].variance == doctest::Approx(pts[i].variance).epsilon(0.2));
        }
    }
    SUBCASE("span check names the offending T") {
        const auto t = ticks_from_waits(std::vector<double>(100, 1.0));
        const std::vector<double> T{10.0, 40.0, 50.0};
        CHECK_THROWS_WITH_AS(allan_variance(t, 1.0, T), doctest::Contains("T = 40 50"), NumericalError);
    }
}

TEST_CASE("renewal asymptote") {
    CHECK(renewal_allan_asymptote(1.0, 1.0, 10.0) == doctest::Approx(0.1));
    CHECK(renewal_allan_asymptote(std::numbers::pi, 1e4, std::numbers::pi * 1e4) == doctest::Approx(1e-8));
    const double mu = 1.3;
    const double var = 0.02;
    CHECK(renewal_allan_asymptote(mu, mu * mu / var, 7.0) == doctest::Approx(var / (mu * 7.0)));
}

TEST_CASE("log grid") {
    const auto g = log_grid(1.0, 100.0);
    CHECK(g.size() == 41);
    CHECK(g[20] == doctest::Approx(10.0));
    CHECK(g.back() == doctest::Approx(100.0));
}
