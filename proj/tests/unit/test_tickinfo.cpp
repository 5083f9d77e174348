#include "doctest.h"

#include "nemclock/errors.hpp"
#include "nemclock/tickinfo.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace nemclock;

namespace {

std::vector<double> ig_waits(double mu, double lambda, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> w(n);
    for (double& x : w) {
        x = oracle::sample_inverse_gaussian(mu, lambda, rng);
    }
    return w;
}

Histogram two_bin(double a, double b) {
    Histogram h;
    h.edges = {0.0, 1.0, 2.0};
    h.masses = {a, b};
    h.total_count = 1000.0;
    return h;
}

} // namespace

TEST_CASE("n-fold convolution: n = 1 is the identity") {
    const auto w = ig_waits(1.0, 5.0, 2000, 3);
    const Histogram h = histogram_of(w, 0.0, 4.0, 40);
    const Histogram c = n_fold_convolution(h, 1);
    CHECK(c.edges == h.edges);
    CHECK(c.masses == h.masses);
}

TEST_CASE("n-fold convolution of a point mass lands on n times its centre") {
    Histogram h;
    h.edges = uniform_edges(0.0, 2.0, 20);
    h.masses.assign(20, 0.0);
    h.masses[7] = 1.0; // centre 0.75
    const Histogram c = n_fold_convolution(h, 7);
    double best = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < c.bins(); ++i) {
        if (c.masses[i] > best) {
            best = c.masses[i];
            arg = i;
        }
    }
    CHECK(best == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.center(arg) == doctest::Approx(7 * 0.75).epsilon(1e-12));
    CHECK(c.mass_sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("convolved inverse-Gaussian histogram matches the closed-form n-sum law") {
    const double mu = 1.0;
    const double lambda = 8.0;
    const unsigned n = 5;
    const auto w = ig_waits(mu, lambda, 200000, 11);
    const double h = 0.01;
    const Histogram single = histogram_of(w, 0.0, 4.0, 400);
    const Histogram c = n_fold_convolution(single, n);
    CHECK(c.width(0) == doctest::Approx(h));
    CHECK(c.mass_sum() == doctest::Approx(1.0).epsilon(1e-9));
    // sum of n IG(mu, lambda) is IG(n mu, n^2 lambda)
    double tv = 0.0;
    for (std::size_t i = 0; i < c.bins(); ++i) {
        const double exact = oracle::inverse_gaussian_cdf(c.edges[i + 1], n * mu, n * n * lambda) -
                             oracle::inverse_gaussian_cdf(std::max(c.edges[i], 1e-12), n * mu, n * n * lambda);
        tv += std::abs(c.masses[i] - exact);
    }
    CHECK(0.5 * tv < 0.02);
}

TEST_CASE("n-fold convolution rejects unequal bins") {
    Histogram h;
    h.edges = {0.0, 1.0, 3.0};
    h.masses = {0.5, 0.5};
    CHECK_THROWS_AS(n_fold_convolution(h, 2), NumericalError);
}

TEST_CASE("KL divergence of a histogram with itself is zero") {
    const auto w = ig_waits(1.0, 3.0, 5000, 5);
    const Histogram h = histogram_of(w, 0.0, 5.0, 50);
    CHECK(kl_divergence(h, h) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("two-bin KL divergence") {
    // 0.5 ln(0.5/0.2) + 0.5 ln(0.5/0.8) = ln(5/4)
    CHECK(kl_divergence(two_bin(0.5, 0.5), two_bin(0.2, 0.8)) ==
          doctest::Approx(0.22314355131420976).epsilon(1e-14));
}

TEST_CASE("KL divergence regularizes empty reference bins") {
    const KlResult r = kl_divergence_detailed(two_bin(0.5, 0.5), two_bin(1.0, 0.0));
    CHECK(r.regularized_bins == 1);
    CHECK(r.epsilon == doctest::Approx(1e-4));
    // q -> (1, eps) / (1 + eps)
    const double expect = 0.5 * std::log(0.5 * (1.0 + 1e-4)) + 0.5 * std::log(0.5 * (1.0 + 1e-4) / 1e-4);
    CHECK(r.value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.value_eps_up < r.value);
    CHECK(r.value_eps_down > r.value);
}

TEST_CASE("KL divergence rejects mismatched grids") {
    Histogram q = two_bin(0.5, 0.5);
    q.edges = {0.0, 1.1, 2.0};
    CHECK_THROWS_AS(kl_divergence(two_bin(0.5, 0.5), q), NumericalError);
}

TEST_CASE("n-sums") {
    const std::vector<double> w = {1, 2, 3, 4, 5};
    CHECK(n_sums(w, 2) == std::vector<double>{3, 5, 7, 9});
    CHECK(n_sums(w, 5) == std::vector<double>{15});
    CHECK(n_sums(w, 6).empty());
}

TEST_CASE("KL profile is small for renewal waits and large for correlated ones") {
    const auto w = ig_waits(1.0, 10.0, 100000, 17);
    const std::vector<unsigned> ns = {1, 5, 20};
    KlOptions opt;
    opt.bootstrap_replicates = 8;
    const auto renewal = kl_profile(w, ns, opt);
    REQUIRE(renewal.size() == 3);
    for (const auto& p : renewal) {
        CHECK(p.value < 0.01);
        CHECK(p.bootstrap_error >= 0.0);
        CHECK(p.bins > 10);
    }

    // anticorrelated: each wait is pulled towards the mirror of the previous one
    std::vector<double> anti(w);
    for (std::size_t i = 1; i < w.size(); ++i) {
        anti[i] = 0.5 * (2.0 - anti[i - 1]) + 0.5 * w[i];
    }
    const auto corr = kl_profile(anti, std::vector<unsigned>{2}, opt);
    CHECK(corr[0].value > 0.1);
}

TEST_CASE("mutual information of independent waits stays below the bias bound") {
    const auto w = ig_waits(1.0, 5.0, 20000, 23);
    const MiResult r = pairwise_mutual_information(w, 1);
    CHECK(r.pairs == 19999);
    CHECK(r.bins == 28);
    CHECK(r.value <= r.bias_bound);
    const MiResult s = shuffled_mutual_information(w, 1, 99);
    CHECK(s.value <= s.bias_bound);
}

TEST_CASE("mutual information of a repeating sequence equals its entropy") {
    auto w = ig_waits(1.0, 5.0, 5000, 31);
    for (std::size_t i = 3; i < w.size(); ++i) {
        w[i] = w[i - 3];
    }
    const MiResult r = pairwise_mutual_information(w, 3);
    const double lo = quantile(w, 0.005);
    const double hi = quantile(w, 0.995);
    const Histogram h =
        histogram_of(std::span<const double>(w).first(r.pairs), lo, hi, r.bins, true);
    CHECK(r.value == doctest::Approx(histogram_entropy(h)).epsilon(1e-9));
    CHECK(r.value > 0.5);
}

TEST_CASE("mutual information needs enough pairs") {
    const auto w = ig_waits(1.0, 5.0, 900, 37);
    CHECK_THROWS_AS(pairwise_mutual_information(w, 1), NumericalError);
}
