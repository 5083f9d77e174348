#pragma once

#include "nemclock/histogram.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nemclock {

/// Distribution of the sum of n independent draws from `wtd` (uniform bins).
/// Output bins have the input width; the lower edge is n a + (n - 1) h / 2 so
/// bin centres add exactly. Tiny negative FFT round-off is clipped to zero.
[[nodiscard]] Histogram n_fold_convolution(const Histogram& wtd, unsigned n);

struct KlResult {
    double value = 0.0;
    double epsilon = 0.0;         ///< mass given to empty q bins under p support
    double value_eps_up = 0.0;    ///< same with 10 epsilon
    double value_eps_down = 0.0;  ///< same with epsilon / 10
    std::size_t regularized_bins = 0;
};

/// sum_i p_i ln(p_i / q_i). Bins with q = 0 < p receive epsilon =
/// 1 / (10 total_count), and q is renormalized. Throws NumericalError when the
/// two histograms do not share edges.
[[nodiscard]] KlResult kl_divergence_detailed(const Histogram& p, const Histogram& q);
[[nodiscard]] double kl_divergence(const Histogram& p, const Histogram& q);

/// Overlapping n-sums tau_i + ... + tau_{i+n-1}.
[[nodiscard]] std::vector<double> n_sums(std::span<const double> waits, unsigned n);

struct KlPoint {
    unsigned n = 0;
    double value = 0.0;
    double value_eps_up = 0.0;
    double value_eps_down = 0.0;
    double bootstrap_error = 0.0;
    std::size_t bins = 0;
    std::size_t samples = 0;
};

struct KlOptions {
    unsigned refinement = 8;             ///< fine sub-bins per reporting bin for the convolution
    unsigned bootstrap_replicates = 40;
    std::uint64_t seed = 1;
};

/// D_KL(P_n || Conv^n W) for each n. P_n is the histogram of overlapping
/// n-sums with Freedman-Diaconis bins; W is histogrammed on bins `refinement`
/// times finer, convolved, and rebinned onto the P_n bins. Error bars from a
/// moving-block bootstrap over the waiting-time sequence.
[[nodiscard]] std::vector<KlPoint> kl_profile(std::span<const double> waits, std::span<const unsigned> ns,
                                              const KlOptions& options = {});

struct MiResult {
    double value = 0.0;      ///< clipped at 0
    double raw = 0.0;        ///< before clipping
    double bias_bound = 0.0; ///< (B - 1)^2 / (2 K)
    std::size_t bins = 0;
    std::size_t pairs = 0;
};

/// Plug-in entropy -sum p ln p of histogram masses.
[[nodiscard]] double histogram_entropy(const Histogram& h);

/// I = H[tau_i] + H[tau_{i+m}] - H[tau_i, tau_{i+m}] on B = ceil(K^{1/3})
/// bins per axis spanning the 0.5%-99.5% quantiles of all waits (outliers go
/// to the end bins). Needs K = len - m >= 1000 pairs.
[[nodiscard]] MiResult pairwise_mutual_information(std::span<const double> waits, std::size_t m);

/// Same estimator after a seeded random permutation of the waits.
[[nodiscard]] MiResult shuffled_mutual_information(std::span<const double> waits, std::size_t m,
                                                   std::uint64_t seed);

} // namespace nemclock
