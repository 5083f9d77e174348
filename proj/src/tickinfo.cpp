#include "nemclock/tickinfo.hpp"

#include "nemclock/errors.hpp"
#include "nemclock/fft.hpp"
#include "nemclock/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nemclock {

namespace {

constexpr std::uint64_t kBootstrapDomain = 0x424f4f54;
constexpr std::uint64_t kShuffleDomain = 0x53485546;

bool same_edges(const Histogram& a, const Histogram& b) {
    if (a.edges.size() != b.edges.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
        const double tol = 1e-9 * (std::abs(a.edges[i]) + a.width(std::min(i, a.bins() - 1)));
        if (std::abs(a.edges[i] - b.edges[i]) > tol) {
            return false;
        }
    }
    return true;
}

double kl_with_epsilon(const Histogram& p, const Histogram& q, double eps, std::size_t* regularized) {
    std::vector<double> qq = q.masses;
    std::size_t fixed = 0;
    for (std::size_t i = 0; i < qq.size(); ++i) {
        if (p.masses[i] > 0.0 && !(qq[i] > 0.0)) {
            qq[i] = eps;
            ++fixed;
        }
    }
    const double qsum = std::accumulate(qq.begin(), qq.end(), 0.0);
    const double psum = p.mass_sum();
    double d = 0.0;
    for (std::size_t i = 0; i < qq.size(); ++i) {
        const double pi = p.masses[i] / psum;
        if (pi > 0.0) {
            d += pi * std::log(pi / (qq[i] / qsum));
        }
    }
    if (regularized != nullptr) {
        *regularized = fixed;
    }
    return std::max(d, 0.0);
}

struct KlEstimate {
    KlResult result;
    std::size_t bins;
};

KlEstimate kl_point(std::span<const double> waits, unsigned n, unsigned refinement) {
    const auto sums = n_sums(waits, n);
    if (sums.size() < 100) {
        std::ostringstream msg;
        msg << "KL profile: only " << sums.size() << " " << n << "-sums available";
        throw NumericalError(msg.str());
    }
    const double coarse = freedman_diaconis_width(sums);
    const double fine = coarse / refinement;
    const auto [mn, mx] = std::minmax_element(waits.begin(), waits.end());
    const double a = *mn - 0.5 * fine;
    const double span = std::ceil((*mx - a) / fine) + 1.0;
    if (!(span < 4.0e6)) {
        std::ostringstream msg;
        msg << "KL profile: n=" << n << " bin width " << coarse << " is too fine for the waiting-time range";
        throw NumericalError(msg.str());
    }
    const auto single_bins = static_cast<std::size_t>(span);
    const Histogram w = histogram_of(waits, a, a + fine * static_cast<double>(single_bins), single_bins);
    const Histogram conv = n_fold_convolution(w, n);

    const std::size_t fine_bins = conv.bins();
    const std::size_t groups = (fine_bins + refinement - 1) / refinement;
    const double lo = conv.lower();
    const double hi = lo + fine * static_cast<double>(groups * refinement);
    Histogram q;
    q.edges = uniform_edges(lo, hi, groups);
    q.masses.assign(groups, 0.0);
    q.total_count = w.total_count;
    for (std::size_t j = 0; j < fine_bins; ++j) {
        q.masses[j / refinement] += conv.masses[j];
    }
    Histogram p = histogram_of(sums, lo, hi, groups);
    p.edges = q.edges;
    return {kl_divergence_detailed(p, q), groups};
}

std::size_t bin_of(double x, double lo, double scale, std::size_t bins) {
    const double u = (x - lo) * scale;
    if (!(u > 0.0)) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(u), bins - 1);
}

double entropy_of_counts(const std::vector<double>& counts, double total) {
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log(p);
        }
    }
    return h;
}

} // namespace

Histogram n_fold_convolution(const Histogram& wtd, unsigned n) {
    if (n == 0) {
        throw NumericalError("n-fold convolution needs n >= 1");
    }
    wtd.validate();
    if (!wtd.is_uniform()) {
        throw NumericalError("n-fold convolution needs equal-width bins");
    }
    if (n == 1) {
        return wtd;
    }
    const double h = wtd.width(0);
    const double lo = static_cast<double>(n) * wtd.lower() + 0.5 * static_cast<double>(n - 1) * h;
    Histogram out;
    out.masses = self_convolution(wtd.masses, n);
    for (double& m : out.masses) {
        m = std::max(m, 0.0);
    }
    out.edges = uniform_edges(lo, lo + h * static_cast<double>(out.masses.size()), out.masses.size());
    out.total_count = wtd.total_count;
    return out;
}

KlResult kl_divergence_detailed(const Histogram& p, const Histogram& q) {
    p.validate();
    q.validate();
    if (!same_edges(p, q)) {
        throw NumericalError("KL divergence: histograms are on different grids");
    }
    if (!(p.mass_sum() > 0.0) || !(q.mass_sum() > 0.0)) {
        throw NumericalError("KL divergence: empty histogram");
    }
    const double count = q.total_count > 0.0 ? q.total_count : p.total_count;
    KlResult r;
    r.epsilon = count > 0.0 ? 1.0 / (10.0 * count) : 1e-12;
    r.value = kl_with_epsilon(p, q, r.epsilon, &r.regularized_bins);
    r.value_eps_up = kl_with_epsilon(p, q, 10.0 * r.epsilon, nullptr);
    r.value_eps_down = kl_with_epsilon(p, q, 0.1 * r.epsilon, nullptr);
    return r;
}

double kl_divergence(const Histogram& p, const Histogram& q) {
    return kl_divergence_detailed(p, q).value;
}

std::vector<double> n_sums(std::span<const double> waits, unsigned n) {
    if (n == 0) {
        throw NumericalError("n-sums need n >= 1");
    }
    if (waits.size() < n) {
        return {};
    }
    std::vector<double> out(waits.size() - n + 1);
    // running sum, re-seeded exactly every 4096 entries to stop drift
    for (std::size_t i = 0; i < out.size(); i += 4096) {
        out[i] = std::accumulate(waits.begin() + static_cast<std::ptrdiff_t>(i),
                                 waits.begin() + static_cast<std::ptrdiff_t>(i + n), 0.0);
        double r = out[i];
        for (std::size_t j = i + 1; j < std::min(out.size(), i + 4096); ++j) {
            r += waits[j + n - 1] - waits[j - 1];
            out[j] = r;
        }
    }
    return out;
}

std::vector<KlPoint> kl_profile(std::span<const double> waits, std::span<const unsigned> ns,
                                const KlOptions& options) {
    if (options.refinement == 0) {
        throw NumericalError("KL profile: refinement must be >= 1");
    }
    std::vector<KlPoint> out;
    for (unsigned n : ns) {
        const KlEstimate est = kl_point(waits, n, options.refinement);
        KlPoint pt;
        pt.n = n;
        pt.value = est.result.value;
        pt.value_eps_up = est.result.value_eps_up;
        pt.value_eps_down = est.result.value_eps_down;
        pt.bins = est.bins;
        pt.samples = waits.size() - n + 1;

        if (options.bootstrap_replicates >= 2) {
            const std::size_t len = waits.size();
            const std::size_t block = std::min<std::size_t>(len, std::max<std::size_t>(100, 10 * n));
            auto rng = make_stream(options.seed, n, kBootstrapDomain);
            std::uniform_int_distribution<std::size_t> start(0, len - block);
            std::vector<double> values;
            std::vector<double> resampled;
            resampled.reserve(len + block);
            for (unsigned r = 0; r < options.bootstrap_replicates; ++r) {
                resampled.clear();
                while (resampled.size() < len) {
                    const std::size_t s = start(rng);
                    resampled.insert(resampled.end(), waits.begin() + static_cast<std::ptrdiff_t>(s),
                                     waits.begin() + static_cast<std::ptrdiff_t>(s + block));
                }
                resampled.resize(len);
                values.push_back(kl_point(resampled, n, options.refinement).result.value);
            }
            const double m = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
            double ss = 0.0;
            for (double v : values) {
                ss += (v - m) * (v - m);
            }
            pt.bootstrap_error = std::sqrt(ss / (values.size() - 1.0));
        }
        out.push_back(pt);
    }
    return out;
}

double histogram_entropy(const Histogram& h) {
    return entropy_of_counts(h.masses, h.mass_sum());
}

MiResult pairwise_mutual_information(std::span<const double> waits, std::size_t m) {
    constexpr std::size_t kMinPairs = 1000;
    if (m == 0 || waits.size() < m + kMinPairs) {
        std::ostringstream msg;
        msg << "mutual information at lag " << m << " needs at least " << kMinPairs << " pairs, have "
            << (waits.size() > m ? waits.size() - m : 0);
        throw NumericalError(msg.str());
    }
    MiResult r;
    r.pairs = waits.size() - m;
    r.bins = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(r.pairs)) - 1e-9));
    const double k = static_cast<double>(r.pairs);
    const double b = static_cast<double>(r.bins);
    r.bias_bound = (b - 1.0) * (b - 1.0) / (2.0 * k);

    const double lo = quantile(waits, 0.005);
    const double hi = quantile(waits, 0.995);
    if (!(hi > lo)) {
        return r; // (almost) constant waits carry no information
    }
    const double scale = b / (hi - lo);
    std::vector<double> joint(r.bins * r.bins, 0.0);
    std::vector<double> first(r.bins, 0.0);
    std::vector<double> second(r.bins, 0.0);
    for (std::size_t i = 0; i < r.pairs; ++i) {
        const std::size_t x = bin_of(waits[i], lo, scale, r.bins);
        const std::size_t y = bin_of(waits[i + m], lo, scale, r.bins);
        joint[x * r.bins + y] += 1.0;
        first[x] += 1.0;
        second[y] += 1.0;
    }
    r.raw = entropy_of_counts(first, k) + entropy_of_counts(second, k) - entropy_of_counts(joint, k);
    r.value = std::max(r.raw, 0.0);
    return r;
}

MiResult shuffled_mutual_information(std::span<const double> waits, std::size_t m, std::uint64_t seed) {
    std::vector<double> shuffled(waits.begin(), waits.end());
    auto rng = make_stream(seed, m, kShuffleDomain);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    return pairwise_mutual_information(shuffled, m);
}

} // namespace nemclock
