#include "nemclock/histogram.hpp"

#include "nemclock/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace nemclock {

double Histogram::mass_sum() const {
    return std::accumulate(masses.begin(), masses.end(), 0.0);
}

void Histogram::validate() const {
    if (edges.size() != masses.size() + 1 || masses.empty()) {
        throw NumericalError("histogram: need bins + 1 edges and at least one bin");
    }
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i + 1] > edges[i])) {
            throw NumericalError("histogram: edges must be strictly increasing");
        }
    }
    for (double m : masses) {
        if (!(m >= 0.0)) {
            throw NumericalError("histogram: masses must be non-negative");
        }
    }
}

Histogram Histogram::normalized() const {
    Histogram h = *this;
    const double s = mass_sum();
    if (!(s > 0.0)) {
        throw NumericalError("histogram: cannot normalize zero mass");
    }
    for (double& m : h.masses) {
        m /= s;
    }
    return h;
}

bool Histogram::is_uniform() const {
    const double w = width(0);
    const double tol = 1e-9 * w + 8.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(std::abs(lower()), std::abs(upper()));
    for (std::size_t i = 1; i < bins(); ++i) {
        if (std::abs(width(i) - w) > tol) {
            return false;
        }
    }
    return true;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
    std::vector<double> e(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        e[i] = lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(bins));
    }
    return e;
}

Histogram histogram_of(std::span<const double> samples, double lo, double hi, std::size_t bins, bool clamp) {
    if (!(hi > lo) || bins == 0) {
        throw NumericalError("histogram: need lo < hi and at least one bin");
    }
    Histogram h;
    h.edges = uniform_edges(lo, hi, bins);
    h.masses.assign(bins, 0.0);
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (double s : samples) {
        double u = (s - lo) * scale;
        if (u < 0.0 || u >= static_cast<double>(bins)) {
            if (!clamp) {
                continue;
            }
            u = std::clamp(u, 0.0, static_cast<double>(bins) - 0.5);
        }
        h.masses[std::min(static_cast<std::size_t>(u), bins - 1)] += 1.0;
        h.total_count += 1.0;
    }
    if (h.total_count > 0.0) {
        for (double& m : h.masses) {
            m /= h.total_count;
        }
    }
    return h;
}

double quantile(std::span<const double> samples, double q) {
    if (samples.empty()) {
        throw NumericalError("quantile of an empty sample");
    }
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(s.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= s.size()) {
        return s.back();
    }
    return s[i] + (pos - static_cast<double>(i)) * (s[i + 1] - s[i]);
}

double freedman_diaconis_width(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw NumericalError("Freedman-Diaconis rule needs at least two samples");
    }
    const double n = static_cast<double>(samples.size());
    double spread = quantile(samples, 0.75) - quantile(samples, 0.25);
    if (!(spread > 0.0)) {
        const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
        double ss = 0.0;
        for (double s : samples) {
            ss += (s - mean) * (s - mean);
        }
        spread = std::sqrt(ss / (n - 1.0));
    }
    if (!(spread > 0.0)) {
        throw NumericalError("Freedman-Diaconis rule: sample has no spread");
    }
    return 2.0 * spread / std::cbrt(n);
}

HistogramAccumulator::HistogramAccumulator(double lo, double hi, std::size_t bins)
    : lo_(lo), hi_(hi), inv_width_(static_cast<double>(bins) / (hi - lo)), counts_(bins, 0.0) {
    if (!(hi > lo) || bins == 0) {
        throw NumericalError("histogram: need lo < hi and at least one bin");
    }
}

void HistogramAccumulator::add(double value) {
    if (value < lo_) {
        under_ += 1.0;
        return;
    }
    const auto i = static_cast<std::size_t>((value - lo_) * inv_width_);
    if (value >= hi_ || i >= counts_.size()) {
        over_ += 1.0;
        return;
    }
    counts_[i] += 1.0;
}

void HistogramAccumulator::merge(const HistogramAccumulator& other) {
    if (other.counts_.size() != counts_.size() || other.lo_ != lo_ || other.hi_ != hi_) {
        throw NumericalError("histogram: cannot merge different binnings");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        counts_[i] += other.counts_[i];
    }
    under_ += other.under_;
    over_ += other.over_;
}

Histogram HistogramAccumulator::histogram() const {
    Histogram h;
    h.edges = uniform_edges(lo_, hi_, counts_.size());
    h.masses = counts_;
    h.total_count = std::accumulate(counts_.begin(), counts_.end(), 0.0);
    if (h.total_count > 0.0) {
        for (double& m : h.masses) {
            m /= h.total_count;
        }
    }
    return h;
}

GridDensity::GridDensity(const GridSpec& grid)
    : grid_(grid), inv_spacing_(1.0 / grid.spacing()), weights_(grid.nodes, 0.0) {}

void GridDensity::add(double x) {
    if (!(x >= grid_.x_min && x <= grid_.x_max)) {
        std::ostringstream msg;
        msg << "position density: x=" << x << " outside the grid";
        throw TableRangeError(msg.str(), x);
    }
    const double u = (x - grid_.x_min) * inv_spacing_;
    auto i = static_cast<std::size_t>(u);
    if (i >= weights_.size() - 1) {
        i = weights_.size() - 2;
    }
    const double w = u - static_cast<double>(i);
    weights_[i] += 1.0 - w;
    weights_[i + 1] += w;
    total_ += 1.0;
}

void GridDensity::merge(const GridDensity& other) {
    if (other.weights_.size() != weights_.size()) {
        throw NumericalError("position density: grid mismatch");
    }
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        weights_[i] += other.weights_[i];
    }
    total_ += other.total_;
}

std::vector<double> GridDensity::density() const {
    std::vector<double> p(weights_.size(), 0.0);
    if (total_ == 0.0) {
        return p;
    }
    const double h = grid_.spacing();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool end = i == 0 || i + 1 == p.size();
        p[i] = weights_[i] / (total_ * (end ? 0.5 * h : h));
    }
    return p;
}

double trapezoid(const GridSpec& grid, std::span<const double> y) {
    if (y.size() != grid.nodes) {
        throw NumericalError("trapezoid: sample count does not match grid");
    }
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        s += y[i];
    }
    return s * grid.spacing();
}

} // namespace nemclock
