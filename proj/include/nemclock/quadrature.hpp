#pragma once

#include "nemclock/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <span>
#include <string_view>
#include <vector>

namespace nemclock {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
};

/// Adaptive 31-point Gauss-Kronrod over consecutive panels [b_i, b_{i+1}].
///
/// Throws NumericalError naming `what` when the combined error estimate
/// exceeds the requested tolerance relative to the L1 norm of the integrand.
template <class F>
QuadratureResult integrate_panels(F&& f, std::span<const double> breakpoints, double rel_tol,
                                  unsigned max_depth, std::string_view what) {
    using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
    QuadratureResult total;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double a = breakpoints[i];
        const double b = breakpoints[i + 1];
        if (!(b > a)) {
            continue;
        }
        // Boost reports unscaled per-interval errors, so integrate on [-1, 1]
        // and scale the results ourselves.
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        auto unit = [&](double t) { return f(mid + half * t); };
        double err = 0.0;
        double l1 = 0.0;
        total.value += half * Rule::integrate(unit, -1.0, 1.0, max_depth, rel_tol, &err, &l1);
        total.error += half * err;
        total.l1 += half * l1;
    }
    if (!std::isfinite(total.value) || total.error > 10.0 * rel_tol * total.l1 + 1e-300) {
        std::ostringstream msg;
        msg << what << ": quadrature did not converge (achieved relative error "
            << (total.l1 > 0 ? total.error / total.l1 : total.error) << ", requested " << rel_tol << ")";
        throw NumericalError(msg.str());
    }
    return total;
}

/// Integrals over (-inf, lo] and [hi, inf) for integrands with algebraic tails.
template <class F>
QuadratureResult integrate_tails(F&& f, double lo, double hi, double rel_tol, std::string_view what) {
    boost::math::quadrature::exp_sinh<double> rule;
    constexpr double inf = std::numeric_limits<double>::infinity();
    QuadratureResult total;
    double err = 0.0;
    double l1 = 0.0;
    total.value += rule.integrate(f, -inf, lo, rel_tol, &err, &l1);
    total.error += err;
    total.l1 += l1;
    total.value += rule.integrate(f, hi, inf, rel_tol, &err, &l1);
    total.error += err;
    total.l1 += l1;
    if (!std::isfinite(total.value) || total.error > 10.0 * rel_tol * total.l1 + 1e-300) {
        std::ostringstream msg;
        msg << what << ": tail quadrature did not converge (error " << total.error << ")";
        throw NumericalError(msg.str());
    }
    return total;
}

/// Sorted, de-duplicated breakpoints clipped to [lo, hi], always including both ends.
inline std::vector<double> make_breakpoints(double lo, double hi, std::vector<double> interior) {
    std::vector<double> pts{lo, hi};
    for (double p : interior) {
        if (p > lo && p < hi) {
            pts.push_back(p);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

} // namespace nemclock
