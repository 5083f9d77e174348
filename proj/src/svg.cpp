#include "nemclock/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace nemclock {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 78.0;
constexpr double kRight = 150.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 52.0;

constexpr std::array<const char*, 8> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                             "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Axis {
    bool log = false;
    double lo = 0.0;
    double hi = 1.0;

    [[nodiscard]] bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
    [[nodiscard]] double map(double v) const { return log ? std::log10(v) : v; }

    void fit(double mn, double mx) {
        if (!(mn <= mx)) {
            mn = log ? 1.0 : 0.0;
            mx = log ? 10.0 : 1.0;
        }
        lo = map(mn);
        hi = map(mx);
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
            const double pad = log ? 0.5 : std::max(0.5, 0.05 * std::abs(hi));
            lo -= pad;
            hi += pad;
        } else if (!log) {
            const double pad = 0.04 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
    }

    [[nodiscard]] std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            for (double e = std::ceil(lo); e <= hi + 1e-9; e += 1.0) {
                out.push_back(e);
            }
            if (out.size() > 8) {
                std::vector<double> thin;
                const auto step = static_cast<std::size_t>(std::ceil(static_cast<double>(out.size()) / 8.0));
                for (std::size_t i = 0; i < out.size(); i += step) {
                    thin.push_back(out[i]);
                }
                out = thin;
            }
            return out;
        }
        const double raw = (hi - lo) / 6.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        }
        for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
            out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
        }
        return out;
    }

    [[nodiscard]] std::string label(double t) const { return tick_label(log ? std::pow(10.0, t) : t); }
};

} // namespace

std::string render_svg(const PlotSpec& plot) {
    Axis ax{plot.log_x};
    Axis ay{plot.log_y};
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& s : plot.series) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (ax.usable(s.x[i]) && ay.usable(s.y[i])) {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    ax.fit(xmin, xmax);
    ay.fit(ymin, ymax);

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double v) { return kTop + ph - (ay.map(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
      << escape(plot.title) << "</text>\n";
    o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double t : ax.ticks()) {
        const double x = kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw;
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(kTop + ph + 4) << "\" stroke=\"black\"/>";
        o << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
          << ax.label(t) << "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = kTop + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph;
        o << "<line x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft) << "\" y2=\""
          << num(y) << "\" stroke=\"black\"/>";
        o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << ay.label(t)
          << "</text>\n";
    }
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
      << escape(plot.x_label) << "</text>\n";
    o << "<text transform=\"translate(16 " << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(plot.y_label) << "</text>\n";

    o << "<clipPath id=\"plot\"><rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\"/></clipPath>\n";
    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* color = kColors[k % kColors.size()];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        o << "<g clip-path=\"url(#plot)\" stroke=\"" << color << "\" fill=\"" << (s.markers ? color : "none")
          << "\"" << (s.dashed ? " stroke-dasharray=\"5 3\"" : "") << ">\n";
        if (s.markers) {
            for (std::size_t i = 0; i < n; ++i) {
                if (ax.usable(s.x[i]) && ay.usable(s.y[i])) {
                    o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\"/>";
                }
            }
            o << '\n';
        } else {
            std::string pts;
            auto flush = [&] {
                if (!pts.empty()) {
                    o << "<polyline stroke-width=\"1.2\" points=\"" << pts << "\"/>\n";
                    pts.clear();
                }
            };
            for (std::size_t i = 0; i < n; ++i) {
                if (!(ax.usable(s.x[i]) && ay.usable(s.y[i]))) {
                    flush();
                    continue;
                }
                pts += num(px(s.x[i])) + ',' + num(py(s.y[i])) + ' ';
            }
            flush();
        }
        o << "</g>\n";
        const double ly = kTop + 12 + 16 * static_cast<double>(k);
        o << "<line x1=\"" << num(kLeft + pw + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kLeft + pw + 28)
          << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\""
          << (s.dashed ? " stroke-dasharray=\"5 3\"" : "") << "/>";
        o << "<text x=\"" << num(kLeft + pw + 32) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

} // namespace nemclock
