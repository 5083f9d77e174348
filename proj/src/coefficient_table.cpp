#include "nemclock/coefficient_table.hpp"

#include "nemclock/errors.hpp"
#include "nemclock/hashing.hpp"
#include "nemclock/parallel.hpp"
#include "nemclock/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nemclock {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "nemclock-coefficient-table";
constexpr int kVersion = 1;
constexpr double kNodeSnap = 1e-9;

double& field(TransportPoint& p, std::size_t col) {
    switch (static_cast<Column>(col)) {
    case Column::excess_occupation: return p.excess_occupation;
    case Column::current: return p.current;
    case Column::shot_noise: return p.shot_noise;
    case Column::friction: return p.friction;
    case Column::diffusion: return p.diffusion;
    }
    throw std::logic_error("bad column");
}

double field(const TransportPoint& p, std::size_t col) {
    return field(const_cast<TransportPoint&>(p), col);
}

json grid_to_json(const GridSpec& g) {
    return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"nodes", g.nodes}};
}

} // namespace

void GridSpec::validate() const {
    if (!(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min)) {
        throw ConfigError("grid: need finite x_min < x_max");
    }
    if (nodes < 5) {
        throw ConfigError("grid: at least 5 nodes are required");
    }
}

GridSpec GridSpec::symmetric(double half_width, std::size_t nodes) {
    return {-half_width, half_width, nodes};
}

CoefficientTable::CoefficientTable(GridSpec grid, std::vector<TransportPoint> points, double reference_occupation,
                                   std::string fingerprint)
    : grid_(grid), points_(std::move(points)), reference_(reference_occupation),
      fingerprint_(std::move(fingerprint)) {
    grid_.validate();
    if (points_.size() != grid_.nodes) {
        throw NumericalError("coefficient table: point count does not match grid");
    }
    inv_spacing_ = 1.0 / grid_.spacing();
    const std::size_t n = points_.size();
    nodes_.resize(n);
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        auto f = [&](std::size_t i) { return field(points_[i], c); };
        for (std::size_t i = 0; i < n; ++i) {
            const double y = f(i);
            if (!std::isfinite(y)) {
                std::ostringstream msg;
                msg << "coefficient table: non-finite " << kColumnNames[c] << " at node " << i
                    << " (x=" << grid_.node(i) << ")";
                throw NumericalError(msg.str());
            }
            double hs;
            if (i >= 2 && i + 2 < n) {
                hs = (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) / 12.0;
            } else if (i == 0) {
                hs = (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / 12.0;
            } else if (i == 1) {
                hs = (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / 12.0;
            } else if (i == n - 1) {
                hs = (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) + 3.0 * f(n - 5)) / 12.0;
            } else {
                hs = (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)) / 12.0;
            }
            nodes_[i][2 * c] = y;
            nodes_[i][2 * c + 1] = hs;
        }
    }
}

std::vector<double> CoefficientTable::column(Column c) const {
    std::vector<double> out;
    out.reserve(points_.size());
    for (const auto& p : points_) {
        out.push_back(field(p, static_cast<std::size_t>(c)));
    }
    return out;
}

CoefficientTable::Cell CoefficientTable::locate(double x) const {
    if (!(x >= grid_.x_min && x <= grid_.x_max)) {
        std::ostringstream msg;
        msg << "position x=" << x << " left the coefficient table range [" << grid_.x_min << ", " << grid_.x_max
            << "]";
        throw TableRangeError(msg.str(), x);
    }
    const double u = (x - grid_.x_min) * inv_spacing_;
    const double r = std::round(u);
    if (std::abs(u - r) < kNodeSnap) {
        return {static_cast<std::size_t>(r), 0.0, true};
    }
    std::size_t i = static_cast<std::size_t>(u);
    if (i >= points_.size() - 1) {
        i = points_.size() - 2;
    }
    return {i, u - static_cast<double>(i), false};
}

double CoefficientTable::eval(std::size_t col, const Cell& cell) const {
    const auto& a = nodes_[cell.index];
    if (cell.at_node) {
        return a[2 * col];
    }
    const auto& b = nodes_[cell.index + 1];
    const double t = cell.t;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * a[2 * col] + h10 * a[2 * col + 1] + h01 * b[2 * col] + h11 * b[2 * col + 1];
}

TransportPoint CoefficientTable::interpolate(double x) const {
    const Cell cell = locate(x);
    if (cell.at_node) {
        return points_[cell.index];
    }
    TransportPoint p;
    p.position = x;
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        field(p, c) = eval(c, cell);
    }
    return p;
}

double CoefficientTable::interpolate(Column c, double x) const {
    return eval(static_cast<std::size_t>(c), locate(x));
}

DynamicCoefficients CoefficientTable::dynamics(double x) const {
    const Cell cell = locate(x);
    return {eval(static_cast<std::size_t>(Column::excess_occupation), cell),
            eval(static_cast<std::size_t>(Column::friction), cell),
            eval(static_cast<std::size_t>(Column::diffusion), cell)};
}

double CoefficientTable::current_maximum_position() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : points_) {
        best = std::max(best, p.current);
    }
    const double tol = 1e-12 * std::max(std::abs(best), 1e-300);
    double chosen = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i].current >= best - tol) {
            const double x = grid_.node(i);
            if (!found || std::abs(x) < std::abs(chosen)) {
                chosen = x;
                found = true;
            }
        }
    }
    return chosen;
}

std::string table_fingerprint(const SystemParams& params, const QuadratureSettings& quad, const GridSpec& grid) {
    const json key{{"format", kFormat},
                   {"version", kVersion},
                   {"params", to_json(params)},
                   {"quadrature", to_json(quad)},
                   {"grid", grid_to_json(grid)}};
    return fingerprint_of(key.dump());
}

CoefficientTable build_coefficient_table(const SystemParams& params, const GridSpec& grid,
                                         const QuadratureSettings& quad, unsigned threads) {
    params.validate();
    return build_coefficient_table(params, grid, quad, threads, reference_occupation(params, quad));
}

CoefficientTable build_coefficient_table(const SystemParams& params, const GridSpec& grid,
                                         const QuadratureSettings& quad, unsigned threads,
                                         double reference_occupation) {
    grid.validate();
    std::vector<TransportPoint> points(grid.nodes);
    parallel_for(grid.nodes, threads, [&](std::size_t i) {
        const double x = grid.node(i);
        try {
            points[i] = transport_point(x, params, reference_occupation, quad);
        } catch (const NumericalError& e) {
            std::ostringstream msg;
            msg << "node " << i << " (x=" << x << "): " << e.what();
            throw NumericalError(msg.str());
        }
    });
    return CoefficientTable(grid, std::move(points), reference_occupation, table_fingerprint(params, quad, grid));
}

json table_to_json(const CoefficientTable& table, const SystemParams& params, const QuadratureSettings& quad) {
    json columns = json::object();
    std::vector<double> positions;
    for (std::size_t i = 0; i < table.size(); ++i) {
        positions.push_back(table.points()[i].position);
    }
    columns["position"] = positions;
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        columns[kColumnNames[c]] = table.column(static_cast<Column>(c));
    }
    return {{"format", kFormat},
            {"version", kVersion},
            {"fingerprint", table.fingerprint()},
            {"params", to_json(params)},
            {"quadrature", to_json(quad)},
            {"grid", grid_to_json(table.grid())},
            {"reference_occupation", table.reference_occupation()},
            {"columns", columns}};
}

void save_table(const std::filesystem::path& path, const CoefficientTable& table, const SystemParams& params,
                const QuadratureSettings& quad) {
    json doc = table_to_json(table, params, quad);
    doc["checksum"] = fingerprint_of(doc.dump());
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    // write-then-rename so a crashed run never leaves a half-written cache
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw NumericalError("cannot write coefficient table " + tmp.string());
        }
        out << doc.dump(1) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

CoefficientTable load_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NumericalError("cannot open coefficient table " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
        if (doc.at("format") != kFormat || doc.at("version") != kVersion) {
            throw NumericalError("unsupported table format");
        }
        const std::string checksum = doc.at("checksum").get<std::string>();
        doc.erase("checksum");
        if (fingerprint_of(doc.dump()) != checksum) {
            throw NumericalError("checksum mismatch");
        }
        const json& g = doc.at("grid");
        const GridSpec grid{g.at("x_min").get<double>(), g.at("x_max").get<double>(),
                            g.at("nodes").get<std::size_t>()};
        const json& cols = doc.at("columns");
        const auto pos = cols.at("position").get<std::vector<double>>();
        std::vector<TransportPoint> points(pos.size());
        for (std::size_t i = 0; i < pos.size(); ++i) {
            points[i].position = pos[i];
        }
        for (std::size_t c = 0; c < kColumnCount; ++c) {
            const auto values = cols.at(kColumnNames[c]).get<std::vector<double>>();
            if (values.size() != points.size()) {
                throw NumericalError(std::string("column length mismatch: ") + kColumnNames[c]);
            }
            for (std::size_t i = 0; i < values.size(); ++i) {
                field(points[i], c) = values[i];
            }
        }
        return CoefficientTable(grid, std::move(points), doc.at("reference_occupation").get<double>(),
                                doc.at("fingerprint").get<std::string>());
    } catch (const json::exception& e) {
        throw NumericalError("coefficient table " + path.string() + " is malformed: " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError("coefficient table " + path.string() + ": " + e.what());
    }
}

CacheLookup lookup_cached_table(const std::filesystem::path& path, const std::string& expected) {
    if (!std::filesystem::exists(path)) {
        return {std::nullopt, "missing"};
    }
    try {
        CoefficientTable table = load_table(path);
        if (table.fingerprint() != expected) {
            return {std::nullopt, "stale fingerprint"};
        }
        return {std::move(table), "hit"};
    } catch (const NumericalError& e) {
        return {std::nullopt, std::string("corrupt: ") + e.what()};
    }
}

} // namespace nemclock
