#include "doctest.h"

#include "nemclock/coefficient_table.hpp"
#include "nemclock/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace nemclock;

namespace {

// Synthetic columns with known shapes.
CoefficientTable synthetic(const GridSpec& g) {
    std::vector<TransportPoint> pts(g.nodes);
    for (std::size_t i = 0; i < g.nodes; ++i) {
        const double x = g.node(i);
        pts[i].position = x;
        pts[i].excess_occupation = 0.3 - 0.02 * x;        // linear
        pts[i].current = 5.0 / (1.0 + x * x / 100.0);     // smooth, scale 10
        pts[i].shot_noise = 1.0 + x * x * (0.5 - 0.1 * x); // cubic
        pts[i].friction = std::tanh(x / 8.0);
        pts[i].diffusion = 0.015 + 1e-4 * x * x;
    }
    return {g, std::move(pts), 0.5, "synthetic"};
}

std::filesystem::path scratch(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / "nemclock_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("grid nodes are shared under 2x refinement") {
    const GridSpec coarse{-12.0, 17.0, 30};
    const GridSpec fine{-12.0, 17.0, 59};
    for (std::size_t i = 0; i < coarse.nodes; ++i) {
        CHECK(coarse.node(i) == fine.node(2 * i));
    }
    CHECK_THROWS_AS(GridSpec({1.0, 0.0, 10}).validate(), ConfigError);
    CHECK_THROWS_AS(GridSpec({0.0, 1.0, 3}).validate(), ConfigError);
}

TEST_CASE("interpolation") {
    const GridSpec g{-40.0, 40.0, 801};
    const auto table = synthetic(g);

    SUBCASE("exact at nodes") {
        for (std::size_t i : {0u, 1u, 17u, 400u, 799u, 800u}) {
            const auto p = table.interpolate(g.node(i));
            CHECK(p.current == table.points()[i].current);
            CHECK(p.friction == table.points()[i].friction);
        }
    }
    SUBCASE("linear and cubic columns are reproduced") {
        for (double x = -39.99; x < 40.0; x += 0.731) {
            CHECK(table.interpolate(Column::excess_occupation, x) ==
                  doctest::Approx(0.3 - 0.02 * x).epsilon(1e-13));
            CHECK(table.interpolate(Column::shot_noise, x) ==
                  doctest::Approx(1.0 + x * x * (0.5 - 0.1 * x)).epsilon(1e-11));
        }
    }
    SUBCASE("midpoints agree with a ten times finer table") {
        const GridSpec finer{-40.0, 40.0, 8001};
        const auto reference = synthetic(finer);
        for (std::size_t i = 0; i + 1 < g.nodes; i += 37) {
            const double mid = g.node(i) + 0.5 * g.spacing();
            for (Column c : {Column::current, Column::friction, Column::diffusion}) {
                const double fine = reference.interpolate(c, mid);
                CHECK(std::abs(table.interpolate(c, mid) - fine) <= 1e-6 * std::max(std::abs(fine), 1e-3));
            }
        }
    }
    SUBCASE("dynamics matches the full interpolation") {
        const auto d = table.dynamics(3.217);
        const auto p = table.interpolate(3.217);
        CHECK(d.excess_occupation == p.excess_occupation);
        CHECK(d.friction == p.friction);
        CHECK(d.diffusion == p.diffusion);
    }
    SUBCASE("out of range is an error naming the position") {
        CHECK_THROWS_AS((void)table.interpolate(40.0001), TableRangeError);
        try {
            (void)table.dynamics(-41.5);
            FAIL("expected TableRangeError");
        } catch (const TableRangeError& e) {
            CHECK(e.position() == -41.5);
            CHECK(std::string(e.what()).find("-41.5") != std::string::npos);
        }
        CHECK_THROWS_AS((void)table.interpolate(std::nan("")), TableRangeError);
    }
}

TEST_CASE("current maximum prefers the node nearest the origin") {
    const auto table = synthetic({-40.0, 40.0, 801});
    CHECK(table.current_maximum_position() == 0.0);
    GridSpec g{-3.0, 3.0, 7};
    std::vector<TransportPoint> pts(7);
    for (std::size_t i = 0; i < 7; ++i) {
        pts[i].position = g.node(i);
        pts[i].current = (i == 1 || i == 4) ? 2.0 : 1.0;
    }
    CHECK(CoefficientTable(g, pts, 0.0, "t").current_maximum_position() == 1.0);
}

TEST_CASE("non-finite columns are rejected") {
    const GridSpec g{-1.0, 1.0, 5};
    std::vector<TransportPoint> pts(5);
    pts[3].diffusion = std::nan("");
    CHECK_THROWS_WITH_AS(CoefficientTable(g, pts, 0.0, "t"), doctest::Contains("node 3"), NumericalError);
}

TEST_CASE("built table") {
    const SystemParams params = SystemParams::reference_device(100.0);
    const QuadratureSettings quad;
    const GridSpec coarse{-6.0, 6.0, 7};
    const auto table = build_coefficient_table(params, coarse, quad, 2);

    SUBCASE("columns match pointwise evaluation") {
        const double n0 = reference_occupation(params, quad);
        for (std::size_t i : {0u, 3u, 5u}) {
            const auto direct = transport_point(coarse.node(i), params, n0, quad);
            CHECK(table.points()[i].current == direct.current);
            CHECK(table.points()[i].friction == direct.friction);
            CHECK(table.points()[i].excess_occupation == direct.excess_occupation);
        }
    }
    SUBCASE("refined table interpolates back to the coarse nodes") {
        const auto fine = build_coefficient_table(params, {-6.0, 6.0, 13}, quad, 2);
        for (std::size_t i = 0; i < coarse.nodes; ++i) {
            const auto p = fine.interpolate(coarse.node(i));
            CHECK(p.current == table.points()[i].current);
            CHECK(p.diffusion == table.points()[i].diffusion);
        }
    }
    SUBCASE("thread count does not change the result") {
        const auto serial = build_coefficient_table(params, coarse, quad, 1);
        for (std::size_t i = 0; i < coarse.nodes; ++i) {
            CHECK(serial.points()[i].friction == table.points()[i].friction);
        }
    }
    SUBCASE("fingerprint tracks every input") {
        CHECK(table.fingerprint() == table_fingerprint(params, quad, coarse));
        SystemParams other = params;
        other.left.peak_rate = 11.0;
        CHECK(table_fingerprint(other, quad, coarse) != table.fingerprint());
        QuadratureSettings q2;
        q2.relative_tolerance = 1e-9;
        CHECK(table_fingerprint(params, q2, coarse) != table.fingerprint());
        CHECK(table_fingerprint(params, quad, {-6.0, 6.0, 9}) != table.fingerprint());
    }
    SUBCASE("save, load, and cache lookup") {
        const auto path = scratch("table.json");
        save_table(path, table, params, quad);
        const auto loaded = load_table(path);
        CHECK(loaded.fingerprint() == table.fingerprint());
        CHECK(loaded.reference_occupation() == table.reference_occupation());
        for (std::size_t i = 0; i < table.size(); ++i) {
            for (std::size_t c = 0; c < kColumnCount; ++c) {
                CHECK(loaded.column(static_cast<Column>(c))[i] == table.column(static_cast<Column>(c))[i]);
            }
        }
        CHECK(lookup_cached_table(path, table.fingerprint()).status == "hit");
        CHECK(lookup_cached_table(path, "0000").status == "stale fingerprint");
        CHECK(lookup_cached_table(scratch("absent.json"), "0000").status == "missing");

        // flip one digit of a stored value
        std::string text;
        {
            std::ifstream in(path);
            text.assign(std::istreambuf_iterator<char>(in), {});
        }
        const auto at = text.find("\"current\"");
        REQUIRE(at != std::string::npos);
        const auto digit = text.find_first_of("123456789", at + 12);
        text[digit] = text[digit] == '9' ? '8' : static_cast<char>(text[digit] + 1);
        {
            std::ofstream out(path, std::ios::trunc);
            out << text;
        }
        const auto lookup = lookup_cached_table(path, table.fingerprint());
        CHECK(!lookup.table);
        CHECK(lookup.status.rfind("corrupt", 0) == 0);
    }
}
