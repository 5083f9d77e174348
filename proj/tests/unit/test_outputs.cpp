#include "doctest.h"

#include "nemclock/hashing.hpp"
#include "nemclock/outputs.hpp"
#include "nemclock/svg.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace nemclock;

TEST_CASE("csv keeps full precision") {
    const double third = 1.0 / 3.0;
    const std::string s = format_csv({{"a", {third, 2.0}}, {"b", {1e-300, -0.5}}});
    std::istringstream in(s);
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "a,b");
    std::getline(in, row);
    const auto comma = row.find(',');
    CHECK(std::stod(row.substr(0, comma)) == third);
    CHECK(std::stod(row.substr(comma + 1)) == 1e-300);
    std::getline(in, row);
    CHECK(row == "2,-0.5");
}

TEST_CASE("csv rejects ragged columns") {
    CHECK_THROWS_AS(format_csv({{"a", {1.0}}, {"b", {}}}), NumericalError);
}

TEST_CASE("output directory records digests of what it wrote") {
    const auto dir = std::filesystem::temp_directory_path() / "nemclock_outputs_test";
    std::filesystem::remove_all(dir);
    OutputDirectory out(dir);
    out.text("sub/a.txt", "hello");
    out.json("b.json", {{"k", 1}});
    REQUIRE(out.digests().size() == 2);
    CHECK(out.digests().at("sub/a.txt") == fingerprint_of("hello"));
    std::ifstream f(dir / "sub/a.txt");
    std::string content;
    std::getline(f, content);
    CHECK(content == "hello");
    std::filesystem::remove_all(dir);
}

TEST_CASE("voltage directories are compact") {
    CHECK(voltage_directory(100.0) == "V_100/");
    CHECK(voltage_directory(2.5) == "V_2.5/");
}

TEST_CASE("svg skips unusable points and is deterministic") {
    PlotSpec p{"t", "x", "y", true, true, {}};
    PlotSeries s;
    s.label = "a";
    s.x = {1.0, 10.0, 100.0, -1.0};
    s.y = {1.0, std::numeric_limits<double>::quiet_NaN(), 0.01, 5.0};
    p.series.push_back(s);
    const std::string a = render_svg(p);
    CHECK(a == render_svg(p));
    CHECK(a.find("<svg") == 0);
    CHECK(a.find("nan") == std::string::npos);
    // NaN breaks the polyline into two single-point pieces
    std::size_t lines = 0;
    for (auto pos = a.find("<polyline"); pos != std::string::npos; pos = a.find("<polyline", pos + 1)) {
        ++lines;
    }
    CHECK(lines == 2);
}
