#include "doctest.h"

#include "nemclock/config.hpp"
#include "nemclock/errors.hpp"

#include <filesystem>
#include <fstream>

using namespace nemclock;
using nlohmann::json;

TEST_CASE("defaults are the reference device") {
    const ExperimentConfig c;
    CHECK(c.system.voltage() == 100.0);
    CHECK(c.system.coupling == 0.5);
    CHECK(c.system.inverse_temperature == 0.1);
    CHECK(c.system.left.bandwidth == 5.0);
    CHECK(c.system.left.peak_rate == 10.0);
    CHECK(c.system.left.band_center == -c.system.right.band_center);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("to_json round-trips every effective value") {
    ExperimentConfig c;
    c.sim.seed = 99;
    c.sim.ensemble_size = 3;
    c.analysis.kl_n = {2, 3};
    c.sweep_voltages = {5.0, 50.0};
    c.grid.x_max = 40.0;
    c.toymodel.telegraph.rates = {0.2, 0.4};
    const json j = c.to_json();
    const ExperimentConfig back = config_from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.sim.seed == 99);
    CHECK(back.grid.x_max.value() == 40.0);
}

TEST_CASE("voltage sets symmetric chemical potentials") {
    const json j = {{"schema_version", 1}, {"system", {{"voltage", 30.0}}}};
    const ExperimentConfig c = config_from_json(j);
    CHECK(c.system.left.chemical_potential == 15.0);
    CHECK(c.system.right.chemical_potential == -15.0);
}

TEST_CASE("strict reader rejects unknown keys, bad types and schema") {
    CHECK_THROWS_AS(config_from_json(json{{"system", json::object()}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"schema_version", 2}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"schema_version", 1}, {"sim", {{"seeed", 3}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"schema_version", 1}, {"colour", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"schema_version", 1}, {"sim", {{"seed", "one"}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"schema_version", 1}, {"sim", {{"ensemble_size", 0}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"schema_version", 1}, {"system", {{"inverse_temperature", -1.0}}}}),
                    ConfigError);
}

TEST_CASE("load_config accepts comments and reports parse errors") {
    const auto dir = std::filesystem::temp_directory_path() / "nemclock_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "ok.json");
        f << "{\n  // a comment\n  \"schema_version\": 1, \"sim\": {\"seed\": 5}\n}\n";
    }
    {
        std::ofstream f(dir / "bad.json");
        f << "{ \"schema_version\": 1, ";
    }
    CHECK(load_config(dir / "ok.json").sim.seed == 5);
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sim settings convert periods to times") {
    ExperimentConfig c;
    c.sim.steps_per_period = 100;
    c.sim.burn_in_periods = 10;
    c.sim.duration_periods = 20;
    const SimConfig s = c.sim.to_sim_config(c.system);
    CHECK(s.time_step == doctest::Approx(kTwoPi / 100.0));
    CHECK(s.burn_in_steps() == 1000);
    CHECK(s.total_steps() == 3000);
}
