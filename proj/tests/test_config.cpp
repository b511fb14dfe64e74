#include <doctest.h>

#include "gbdsde/config.hpp"
#include "gbdsde/io.hpp"

using namespace gbdsde;

namespace {

nlohmann::json minimal_config() {
    return nlohmann::json::parse(R"({
      "measure": {"atoms": [{"size": 1.0, "intensity": 0.5},
                            {"size": -1.0, "intensity": 0.5}]},
      "grid": {"horizon": 1.0, "steps": 20},
      "seed": 7,
      "paths": 500
    })");
}

}  // namespace

TEST_CASE("config: minimal parse and defaults") {
    const auto cfg = parse_config(minimal_config());
    CHECK(cfg.measure.dimension() == 2);
    CHECK(cfg.grid.steps == 20);
    CHECK(cfg.seed == 7);
    CHECK(cfg.paths == 500);
    CHECK(cfg.clock.kind == ClockProfile::Kind::Linear);
}

TEST_CASE("config: violations are rejected with their location") {
    auto j = minimal_config();
    j.erase("measure");
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("measure.atoms"),
                         ConfigError);

    j = minimal_config();
    j["measure"]["atoms"][0]["intensity"] = 0.0;
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("intensity"),
                         ConfigError);

    j = minimal_config();
    j["grid"]["steps"] = 0;
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("grid.steps"),
                         ConfigError);

    j = minimal_config();
    j["clock"] = {{"profile", "table"}, {"table", {0.0, 0.5, 0.2}}};
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("clock.table"),
                         ConfigError);

    j = minimal_config();
    j["clock"] = {{"profile", "squiggle"}};
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("clock.profile"),
                         ConfigError);

    j = minimal_config();
    j["ladder"] = {{"n_values", {4, 2}}};
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("ladder.n_values"),
                         ConfigError);
}

TEST_CASE("config: canonical hash is stable across key order") {
    const auto a = parse_config(minimal_config());
    const auto reordered = nlohmann::json::parse(R"({
      "paths": 500,
      "seed": 7,
      "grid": {"steps": 20, "horizon": 1.0},
      "measure": {"atoms": [{"intensity": 0.5, "size": 1.0},
                            {"size": -1.0, "intensity": 0.5}]}
    })");
    const auto b = parse_config(reordered);
    CHECK(a.canonical_hash() == b.canonical_hash());
}

TEST_CASE("driver and terminal registries") {
    DriverConfig linear{"linear", nlohmann::json{{"name", "linear"},
                                                 {"fy", -1.0},
                                                 {"g0", 0.5}}};
    const auto d = make_driver(linear);
    CHECK(d.lipschitz);
    const std::vector<double> z{0.0};
    CHECK(d.f(0.0, 2.0, z) == doctest::Approx(-2.0));
    CHECK(d.g(0.0, 0.0, z) == doctest::Approx(0.5));

    CHECK_THROWS_AS(make_driver({"mystery", {}}), ConfigError);
    CHECK_THROWS_AS(make_continuous_driver({"mystery", {}}), ConfigError);

    const auto sqrt_driver = make_continuous_driver(
        {"sqrt_cap", nlohmann::json{{"name", "sqrt_cap"}}});
    CHECK(sqrt_driver.f(0.0, 0.25, z) == doctest::Approx(0.5));
    CHECK(sqrt_driver.f(0.0, 9.0, z) == doctest::Approx(1.0));  // capped

    const auto affine = make_terminal(
        {"affine", nlohmann::json{{"name", "affine"}, {"c0", 1.0},
                                  {"c_levy", 2.0}}});
    TerminalState state;
    state.levy = 3.0;
    CHECK(affine.xi(state) == doctest::Approx(7.0));

    const auto call = make_terminal(
        {"call", nlohmann::json{{"name", "call"}, {"strike", 1.0}}});
    state.levy = 0.5;
    CHECK(call.xi(state) == doctest::Approx(0.0));
    state.levy = 2.5;
    CHECK(call.xi(state) == doctest::Approx(1.5));
}

TEST_CASE("manifest serialization carries outputs and verdicts") {
    RunManifest manifest;
    manifest.command = "solve";
    manifest.config_hash = 123;
    manifest.seed = 9;
    manifest.version = kVersion;
    manifest.threads = 2;
    manifest.verdicts = {{"terminal_exact", true}};
    manifest.outputs.emplace_back("solution.csv", fnv1a64("payload"));
    const auto j = manifest.to_json();
    CHECK(j["command"] == "solve");
    CHECK(j["outputs"][0]["file"] == "solution.csv");
    CHECK(j["outputs"][0]["fnv1a64"] == fnv1a64("payload"));
    CHECK(j["verdicts"]["terminal_exact"] == true);
}

TEST_CASE("format_double round-trips through 17 significant digits") {
    for (double v : {1.0 / 3.0, 2.5e-17, -123456.789, 0.1}) {
        const double back = std::stod(format_double(v));
        CHECK(back == v);
    }
}
