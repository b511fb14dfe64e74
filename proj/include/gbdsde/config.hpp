#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "gbdsde/clock.hpp"
#include "gbdsde/driver.hpp"
#include "gbdsde/jump_measure.hpp"
#include "gbdsde/ladder.hpp"
#include "gbdsde/time_grid.hpp"

namespace gbdsde {

// Thrown by config parsing with the JSON location of the violated
// constraint in the message.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DriverConfig {
    std::string name;      // zero | linear | sqrt_cap | cos_bend
    nlohmann::json params;
};

struct TerminalConfig {
    std::string name;      // constant | affine | call
    nlohmann::json params;
};

struct LadderConfig {
    std::vector<long> n_values;
    std::string direction = "min";  // min | max
    double spacing = 0.0;
    double stop_tolerance = 0.0;
    double box_radius = 2.0;
    double norm_mu = 0.0;
    double norm_lambda = 0.0;
};

struct ExperimentConfig {
    JumpMeasure measure;
    TimeGrid grid{1.0, 40};
    ClockProfile clock;
    std::uint64_t seed = 1;
    std::size_t paths = 1000;
    std::optional<DriverConfig> driver;
    std::optional<DriverConfig> driver2;     // compare
    std::optional<TerminalConfig> terminal;
    std::optional<TerminalConfig> terminal2; // compare
    std::optional<LadderConfig> ladder;
    std::vector<std::size_t> solve_sweep;    // optional N sweep for solve
    bool run_picard = false;
    std::size_t dump_paths = 0;  // 0 -> all paths in simulate CSV

    std::uint64_t canonical_hash() const;  // hash of the re-serialized config
    nlohmann::json to_json() const;
};

// Parses and validates; every violated precondition is reported with the
// config path that caused it.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

// Built-in driver registry. Lipschitz built-ins return DriverSpec; the
// continuous (ladder) ones return ContinuousDriver.
DriverSpec make_driver(const DriverConfig& cfg);
ContinuousDriver make_continuous_driver(const DriverConfig& cfg);
TerminalSpec make_terminal(const TerminalConfig& cfg);

// Exit-code semantics shared by the CLI: 0 = asserted properties passed,
// 2 = properties inapplicable, 1 = violation or error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInapplicable = 2;

struct RunManifest {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string version;
    int threads = 0;
    double wall_ms = 0.0;
    int exit_code = 0;
    nlohmann::json verdicts;
    // file name -> fnv1a64 of the bytes
    std::vector<std::pair<std::string, std::uint64_t>> outputs;

    nlohmann::json to_json() const;
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gbdsde
