#include "gbdsde/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gbdsde/io.hpp"

namespace gbdsde {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

double need_number(const nlohmann::json& j, const std::string& where,
                   const char* key) {
    if (!j.contains(key)) fail(where + "." + key, "missing");
    if (!j[key].is_number()) fail(where + "." + key, "must be a number");
    return j[key].get<double>();
}

double number_or(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return j[key].get<double>();
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg;

    if (!j.contains("measure") || !j["measure"].contains("atoms"))
        fail("measure.atoms", "missing");
    const auto& atoms = j["measure"]["atoms"];
    if (!atoms.is_array() || atoms.empty())
        fail("measure.atoms", "must be a nonempty array");
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const std::string where = "measure.atoms[" + std::to_string(k) + "]";
        JumpAtom atom;
        atom.size = need_number(atoms[k], where, "size");
        atom.intensity = need_number(atoms[k], where, "intensity");
        cfg.measure.atoms.push_back(atom);
    }
    try {
        cfg.measure.validate();
    } catch (const std::exception& e) {
        fail("measure", e.what());
    }

    if (j.contains("grid")) {
        const double horizon = need_number(j["grid"], "grid", "horizon");
        const double steps = need_number(j["grid"], "grid", "steps");
        if (!(horizon > 0.0)) fail("grid.horizon", "must be > 0");
        if (!(steps >= 1.0) || steps != std::floor(steps))
            fail("grid.steps", "must be a positive integer");
        cfg.grid = TimeGrid(horizon, static_cast<std::size_t>(steps));
    }

    if (j.contains("clock")) {
        const auto& c = j["clock"];
        const std::string profile = c.value("profile", "linear");
        if (profile == "linear") {
            cfg.clock.kind = ClockProfile::Kind::Linear;
            cfg.clock.kappa = number_or(c, "kappa", 1.0);
            if (cfg.clock.kappa < 0.0) fail("clock.kappa", "must be >= 0");
        } else if (profile == "power") {
            cfg.clock.kind = ClockProfile::Kind::Power;
            cfg.clock.exponent = number_or(c, "exponent", 1.0);
            if (cfg.clock.exponent < 1.0) fail("clock.exponent", "must be >= 1");
        } else if (profile == "table") {
            cfg.clock.kind = ClockProfile::Kind::Table;
            if (!c.contains("table") || !c["table"].is_array())
                fail("clock.table", "missing array");
            cfg.clock.table = c["table"].get<std::vector<double>>();
            if (cfg.clock.table.size() != cfg.grid.steps + 1)
                fail("clock.table", "must have grid.steps + 1 entries");
            if (cfg.clock.table.front() != 0.0)
                fail("clock.table", "must start at 0");
            for (std::size_t k = 0; k + 1 < cfg.clock.table.size(); ++k)
                if (cfg.clock.table[k + 1] < cfg.clock.table[k])
                    fail("clock.table",
                         "decreases at entry " + std::to_string(k + 1));
        } else {
            fail("clock.profile", "unknown profile '" + profile + "'");
        }
    }

    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("paths")) {
        const double p = j["paths"].get<double>();
        if (!(p >= 1.0)) fail("paths", "must be >= 1");
        cfg.paths = static_cast<std::size_t>(p);
    }
    if (j.contains("dump_paths"))
        cfg.dump_paths = j["dump_paths"].get<std::size_t>();
    if (j.contains("picard")) cfg.run_picard = j["picard"].get<bool>();
    if (j.contains("sweep")) {
        for (const auto& n : j["sweep"])
            cfg.solve_sweep.push_back(n.get<std::size_t>());
    }

    const auto read_driver = [&](const char* key) -> std::optional<DriverConfig> {
        if (!j.contains(key)) return std::nullopt;
        DriverConfig d;
        if (!j[key].contains("name")) fail(std::string(key) + ".name", "missing");
        d.name = j[key]["name"].get<std::string>();
        d.params = j[key];
        return d;
    };
    cfg.driver = read_driver("driver");
    cfg.driver2 = read_driver("driver2");

    const auto read_terminal =
        [&](const char* key) -> std::optional<TerminalConfig> {
        if (!j.contains(key)) return std::nullopt;
        TerminalConfig t;
        if (!j[key].contains("name")) fail(std::string(key) + ".name", "missing");
        t.name = j[key]["name"].get<std::string>();
        t.params = j[key];
        return t;
    };
    cfg.terminal = read_terminal("terminal");
    cfg.terminal2 = read_terminal("terminal2");

    if (j.contains("ladder")) {
        const auto& l = j["ladder"];
        LadderConfig lc;
        // Omitted n_values fall back to the geometric schedule
        // ceil(K) * {1, 2, 4, ...} chosen at run time.
        if (l.contains("n_values")) {
            if (!l["n_values"].is_array() || l["n_values"].empty())
                fail("ladder.n_values", "must be a nonempty array");
            for (const auto& n : l["n_values"])
                lc.n_values.push_back(n.get<long>());
            for (std::size_t i = 1; i < lc.n_values.size(); ++i)
                if (lc.n_values[i] <= lc.n_values[i - 1])
                    fail("ladder.n_values", "must be strictly increasing");
        }
        lc.direction = l.value("direction", "min");
        if (lc.direction != "min" && lc.direction != "max")
            fail("ladder.direction", "must be 'min' or 'max'");
        lc.spacing = number_or(l, "spacing", 0.0);
        lc.stop_tolerance = number_or(l, "stop_tolerance", 0.0);
        lc.box_radius = number_or(l, "box_radius", 2.0);
        if (!(lc.box_radius > 0.0)) fail("ladder.box_radius", "must be > 0");
        lc.norm_mu = number_or(l, "norm_mu", 0.0);
        lc.norm_lambda = number_or(l, "norm_lambda", 0.0);
        cfg.ladder = lc;
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& atom : measure.atoms)
        atoms.push_back({{"size", atom.size}, {"intensity", atom.intensity}});
    nlohmann::json j{{"measure", {{"atoms", atoms}}},
                     {"grid", {{"horizon", grid.horizon}, {"steps", grid.steps}}},
                     {"seed", seed},
                     {"paths", paths}};
    switch (clock.kind) {
        case ClockProfile::Kind::Linear:
            j["clock"] = {{"profile", "linear"}, {"kappa", clock.kappa}};
            break;
        case ClockProfile::Kind::Power:
            j["clock"] = {{"profile", "power"}, {"exponent", clock.exponent}};
            break;
        case ClockProfile::Kind::Table:
            j["clock"] = {{"profile", "table"}, {"table", clock.table}};
            break;
    }
    if (driver) j["driver"] = driver->params;
    if (driver2) j["driver2"] = driver2->params;
    if (terminal) j["terminal"] = terminal->params;
    if (terminal2) j["terminal2"] = terminal2->params;
    if (!solve_sweep.empty()) j["sweep"] = solve_sweep;
    if (run_picard) j["picard"] = true;
    if (dump_paths) j["dump_paths"] = dump_paths;
    if (ladder) {
        j["ladder"] = {{"n_values", ladder->n_values},
                       {"direction", ladder->direction},
                       {"spacing", ladder->spacing},
                       {"stop_tolerance", ladder->stop_tolerance},
                       {"box_radius", ladder->box_radius},
                       {"norm_mu", ladder->norm_mu},
                       {"norm_lambda", ladder->norm_lambda}};
    }
    return j;
}

std::uint64_t ExperimentConfig::canonical_hash() const {
    return fnv1a64(to_json().dump());
}

namespace {

// f = f0 + fy y + sum fz_i z_i ; g = g0 + gy y ; h = h0 + hy y
DriverSpec make_linear_driver(const nlohmann::json& p) {
    const double f0 = p.value("f0", 0.0), fy = p.value("fy", 0.0);
    const double g0 = p.value("g0", 0.0), gy = p.value("gy", 0.0);
    const double h0 = p.value("h0", 0.0), hy = p.value("hy", 0.0);
    std::vector<double> fz;
    if (p.contains("fz")) fz = p["fz"].get<std::vector<double>>();
    DriverSpec d;
    d.f = [f0, fy, fz](double, double y, std::span<const double> z) {
        double v = f0 + fy * y;
        for (std::size_t i = 0; i < fz.size() && i < z.size(); ++i)
            v += fz[i] * z[i];
        return v;
    };
    d.g = [g0, gy](double, double y, std::span<const double>) {
        return g0 + gy * y;
    };
    d.h = [h0, hy](double, double y) { return h0 + hy * y; };
    double k = std::max({std::abs(fy), std::abs(gy), std::abs(hy)});
    for (double c : fz) k = std::max(k, std::abs(c));
    d.lipschitz = true;
    d.lipschitz_k = k;
    d.z_contraction = 0.5;
    const double bound = 1.0 + std::abs(f0) + std::abs(g0) + std::abs(h0);
    d.f_bound = [bound](double) { return bound; };
    d.g_bound = [bound](double) { return bound; };
    d.h_bound = [bound](double) { return bound; };
    d.beta1 = fy;
    d.beta2 = hy < 0.0 ? hy : -1e-9;
    return d;
}

}  // namespace

DriverSpec make_driver(const DriverConfig& cfg) {
    if (cfg.name == "zero") {
        DriverSpec d;
        d.f = [](double, double, std::span<const double>) { return 0.0; };
        d.g = [](double, double, std::span<const double>) { return 0.0; };
        d.h = [](double, double) { return 0.0; };
        d.lipschitz = true;
        d.lipschitz_k = 0.0;
        d.z_contraction = 0.5;
        return d;
    }
    if (cfg.name == "linear") return make_linear_driver(cfg.params);
    throw ConfigError("driver.name: unknown Lipschitz driver '" + cfg.name +
                      "' (try: zero, linear)");
}

ContinuousDriver make_continuous_driver(const DriverConfig& cfg) {
    ContinuousDriver d;
    if (cfg.name == "sqrt_cap") {
        // f(y) = scale * sqrt(min(|y|, cap)); continuous, not Lipschitz at 0.
        const double scale = cfg.params.value("scale", 1.0);
        const double cap = cfg.params.value("cap", 1.0);
        d.f = [scale, cap](double, double y, std::span<const double>) {
            return scale * std::sqrt(std::min(std::abs(y), cap));
        };
        d.h = [](double, double) { return 0.0; };
        d.g = [](double, double, std::span<const double>) { return 0.0; };
        d.growth_k = cfg.params.value("growth_k", 1.0);
        const double fb = std::max(1.0, scale * std::sqrt(cap));
        d.f_bound = [fb](double) { return fb; };
        d.box_radius = cfg.params.value("box_radius", 2.0);
        return d;
    }
    if (cfg.name == "cos_bend") {
        // f(y) = amp cos(freq y) + slope |y|; kinked and oscillatory.
        const double amp = cfg.params.value("amp", 1.0);
        const double freq = cfg.params.value("freq", 3.0);
        const double slope = cfg.params.value("slope", 0.5);
        d.f = [amp, freq, slope](double, double y, std::span<const double>) {
            return amp * std::cos(freq * y) + slope * std::abs(y);
        };
        d.h = [](double, double) { return 0.0; };
        d.g = [](double, double, std::span<const double>) { return 0.0; };
        d.growth_k = std::max(1.0, std::abs(amp * freq) + std::abs(slope));
        const double fb = std::max(1.0, std::abs(amp));
        d.f_bound = [fb](double) { return fb; };
        d.box_radius = cfg.params.value("box_radius", 2.0);
        return d;
    }
    throw ConfigError("driver.name: unknown continuous driver '" + cfg.name +
                      "' (try: sqrt_cap, cos_bend)");
}

TerminalSpec make_terminal(const TerminalConfig& cfg) {
    TerminalSpec t;
    if (cfg.name == "constant") {
        const double value = cfg.params.value("value", 1.0);
        t.xi = [value](const TerminalState&) { return value; };
        return t;
    }
    if (cfg.name == "affine") {
        // c0 + c_levy L_T + c_brownian B_T + c_clock A_T
        const double c0 = cfg.params.value("c0", 0.0);
        const double cl = cfg.params.value("c_levy", 0.0);
        const double cb = cfg.params.value("c_brownian", 0.0);
        const double ca = cfg.params.value("c_clock", 0.0);
        t.xi = [c0, cl, cb, ca](const TerminalState& s) {
            return c0 + cl * s.levy + cb * s.brownian + ca * s.clock;
        };
        return t;
    }
    if (cfg.name == "call") {
        const double strike = cfg.params.value("strike", 0.0);
        t.xi = [strike](const TerminalState& s) {
            return std::max(s.levy - strike, 0.0);
        };
        return t;
    }
    throw ConfigError("terminal.name: unknown terminal '" + cfg.name +
                      "' (try: constant, affine, call)");
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& [file, hash] : outputs)
        outs.push_back({{"file", file}, {"fnv1a64", hash}});
    return {{"command", command},   {"config_hash", config_hash},
            {"seed", seed},         {"version", version},
            {"threads", threads},   {"wall_ms", wall_ms},
            {"exit_code", exit_code}, {"verdicts", verdicts},
            {"outputs", outs}};
}

}  // namespace gbdsde
