#include "gbdsde/ensemble.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace gbdsde {

PathEnsemble::PathData PathEnsemble::path(std::size_t index) const {
    PathData data;
    // Two independent streams per path: jumps and Brownian.
    const std::uint64_t jump_seed = seed ^ (2 * index + 2);
    const std::uint64_t brownian_seed = seed ^ (2 * index + 3);
    data.levy = simulate_levy(measure, grid, jump_seed * 0x9E3779B97F4A7C15ULL + index);
    data.brownian = simulate_brownian(grid, brownian_seed * 0xD1B54A32D192ED03ULL + index);
    const auto moments = power_moments(measure, measure.dimension());
    data.teugels = power_increments(data.levy, moments, grid, measure.dimension());
    teugels_increments(data.teugels, basis);
    return data;
}

static void check_pair(const PathEnsemble& ensemble, std::size_t i, std::size_t j) {
    const std::size_t m = ensemble.measure.dimension();
    if (i < 1 || i > m || j < 1 || j > m)
        throw std::out_of_range("empirical_bracket: index out of range");
    if (ensemble.paths < 100)
        throw std::invalid_argument("empirical_bracket: need at least 100 paths");
}

MeanStdError empirical_bracket(const PathEnsemble& ensemble, std::size_t i,
                               std::size_t j, double t) {
    check_pair(ensemble, i, j);
    std::vector<double> per_path(ensemble.paths);
    parallel_for(ensemble.paths, [&](std::size_t p) {
        const auto data = ensemble.path(p);
        double s = 0.0;
        for (std::size_t k = 0; k < ensemble.grid.steps; ++k) {
            if (ensemble.grid.time(k) > t) break;
            s += data.teugels.dH(k, i - 1) * data.teugels.dH(k, j - 1);
        }
        per_path[p] = s;
    });
    return mean_std_error(per_path);
}

MeanStdError increment_mean(const PathEnsemble& ensemble, std::size_t i,
                            std::size_t k) {
    check_pair(ensemble, i, i);
    if (k >= ensemble.grid.steps)
        throw std::out_of_range("increment_mean: step out of range");
    std::vector<double> per_path(ensemble.paths);
    parallel_for(ensemble.paths, [&](std::size_t p) {
        per_path[p] = ensemble.path(p).teugels.dH(k, i - 1);
    });
    return mean_std_error(per_path);
}

MeanStdError jump_count_mean(const PathEnsemble& ensemble, std::size_t atom) {
    if (atom >= ensemble.measure.dimension())
        throw std::out_of_range("jump_count_mean: atom out of range");
    std::vector<double> per_path(ensemble.paths);
    parallel_for(ensemble.paths, [&](std::size_t p) {
        const auto data = ensemble.path(p);
        double n = 0.0;
        for (std::size_t k = 0; k < ensemble.grid.steps; ++k)
            n += data.levy.count(k, atom);
        per_path[p] = n;
    });
    return mean_std_error(per_path);
}

static void append_g17(std::string& line, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
}

void dump_csv(const PathEnsemble& ensemble, std::ostream& out) {
    const std::size_t m = ensemble.measure.dimension();
    const auto clock = clock_values(ensemble.clock_profile, ensemble.grid);
    out << "path,step,t,dB,marks";
    for (std::size_t i = 1; i <= m; ++i) out << ",dH" << i;
    out << ",A\n";
    std::string line;
    for (std::size_t p = 0; p < ensemble.paths; ++p) {
        const auto data = ensemble.path(p);
        for (std::size_t k = 0; k < ensemble.grid.steps; ++k) {
            line.clear();
            line += std::to_string(p);
            line += ',';
            line += std::to_string(k);
            line += ',';
            append_g17(line, ensemble.grid.time(k));
            line += ',';
            append_g17(line, data.brownian.increments[k]);
            line += ',';
            bool first = true;
            for (std::size_t j = 0; j < m; ++j)
                for (std::uint32_t c = 0; c < data.levy.count(k, j); ++c) {
                    if (!first) line += ';';
                    append_g17(line, ensemble.measure.atoms[j].size);
                    first = false;
                }
            for (std::size_t i = 0; i < m; ++i) {
                line += ',';
                append_g17(line, data.teugels.dH(k, i));
            }
            line += ',';
            append_g17(line, clock.at(k));
            line += '\n';
            out << line;
        }
    }
}

void dump_json(const PathEnsemble& ensemble, std::ostream& out) {
    const std::size_t m = ensemble.measure.dimension();
    const auto clock = clock_values(ensemble.clock_profile, ensemble.grid);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t p = 0; p < ensemble.paths; ++p) {
        const auto data = ensemble.path(p);
        for (std::size_t k = 0; k < ensemble.grid.steps; ++k) {
            nlohmann::json marks = nlohmann::json::array();
            for (std::size_t j = 0; j < m; ++j)
                for (std::uint32_t c = 0; c < data.levy.count(k, j); ++c)
                    marks.push_back(ensemble.measure.atoms[j].size);
            nlohmann::json dh = nlohmann::json::array();
            for (std::size_t i = 0; i < m; ++i) dh.push_back(data.teugels.dH(k, i));
            rows.push_back({{"path", p},
                            {"step", k},
                            {"t", ensemble.grid.time(k)},
                            {"dB", data.brownian.increments[k]},
                            {"marks", marks},
                            {"dH", dh},
                            {"A", clock.at(k)}});
        }
    }
    out << rows.dump(2) << "\n";
}

}  // namespace gbdsde
