#include "gbdsde/io.hpp"

#include <cstdio>
#include <ostream>

namespace gbdsde {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void solution_to_csv(const Solution& solution, std::ostream& out) {
    out << "step,node,Y";
    for (std::size_t i = 1; i <= solution.dim; ++i) out << ",Z" << i;
    out << "\n";
    for (std::size_t k = 0; k <= solution.steps; ++k) {
        const std::size_t base = solution.layer_offset[k];
        const std::size_t size = solution.layer_offset[k + 1] - base;
        for (std::size_t s = 0; s < size; ++s) {
            out << k << ',' << s << ',' << format_double(solution.y[base + s]);
            for (std::size_t i = 0; i < solution.dim; ++i) {
                out << ',';
                if (k < solution.steps)
                    out << format_double(solution.z[(base + s) * solution.dim + i]);
                else
                    out << format_double(0.0);
            }
            out << '\n';
        }
    }
}

nlohmann::json solution_to_json(const Solution& solution) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k <= solution.steps; ++k) {
        const std::size_t base = solution.layer_offset[k];
        const std::size_t size = solution.layer_offset[k + 1] - base;
        for (std::size_t s = 0; s < size; ++s) {
            nlohmann::json z = nlohmann::json::array();
            for (std::size_t i = 0; i < solution.dim; ++i)
                z.push_back(k < solution.steps
                                ? solution.z[(base + s) * solution.dim + i]
                                : 0.0);
            rows.push_back({{"step", k},
                            {"node", s},
                            {"y", solution.y[base + s]},
                            {"z", z}});
        }
    }
    return rows;
}

nlohmann::json norm_report_to_json(const NormReport& report) {
    return {{"sup_norm", report.sup_norm}, {"m2_norm", report.m2_norm},
            {"a2_norm", report.a2_norm},   {"em_norm", report.em_norm},
            {"mu", report.mu},             {"lambda", report.lambda}};
}

nlohmann::json basis_report_to_json(const JumpMeasure& measure,
                                    const OrthoBasis& basis) {
    nlohmann::json coeffs = nlohmann::json::array();
    const std::size_t m = basis.dimension();
    for (std::size_t i = 0; i < m; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m; ++j) row.push_back(basis.coeffs(i, j));
        coeffs.push_back(row);
    }
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& atom : measure.atoms)
        atoms.push_back({{"size", atom.size}, {"intensity", atom.intensity}});
    return {{"atoms", atoms},
            {"coefficients", coeffs},
            {"measure_points", basis.points},
            {"measure_weights", basis.weights},
            {"orthonormality_residual", basis.orthonormality_residual()}};
}

void ladder_to_csv(const LadderResult& result, std::ostream& out) {
    out << "n,y0,root_gap,y_gap_l2,z_gap_l2,min_order_gap,monotone,jump_min,"
           "em_norm,norm_bound\n";
    for (const auto& rung : result.rungs) {
        out << rung.n << ',' << format_double(rung.y0) << ','
            << format_double(rung.root_gap) << ',' << format_double(rung.y_gap_l2)
            << ',' << format_double(rung.z_gap_l2) << ','
            << format_double(rung.min_order_gap) << ',' << (rung.monotone ? 1 : 0)
            << ',' << format_double(rung.jump_min) << ','
            << format_double(rung.norm.em_norm) << ','
            << format_double(result.apriori_bound) << '\n';
    }
}

nlohmann::json ladder_to_json(const LadderResult& result) {
    nlohmann::json rungs = nlohmann::json::array();
    for (const auto& rung : result.rungs) {
        rungs.push_back({{"n", rung.n},
                         {"y0", rung.y0},
                         {"root_gap", rung.root_gap},
                         {"y_gap_l2", rung.y_gap_l2},
                         {"z_gap_l2", rung.z_gap_l2},
                         {"min_order_gap", rung.min_order_gap},
                         {"monotone", rung.monotone},
                         {"jump_min", rung.jump_min},
                         {"norms", norm_report_to_json(rung.norm)}});
    }
    bool monotone = true;
    for (const auto& rung : result.rungs) monotone = monotone && rung.monotone;
    return {{"direction",
             result.direction == LadderDirection::Minimal ? "min" : "max"},
            {"rungs", rungs},
            {"apriori_bound", result.apriori_bound},
            {"monotone", monotone},
            {"converged", result.converged},
            {"y0_limit", result.rungs.empty() ? 0.0 : result.rungs.back().y0}};
}

nlohmann::json comparison_to_json(const ComparisonReport& report) {
    return {{"min_gap", report.min_gap},
            {"min_gap_step", report.min_gap_step},
            {"min_gap_node", report.min_gap_node},
            {"jump_condition_min", report.jump_condition_min},
            {"representation_residual", report.representation_residual},
            {"strict", report.strict},
            {"applicable", report.applicable}};
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace gbdsde
