#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gbdsde/comparison.hpp"
#include "gbdsde/ladder.hpp"
#include "gbdsde/solver.hpp"

namespace gbdsde {

// All floats are emitted with %.17g so that re-runs reproduce outputs
// byte-for-byte.
std::string format_double(double v);

void solution_to_csv(const Solution& solution, std::ostream& out);
nlohmann::json solution_to_json(const Solution& solution);

nlohmann::json norm_report_to_json(const NormReport& report);

nlohmann::json basis_report_to_json(const JumpMeasure& measure,
                                    const OrthoBasis& basis);

void ladder_to_csv(const LadderResult& result, std::ostream& out);
nlohmann::json ladder_to_json(const LadderResult& result);

nlohmann::json comparison_to_json(const ComparisonReport& report);

// FNV-1a, used for config and output-file fingerprints in run manifests.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace gbdsde
