#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "gbdsde/clock.hpp"
#include "gbdsde/parallel.hpp"
#include "gbdsde/paths.hpp"

namespace gbdsde {

// Everything needed to regenerate one path of the ensemble on demand.
// Path p draws from streams derived from (seed, p), so generation is
// reproducible under any parallel schedule.
struct PathEnsemble {
    JumpMeasure measure;
    OrthoBasis basis;
    TimeGrid grid;
    ClockProfile clock_profile;
    std::uint64_t seed = 0;
    std::size_t paths = 0;

    struct PathData {
        LevyPath levy;
        BrownianPath brownian;
        TeugelsIncrements teugels;
    };

    PathData path(std::size_t index) const;
};

// Mean over paths of sum_{k: t_k <= t} dH^{(i)}_k dH^{(j)}_k, with its
// standard error. i, j are 1-based. Requires at least 100 paths.
MeanStdError empirical_bracket(const PathEnsemble& ensemble, std::size_t i,
                               std::size_t j, double t);

// Mean over paths of dH^{(i)}_k for one step k (martingale diagnostic).
MeanStdError increment_mean(const PathEnsemble& ensemble, std::size_t i,
                            std::size_t k);

// Mean over paths of the total jump count of one atom over [0, T].
MeanStdError jump_count_mean(const PathEnsemble& ensemble, std::size_t atom);

// One row per step per path: path, step, t, dB, marks, dH^(1..m), A.
// marks is the semicolon-joined list of jump sizes in the step.
void dump_csv(const PathEnsemble& ensemble, std::ostream& out);

// Same rows as JSON (marks and dH become arrays).
void dump_json(const PathEnsemble& ensemble, std::ostream& out);

}  // namespace gbdsde
