#pragma once

#include <cstdint>
#include <vector>

#include "gbdsde/jump_measure.hpp"
#include "gbdsde/linalg.hpp"
#include "gbdsde/ortho_basis.hpp"
#include "gbdsde/time_grid.hpp"

namespace gbdsde {

// Discrete surrogate for the Teugels increments: per step, either no jump
// or exactly one jump of one atom size (branch alphabet of size m+1 with
// probabilities p_0 = 1 - sum lambda_k dt, p_k = lambda_k dt).
//
// Because every terminal functional the solver admits depends on the path
// only through the per-atom jump counts (and the fixed Brownian path), the
// tree recombines exactly: a node of layer k is a count vector with sum <= k,
// enumerated lexicographically. Conditional expectations over jumps are
// finite sums with the stored layer probabilities, so downstream identities
// hold to machine precision node-wise.
struct JumpLattice {
    JumpMeasure measure;
    OrthoBasis basis;
    TimeGrid grid;
    std::size_t dim = 0;  // m

    std::vector<double> probs;     // branch probabilities, size m+1
    std::vector<double> raw_incr;  // raw dH per branch, (m+1) x m branch-major
    std::vector<double> e_incr;    // re-orthonormalized increments, same layout
    Mat reorth;                    // e = reorth * raw; tends to identity as dt -> 0

    // Flat node storage: layer k occupies [layer_offset[k], layer_offset[k+1]).
    std::vector<std::size_t> layer_offset;  // size N+2
    // child[(layer_offset[k] + s) * (m+1) + b] = index of the branch-b child
    // within layer k+1, for k < N.
    std::vector<std::uint32_t> child;
    std::vector<double> node_prob;  // P(state) per flat node

    std::vector<double> terminal_levy;            // L_T per terminal state
    std::vector<std::uint32_t> terminal_counts;   // terminal states x m

    std::size_t steps() const { return grid.steps; }
    std::size_t branches() const { return dim + 1; }
    std::size_t layer_size(std::size_t k) const {
        return layer_offset[k + 1] - layer_offset[k];
    }
    std::size_t total_nodes() const { return layer_offset.back(); }
    double dt() const { return grid.dt(); }

    double e(std::size_t branch, std::size_t i) const {  // i 0-based
        return e_incr[branch * dim + i];
    }
    std::size_t child_of(std::size_t k, std::size_t state, std::size_t branch) const {
        return child[(layer_offset[k] + state) * branches() + branch];
    }
    double prob_of(std::size_t k, std::size_t state) const {
        return node_prob[layer_offset[k] + state];
    }

    // max_{i,j} |E[e_i e_j] - delta_ij dt| under the branch probabilities.
    double moment_residual() const;
};

// Throws std::invalid_argument when sum_k lambda_k dt >= 1 (message names the
// minimal N) or when the state count would exceed max_nodes.
JumpLattice build_lattice(const JumpMeasure& measure, const OrthoBasis& basis,
                          const TimeGrid& grid,
                          std::size_t max_nodes = (std::size_t{1} << 24));

}  // namespace gbdsde
