#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gbdsde/jump_measure.hpp"
#include "gbdsde/ortho_basis.hpp"
#include "gbdsde/time_grid.hpp"

namespace gbdsde {

// One realization of the jump part on the grid. Jumps are stored as
// per-step, per-atom counts (within-step ordering never matters for any
// quantity computed here), so a mark of size a_j occurs counts[k][j] times
// in step k.
struct LevyPath {
    std::size_t steps = 0;
    std::size_t atoms = 0;
    std::vector<double> sizes;          // a_j, copied from the measure
    std::vector<std::uint32_t> counts;  // steps x atoms, row-major
    std::vector<double> values;         // L_{t_k}, k = 0..N

    std::uint32_t count(std::size_t step, std::size_t atom) const {
        return counts[step * atoms + atom];
    }
    std::uint32_t& count(std::size_t step, std::size_t atom) {
        return counts[step * atoms + atom];
    }
};

struct BrownianPath {
    std::vector<double> increments;  // dB_k, k = 0..N-1
    std::vector<double> values;      // B_{t_k}, k = 0..N
};

// Compensated power-jump increments dT^{(i)} and their orthonormalized
// combinations dH^{(i)} = sum_{j<=i} c_{i,j} dT^{(j)}, i = 1..m.
struct TeugelsIncrements {
    std::size_t steps = 0;
    std::size_t dim = 0;  // m
    std::vector<double> raw;      // dT, steps x m
    std::vector<double> ortho;    // dH, steps x m

    double dT(std::size_t step, std::size_t i) const {  // i is 0-based here
        return raw[step * dim + i];
    }
    double dH(std::size_t step, std::size_t i) const {
        return ortho[step * dim + i];
    }
};

// Per step, atom k contributes Poisson(lambda_k dt) jumps of size a_k.
// Deterministic given the seed.
LevyPath simulate_levy(const JumpMeasure& measure, const TimeGrid& grid,
                       std::uint64_t seed);

BrownianPath simulate_brownian(const TimeGrid& grid, std::uint64_t seed);

// dT^{(i)}_k = sum_{marks in step k} mark^i - dt * E[L_1^{(i)}].
// Fills only the raw field; moments must cover orders 1..dim.
TeugelsIncrements power_increments(const LevyPath& path,
                                   const PowerMomentTable& moments,
                                   const TimeGrid& grid, std::size_t dim);

// Applies the basis rows to the raw increments (fills ortho in place).
// Throws on dimension mismatch.
void teugels_increments(TeugelsIncrements& incs, const OrthoBasis& basis);

}  // namespace gbdsde
