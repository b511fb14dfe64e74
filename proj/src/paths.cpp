#include "gbdsde/paths.hpp"

#include <cmath>
#include <stdexcept>

#include "gbdsde/rng.hpp"

namespace gbdsde {

LevyPath simulate_levy(const JumpMeasure& measure, const TimeGrid& grid,
                       std::uint64_t seed) {
    measure.validate();
    grid.validate();
    const std::size_t m = measure.dimension();
    const double dt = grid.dt();

    LevyPath path;
    path.steps = grid.steps;
    path.atoms = m;
    path.sizes.reserve(m);
    for (const auto& atom : measure.atoms) path.sizes.push_back(atom.size);
    path.counts.assign(grid.steps * m, 0);
    path.values.assign(grid.steps + 1, 0.0);

    auto eng = make_stream(seed, 0);
    double level = 0.0;
    for (std::size_t k = 0; k < grid.steps; ++k) {
        for (std::size_t j = 0; j < m; ++j) {
            const unsigned n = poisson_draw(eng, measure.atoms[j].intensity * dt);
            path.count(k, j) = n;
            level += static_cast<double>(n) * measure.atoms[j].size;
        }
        path.values[k + 1] = level;
    }
    return path;
}

BrownianPath simulate_brownian(const TimeGrid& grid, std::uint64_t seed) {
    grid.validate();
    BrownianPath path;
    path.increments.resize(grid.steps);
    path.values.assign(grid.steps + 1, 0.0);
    const double sdt = std::sqrt(grid.dt());
    auto eng = make_stream(seed, 1);
    for (std::size_t k = 0; k < grid.steps; ++k) {
        path.increments[k] = sdt * normal_draw(eng);
        path.values[k + 1] = path.values[k] + path.increments[k];
    }
    return path;
}

TeugelsIncrements power_increments(const LevyPath& path,
                                   const PowerMomentTable& moments,
                                   const TimeGrid& grid, std::size_t dim) {
    if (dim < 1 || dim > moments.max_order())
        throw std::invalid_argument(
            "power_increments: moment table does not cover the requested order");
    if (path.steps != grid.steps)
        throw std::invalid_argument("power_increments: path/grid step mismatch");

    TeugelsIncrements incs;
    incs.steps = path.steps;
    incs.dim = dim;
    incs.raw.assign(path.steps * dim, 0.0);
    incs.ortho.assign(path.steps * dim, 0.0);

    const double dt = grid.dt();
    for (std::size_t k = 0; k < path.steps; ++k) {
        double* row = &incs.raw[k * dim];
        for (std::size_t i = 1; i <= dim; ++i)
            row[i - 1] = -dt * moments.moment(i);
        for (std::size_t j = 0; j < path.atoms; ++j) {
            const std::uint32_t n = path.count(k, j);
            if (n == 0) continue;
            double p = 1.0;
            for (std::size_t i = 0; i < dim; ++i) {
                p *= path.sizes[j];
                row[i] += static_cast<double>(n) * p;
            }
        }
    }
    return incs;
}

void teugels_increments(TeugelsIncrements& incs, const OrthoBasis& basis) {
    if (basis.dimension() != incs.dim)
        throw std::invalid_argument(
            "teugels_increments: basis dimension does not match increments");
    const std::size_t m = incs.dim;
    for (std::size_t k = 0; k < incs.steps; ++k) {
        const double* t = &incs.raw[k * m];
        double* h = &incs.ortho[k * m];
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += basis.coeffs(i, j) * t[j];
            h[i] = s;
        }
    }
}

}  // namespace gbdsde
