#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbdsde/clock.hpp"
#include "gbdsde/driver.hpp"
#include "gbdsde/lattice.hpp"
#include "gbdsde/paths.hpp"

namespace gbdsde {

// (Y, Z) on the lattice, conditioned on one Brownian path. Layer-flat
// storage mirrors JumpLattice::layer_offset; z is only meaningful for
// layers 0..N-1.
struct Solution {
    std::size_t steps = 0;
    std::size_t dim = 0;
    std::vector<std::size_t> layer_offset;
    std::vector<double> y;  // per flat node
    std::vector<double> z;  // per flat node (layers < N) x dim
    BrownianPath bpath;
    ClockA clock;

    double y_at(std::size_t k, std::size_t state) const {
        return y[layer_offset[k] + state];
    }
    std::span<const double> z_at(std::size_t k, std::size_t state) const {
        return {&z[(layer_offset[k] + state) * dim], dim};
    }
    double y0() const { return y[0]; }
};

struct SolverError : std::runtime_error {
    std::size_t step;
    std::size_t state;
    double residual;
    SolverError(const std::string& what, std::size_t k, std::size_t s, double r)
        : std::runtime_error(what), step(k), state(s), residual(r) {}
};

// One implicit node update: solves
//   y = expectation + f(t, y, z) dt + h(t, y) dA + g(t, y[, z]) dB
// by fixed-point iteration to absolute tolerance `tol`, switching to 0.5
// damping if plain iteration oscillates. Throws SolverError after max_iter
// iterations and on NaN from the user driver.
double solve_node(const DriverSpec& driver, double expectation,
                  std::span<const double> z, double t, double dt, double dA,
                  double dB, double tol, std::size_t max_iter, std::size_t step,
                  std::size_t state);

inline constexpr double kNodeTolerance = 1e-12;
inline constexpr std::size_t kNodeMaxIter = 200;

// Backward recursion over the lattice:
//   Z_k^{(i)} = E[Y_{k+1} e^{(i)}] / dt,
//   Y_k from solve_node with the step's dB known at t_k.
// Node updates within a layer run in parallel.
Solution solve_backward(const JumpLattice& lattice, const DriverSpec& driver,
                        const TerminalSpec& terminal, const BrownianPath& bpath,
                        const ClockA& clock);

struct PicardResult {
    Solution solution;
    std::vector<double> distances;  // E_m distance between successive iterates
    std::size_t iterations = 0;
};

// Global Picard iteration freezing (Y, Z) of the previous iterate inside
// f, g, h. Requires driver.lipschitz; throws std::runtime_error when the
// distance grows three times in a row (non-contraction).
PicardResult picard_solve(const JumpLattice& lattice, const DriverSpec& driver,
                          const TerminalSpec& terminal, const BrownianPath& bpath,
                          const ClockA& clock, std::size_t max_iters, double tol);

struct NormReport {
    double sup_norm = 0.0;  // E[sup_t w_t |Y_t|^2] (backward-max surrogate)
    double m2_norm = 0.0;   // sum_i E int w |Z^(i)|^2 dt
    double a2_norm = 0.0;   // E int w |Y|^2 dA
    double em_norm = 0.0;   // sum of the three
    double mu = 0.0;        // weight exponents, w_t = exp(mu t + lambda A_t)
    double lambda = 0.0;
};

// Monte Carlo average over the solutions (one per Brownian path) of exact
// lattice inner expectations. The sup part uses the deterministic backward
// surrogate U_k = max(w_k Y_k^2, E[U_{k+1}]), exact for node-constant Y.
NormReport norms(std::span<const Solution> solutions, const JumpLattice& lattice,
                 double mu = 0.0, double lambda = 0.0);

// Exact E[exp(lambda A_T) |xi|^2] on the terminal layer.
double terminal_weighted_square(const JumpLattice& lattice, const ClockA& clock,
                                const BrownianPath& bpath,
                                const TerminalSpec& terminal, double lambda);

}  // namespace gbdsde
