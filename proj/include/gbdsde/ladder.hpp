#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gbdsde/comparison.hpp"
#include "gbdsde/solver.hpp"

namespace gbdsde {

// Continuous (not necessarily Lipschitz) coefficients with declared linear
// growth; the approximation ladder evaluates them on the compact box
// [-box_radius, box_radius].
struct ContinuousDriver {
    DriverFnYZ f;
    DriverFnY h;
    DriverFnYZ g;                  // y-Lipschitz per (H2)(v); never convolved
    bool f_depends_on_z = false;   // f is K-Lipschitz in z when it does
    GrowthFn f_bound = [](double) { return 1.0; };
    GrowthFn g_bound = [](double) { return 1.0; };
    GrowthFn h_bound = [](double) { return 1.0; };
    double growth_k = 1.0;  // K
    double box_radius = 2.0;
};

// Symmetric uniform search grid {j * spacing : |j| <= ceil(radius/spacing)},
// always anchored at 0 so grids of shrinking radius nest.
struct SearchGrid {
    double radius = 2.0;
    double spacing = 2e-3;

    long half_points() const;
    std::size_t count() const { return 2 * static_cast<std::size_t>(half_points()) + 1; }
    double point(std::size_t j) const;
};

struct ConvolutionResult {
    double value = 0.0;
    double error_bound = 0.0;  // (n + K) * spacing per axis
};

// min over (product grid union {x}) of phi(y) + n |x - y|_1. The self
// candidate makes the result exact for n-Lipschitz phi. Throws when n < K.
ConvolutionResult inf_convolution(
    const std::function<double(std::span<const double>)>& phi, double n,
    double growth_k, std::span<const double> x, const SearchGrid& grid);

// max over (product grid union {x}) of phi(y) - n |x - y|_1.
ConvolutionResult sup_convolution(
    const std::function<double(std::span<const double>)>& phi, double n,
    double growth_k, std::span<const double> x, const SearchGrid& grid);

// One-dimensional fast path: prefix/suffix extrema over the same candidate
// set as the brute-force scan, so values agree exactly. O(grid) build,
// O(1) evaluation.
class LipschitzEnvelope {
public:
    enum class Direction { Inf, Sup };

    LipschitzEnvelope(std::function<double(double)> phi, double n,
                      const SearchGrid& grid, Direction direction);

    double operator()(double x) const;

private:
    std::function<double(double)> phi_;
    double n_;
    double origin_;
    double spacing_;
    Direction direction_;
    std::vector<double> prefix_;  // extreme of phi_j - n y_j over j <= idx
    std::vector<double> suffix_;  // extreme of phi_j + n y_j over j >= idx
};

enum class LadderDirection { Minimal, Maximal };

struct LadderOptions {
    double spacing = 0.0;         // 0 -> 1e-3 * box_radius
    double stop_tolerance = 0.0;  // 0 -> never stop early
    double order_abort = 1e-9;    // comparison-order violation threshold
    double monotone_tol = 1e-12;
    double norm_mu = 0.0;  // weights of the per-rung NormReport
    double norm_lambda = 0.0;
};

struct LadderRung {
    long n = 0;
    double y0 = 0.0;
    double root_gap = 0.0;       // |Y^n_0 - Y^{prev n}_0|
    double y_gap_l2 = 0.0;       // E int |Y^n - Y^prev|^2 (ds + dA)
    double z_gap_l2 = 0.0;       // E int ||Z^n - Z^prev||^2 ds
    double min_order_gap = 0.0;  // signed node-wise extreme vs previous rung
    bool monotone = true;
    double jump_min = 1.0;       // jump-condition min for the rung pair
    NormReport norm;
};

struct LadderResult {
    LadderDirection direction = LadderDirection::Minimal;
    std::vector<LadderRung> rungs;
    double apriori_bound = 0.0;  // computed once from the data
    bool converged = false;
    Solution last_solution;
};

// Thrown when a rung pair violates the comparison ordering beyond
// options.order_abort: it indicates a failed jump condition upstream.
struct LadderOrderViolation : std::runtime_error {
    long rung_n;
    std::size_t step;
    std::size_t state;
    double y_prev;
    double y_next;
    LadderOrderViolation(const std::string& what, long n, std::size_t k,
                         std::size_t s, double yp, double yn)
        : std::runtime_error(what), rung_n(n), step(k), state(s), y_prev(yp),
          y_next(yn) {}
};

// Lipschitz mode driver for one rung: f and h replaced by their
// inf-/sup-convolution approximants at the grid times.
DriverSpec make_rung_driver(const ContinuousDriver& driver,
                            const JumpLattice& lattice, long n,
                            LadderDirection direction, const SearchGrid& grid);

// Solves the rung equations on one fixed (lattice, Brownian path, clock,
// terminal) and records ordering, gaps and norms across the schedule.
// n_range must be increasing and >= ceil(K).
LadderResult run_ladder(const ContinuousDriver& driver, const JumpLattice& lattice,
                        const ClockA& clock, const BrownianPath& bpath,
                        const TerminalSpec& terminal,
                        const std::vector<long>& n_range,
                        LadderDirection direction, const LadderOptions& options);

struct CauchyDiagnostics {
    std::vector<double> y_gaps;
    std::vector<double> z_gaps;
    std::vector<double> ratios;  // z_gap / sqrt(y_gap), noise pairs skipped
    double fitted_c = 0.0;       // max ratio over the first half of the pairs
    bool shape_holds = false;    // remaining pairs satisfy the fitted bound
};

// Step-2 shape of the convergence proof: E int ||Z gap||^2 bounded by
// C' sqrt(E int |Y gap|^2 (ds + dA)) with one constant across rungs.
// Requires at least 3 rungs.
CauchyDiagnostics cauchy_diagnostics(const LadderResult& result);

// Per-rung search radius: the spec formula R + sup|phi|/(n - K) for n > K,
// with a bounded fallback at n = K.
double search_radius(double box_radius, double sup_abs_phi, double n, double k);

}  // namespace gbdsde
