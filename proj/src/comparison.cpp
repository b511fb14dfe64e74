#include "gbdsde/comparison.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gbdsde/parallel.hpp"
#include "gbdsde/rng.hpp"

namespace gbdsde {

LinearizedCoeffs difference_quotients(const JumpLattice& lattice,
                                      const DriverSpec& driver1,
                                      const DriverSpec& driver2,
                                      const Solution& sol1, const Solution& sol2) {
    (void)driver2;  // quotients are built from f1, h1 and the shared g
    if (sol1.layer_offset != lattice.layer_offset ||
        sol2.layer_offset != lattice.layer_offset)
        throw std::invalid_argument("difference_quotients: solutions off-lattice");
    if (sol1.bpath.values != sol2.bpath.values)
        throw std::invalid_argument(
            "difference_quotients: solutions condition on different Brownian paths");
    if (sol1.clock.values != sol2.clock.values)
        throw std::invalid_argument(
            "difference_quotients: solutions use different clocks");

    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    LinearizedCoeffs coeffs;
    coeffs.steps = n;
    coeffs.dim = m;
    coeffs.layer_offset = lattice.layer_offset;
    const std::size_t nodes = lattice.layer_offset[n];
    coeffs.a.assign(nodes, 0.0);
    coeffs.b.assign(nodes, 0.0);
    coeffs.c.assign(nodes, 0.0);
    coeffs.beta.assign(nodes * m, 0.0);

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t base = lattice.layer_offset[k];
        const double t = lattice.grid.time(k);
        parallel_for(lattice.layer_size(k), [&](std::size_t s) {
            const double y1 = sol1.y[base + s];
            const double y2 = sol2.y[base + s];
            const auto z1 = sol1.z_at(k, s);
            const auto z2 = sol2.z_at(k, s);
            const std::size_t idx = base + s;
            if (y1 != y2) {
                const double dy = y1 - y2;
                coeffs.a[idx] =
                    (driver1.f(t, y1, z1) - driver1.f(t, y2, z1)) / dy;
                coeffs.b[idx] = (driver1.h(t, y1) - driver1.h(t, y2)) / dy;
                coeffs.c[idx] =
                    (driver1.g(t, y1, z1) - driver1.g(t, y2, z1)) / dy;
            }
            // Interpolation chain: ztilde^{(i)} swaps the first i coordinates
            // of Z1 for Z2's; beta_i spans ztilde^{(i-1)} -> ztilde^{(i)}.
            std::vector<double> chain(z1.begin(), z1.end());
            double f_prev = driver1.f(t, y2, chain);
            for (std::size_t i = 0; i < m; ++i) {
                chain[i] = z2[i];
                const double f_next = driver1.f(t, y2, chain);
                const double dz = z1[i] - z2[i];
                if (dz != 0.0) coeffs.beta[idx * m + i] = (f_prev - f_next) / dz;
                f_prev = f_next;
            }
        });
    }
    return coeffs;
}

JumpConditionResult check_jump_condition(const LinearizedCoeffs& coeffs,
                                         const JumpLattice& lattice) {
    if (coeffs.layer_offset != lattice.layer_offset)
        throw std::invalid_argument("check_jump_condition: coefficients off-lattice");
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    double min_value = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t base = lattice.layer_offset[k];
        for (std::size_t s = 0; s < lattice.layer_size(k); ++s) {
            for (std::size_t b = 0; b <= m; ++b) {
                double lin = 1.0;
                for (std::size_t i = 0; i < m; ++i)
                    lin += coeffs.beta[(base + s) * m + i] * lattice.e(b, i);
                min_value = std::min(min_value, lin);
            }
        }
    }
    return {min_value > 0.0, min_value};
}

BranchPathSet make_branch_paths(const JumpLattice& lattice, std::size_t max_paths,
                                std::uint64_t seed) {
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    BranchPathSet set;
    set.steps = n;

    double exhaustive_count = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        exhaustive_count *= static_cast<double>(m + 1);
        if (exhaustive_count > static_cast<double>(max_paths)) break;
    }
    if (exhaustive_count <= static_cast<double>(max_paths)) {
        set.exhaustive = true;
        set.count = static_cast<std::size_t>(exhaustive_count);
        set.branches.assign(set.count * n, 0);
        for (std::size_t p = 0; p < set.count; ++p) {
            std::size_t code = p;
            for (std::size_t k = 0; k < n; ++k) {
                set.branches[p * n + k] = static_cast<std::uint8_t>(code % (m + 1));
                code /= (m + 1);
            }
        }
        return set;
    }

    set.exhaustive = false;
    set.count = max_paths;
    set.branches.assign(set.count * n, 0);
    parallel_for(set.count, [&](std::size_t p) {
        auto eng = make_stream(seed, p);
        for (std::size_t k = 0; k < n; ++k) {
            const double u = uniform01(eng);
            double acc = 0.0;
            std::uint8_t pick = static_cast<std::uint8_t>(m);
            for (std::size_t b = 0; b <= m; ++b) {
                acc += lattice.probs[b];
                if (u <= acc) {
                    pick = static_cast<std::uint8_t>(b);
                    break;
                }
            }
            set.branches[p * n + k] = pick;
        }
    });
    return set;
}

namespace {

struct StepTerms {
    double continuous_log;  // (a - c^2/2) dt + b dA + c dB
    double jump_linear;     // sum_i beta_i e_i(branch)
};

// Walks one branch path, handing the per-step terms of X to the visitor and
// tracking the recombined state underneath.
template <class Fn>
void walk_path(const LinearizedCoeffs& coeffs, const JumpLattice& lattice,
               const ClockA& clock, const BrownianPath& bpath,
               const BranchPathSet& paths, std::size_t p, Fn&& fn) {
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    const double dt = lattice.dt();
    std::size_t state = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t idx = lattice.layer_offset[k] + state;
        const std::uint8_t b = paths.branch(p, k);
        StepTerms terms;
        const double c = coeffs.c[idx];
        terms.continuous_log = (coeffs.a[idx] - 0.5 * c * c) * dt +
                               coeffs.b[idx] * clock.increment(k) +
                               c * bpath.increments[k];
        double lin = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            lin += coeffs.beta[idx * m + i] * lattice.e(b, i);
        terms.jump_linear = lin;
        fn(k, terms);
        state = lattice.child_of(k, state, b);
    }
}

}  // namespace

GammaPath doleans_exponential(const LinearizedCoeffs& coeffs,
                              const JumpLattice& lattice, const ClockA& clock,
                              const BrownianPath& bpath, std::size_t start,
                              const BranchPathSet& paths) {
    const std::size_t n = lattice.steps();
    if (start > n)
        throw std::invalid_argument("doleans_exponential: start beyond horizon");
    GammaPath gamma;
    gamma.start = start;
    gamma.steps = n;
    gamma.count = paths.count;
    const std::size_t width = n - start + 1;
    gamma.values.assign(paths.count * width, 1.0);

    std::vector<double> mins(paths.count, 1.0);
    parallel_for(paths.count, [&](std::size_t p) {
        double log_part = 0.0;   // all positive factors
        double jump_prod = 1.0;  // possibly negative (1 + sum beta e) factors
        double local_min = 1.0;
        walk_path(coeffs, lattice, clock, bpath, paths, p,
                  [&](std::size_t k, const StepTerms& terms) {
                      if (k < start) return;
                      log_part += terms.continuous_log - terms.jump_linear;
                      jump_prod *= 1.0 + terms.jump_linear;
                      const double value = std::exp(log_part) * jump_prod;
                      gamma.values[p * width + (k + 1 - start)] = value;
                      local_min = std::min(local_min, value);
                  });
        mins[p] = local_min;
    });
    gamma.min_value = 1.0;
    for (double v : mins) gamma.min_value = std::min(gamma.min_value, v);
    gamma.all_positive = gamma.min_value > 0.0;
    return gamma;
}

double gamma_recursion_check(const LinearizedCoeffs& coeffs,
                             const JumpLattice& lattice, const ClockA& clock,
                             const BrownianPath& bpath, std::size_t start,
                             const BranchPathSet& paths) {
    const GammaPath closed =
        doleans_exponential(coeffs, lattice, clock, bpath, start, paths);
    std::vector<double> worst(paths.count, 0.0);
    parallel_for(paths.count, [&](std::size_t p) {
        double gamma = 1.0;
        double local = 0.0;
        walk_path(coeffs, lattice, clock, bpath, paths, p,
                  [&](std::size_t k, const StepTerms& terms) {
                      if (k < start) return;
                      // dX matched to the closed form's per-step factor.
                      const double factor = std::exp(terms.continuous_log -
                                                     terms.jump_linear) *
                                            (1.0 + terms.jump_linear);
                      gamma *= factor;  // Gamma_{k+1} = Gamma_k (1 + dX_k)
                      local = std::max(local,
                                       std::abs(gamma - closed.at(p, k + 1)));
                  });
        worst[p] = local;
    });
    double max_residual = 0.0;
    for (double v : worst) max_residual = std::max(max_residual, v);
    return max_residual;
}

double representation_check(const JumpLattice& lattice, const DriverSpec& driver1,
                            const DriverSpec& driver2, const TerminalSpec& term1,
                            const TerminalSpec& term2, const Solution& sol1,
                            const Solution& sol2, const LinearizedCoeffs& coeffs) {
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    const double dt = lattice.dt();
    const ClockA& clock = sol1.clock;
    const BrownianPath& bpath = sol1.bpath;

    // Terminal layer: R_N = xibar.
    const std::size_t terminal_base = lattice.layer_offset[n];
    std::vector<double> rep(lattice.layer_size(n));
    double worst = 0.0;
    for (std::size_t s = 0; s < rep.size(); ++s) {
        TerminalState ts;
        ts.levy = lattice.terminal_levy[s];
        ts.clock = clock.terminal();
        ts.brownian = bpath.values.back();
        ts.jump_counts = {&lattice.terminal_counts[s * m], m};
        rep[s] = term1.xi(ts) - term2.xi(ts);
        const double ybar = sol1.y[terminal_base + s] - sol2.y[terminal_base + s];
        worst = std::max(worst, std::abs(ybar - rep[s]));
    }

    for (std::size_t k = n; k-- > 0;) {
        const std::size_t base = lattice.layer_offset[k];
        const std::size_t sz = lattice.layer_size(k);
        const double t = lattice.grid.time(k);
        const double dA = clock.increment(k);
        const double dB = bpath.increments[k];
        std::vector<double> next_rep(sz);
        std::vector<double> node_worst(sz, 0.0);
        parallel_for(sz, [&](std::size_t s) {
            const std::size_t idx = base + s;
            const double y2 = sol2.y[base + s];
            const auto z2 = sol2.z_at(k, s);
            const double fbar = driver1.f(t, y2, z2) - driver2.f(t, y2, z2);
            const double hbar = driver1.h(t, y2) - driver2.h(t, y2);
            double expectation = 0.0;
            for (std::size_t b = 0; b <= m; ++b) {
                double lin = 1.0;
                for (std::size_t i = 0; i < m; ++i)
                    lin += coeffs.beta[idx * m + i] * lattice.e(b, i);
                expectation +=
                    lattice.probs[b] * lin * rep[lattice.child_of(k, s, b)];
            }
            const double denom =
                1.0 - coeffs.a[idx] * dt - coeffs.b[idx] * dA - coeffs.c[idx] * dB;
            next_rep[s] = (expectation + fbar * dt + hbar * dA) / denom;
            const double ybar = sol1.y[idx] - sol2.y[idx];
            node_worst[s] = std::abs(ybar - next_rep[s]);
        });
        for (double v : node_worst) worst = std::max(worst, v);
        rep = std::move(next_rep);
    }
    return worst;
}

ComparisonReport compare(const JumpLattice& lattice, const DriverSpec& driver1,
                         const DriverSpec& driver2, const TerminalSpec& term1,
                         const TerminalSpec& term2, const Solution& sol1,
                         const Solution& sol2, const OrderedData& certificates) {
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    const ClockA& clock = sol1.clock;
    const BrownianPath& bpath = sol1.bpath;

    // Spot-check the certificates on lattice points.
    for (std::size_t s = 0; s < lattice.layer_size(n); ++s) {
        TerminalState ts;
        ts.levy = lattice.terminal_levy[s];
        ts.clock = clock.terminal();
        ts.brownian = bpath.values.back();
        ts.jump_counts = {&lattice.terminal_counts[s * m], m};
        const double x1 = term1.xi(ts), x2 = term2.xi(ts);
        if (x1 < x2) {
            std::ostringstream os;
            os << "compare: xi certificate violated at terminal node " << s << " ("
               << x1 << " < " << x2 << ")";
            throw std::invalid_argument(os.str());
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t base = lattice.layer_offset[k];
        const double t = lattice.grid.time(k);
        for (std::size_t s = 0; s < lattice.layer_size(k); ++s) {
            const double y2 = sol2.y[base + s];
            const auto z2 = sol2.z_at(k, s);
            if (driver1.f(t, y2, z2) < driver2.f(t, y2, z2))
                throw std::invalid_argument(
                    "compare: f certificate violated on a lattice point");
            if (driver1.h(t, y2) < driver2.h(t, y2))
                throw std::invalid_argument(
                    "compare: h certificate violated on a lattice point");
        }
    }

    const auto coeffs =
        difference_quotients(lattice, driver1, driver2, sol1, sol2);
    const auto jump = check_jump_condition(coeffs, lattice);

    ComparisonReport report;
    report.jump_condition_min = jump.min_value;
    report.applicable = jump.holds;
    double min_gap = 1e300;
    for (std::size_t k = 0; k <= n; ++k) {
        const std::size_t base = lattice.layer_offset[k];
        for (std::size_t s = 0; s < lattice.layer_size(k); ++s) {
            const double gap = sol1.y[base + s] - sol2.y[base + s];
            if (gap < min_gap) {
                min_gap = gap;
                report.min_gap_step = k;
                report.min_gap_node = s;
            }
        }
    }
    report.min_gap = min_gap;
    // Strict ordering holds at t < T for a strict f or h gap; the terminal
    // layer participates only when xi itself is strict.
    const bool any_strict =
        certificates.xi_strict || certificates.f_strict || certificates.h_strict;
    double strict_gap = 1e300;
    const std::size_t strict_end =
        certificates.xi_strict ? sol1.y.size() : lattice.layer_offset[n];
    for (std::size_t idx = 0; idx < strict_end; ++idx)
        strict_gap = std::min(strict_gap, sol1.y[idx] - sol2.y[idx]);
    report.strict = any_strict && report.applicable && strict_gap > 0.0;
    report.representation_residual = representation_check(
        lattice, driver1, driver2, term1, term2, sol1, sol2, coeffs);
    return report;
}

}  // namespace gbdsde
