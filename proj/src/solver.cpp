#include "gbdsde/solver.hpp"

#include <cmath>
#include <sstream>

#include "gbdsde/parallel.hpp"
#include "gbdsde/rng.hpp"

namespace gbdsde {

double spot_check_growth(const DriverSpec& driver, std::size_t dim,
                         double horizon, double box, std::size_t samples,
                         std::uint64_t seed) {
    auto eng = make_stream(seed, 77);
    std::vector<double> z(dim);
    double worst = -1e300;
    for (std::size_t s = 0; s < samples; ++s) {
        const double t = horizon * uniform01(eng);
        const double y = box * (2.0 * uniform01(eng) - 1.0);
        double znorm = 0.0;
        for (auto& zi : z) {
            zi = box * (2.0 * uniform01(eng) - 1.0);
            znorm += zi * zi;
        }
        znorm = std::sqrt(znorm);
        const double k = driver.lipschitz_k;
        worst = std::max(worst, std::abs(driver.f(t, y, z)) -
                                    (driver.f_bound(t) + k * (std::abs(y) + znorm)));
        worst = std::max(worst, std::abs(driver.g(t, y, z)) -
                                    (driver.g_bound(t) + k * (std::abs(y) + znorm)));
        worst = std::max(worst,
                         std::abs(driver.h(t, y)) -
                             (driver.h_bound(t) + k * std::abs(y)));
    }
    return worst;
}

double solve_node(const DriverSpec& driver, double expectation,
                  std::span<const double> z, double t, double dt, double dA,
                  double dB, double tol, std::size_t max_iter, std::size_t step,
                  std::size_t state) {
    const auto target = [&](double y) {
        return expectation + driver.f(t, y, z) * dt + driver.h(t, y) * dA +
               driver.g(t, y, z) * dB;
    };

    double y = expectation;
    double prev_delta = 0.0;
    int oscillations = 0;
    bool damped = false;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const double ty = target(y);
        if (!std::isfinite(ty)) {
            std::ostringstream os;
            os << "solve_node: driver returned a non-finite value at step " << step
               << ", node " << state;
            throw SolverError(os.str(), step, state, ty);
        }
        const double residual = ty - y;
        if (std::abs(residual) <= tol) return ty;
        if (residual * prev_delta < 0.0) {
            if (++oscillations >= 2) damped = true;
        } else {
            oscillations = 0;
        }
        prev_delta = residual;
        y = damped ? y + 0.5 * residual : ty;
    }
    std::ostringstream os;
    os << "solve_node: no convergence after " << max_iter << " iterations at step "
       << step << ", node " << state << " (residual " << std::abs(prev_delta)
       << ")";
    throw SolverError(os.str(), step, state, std::abs(prev_delta));
}

namespace {

void check_shapes(const JumpLattice& lattice, const BrownianPath& bpath,
                  const ClockA& clock) {
    if (bpath.increments.size() != lattice.steps())
        throw std::invalid_argument("solver: Brownian path does not match the grid");
    if (clock.values.size() != lattice.steps() + 1)
        throw std::invalid_argument("solver: clock does not match the grid");
}

void fill_terminal(const JumpLattice& lattice, const TerminalSpec& terminal,
                   const BrownianPath& bpath, const ClockA& clock,
                   std::vector<double>& y, std::size_t flat_base) {
    const std::size_t n_terminal = lattice.layer_size(lattice.steps());
    const std::size_t m = lattice.dim;
    parallel_for(n_terminal, [&](std::size_t s) {
        TerminalState ts;
        ts.levy = lattice.terminal_levy[s];
        ts.clock = clock.terminal();
        ts.brownian = bpath.values.back();
        ts.jump_counts = {&lattice.terminal_counts[s * m], m};
        const double v = terminal.xi(ts);
        if (!std::isfinite(v))
            throw SolverError("terminal value is not finite", lattice.steps(), s, v);
        y[flat_base + s] = v;
    });
}

}  // namespace

Solution solve_backward(const JumpLattice& lattice, const DriverSpec& driver,
                        const TerminalSpec& terminal, const BrownianPath& bpath,
                        const ClockA& clock) {
    check_shapes(lattice, bpath, clock);
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    const double dt = lattice.dt();

    Solution sol;
    sol.steps = n;
    sol.dim = m;
    sol.layer_offset = lattice.layer_offset;
    sol.y.assign(lattice.total_nodes(), 0.0);
    sol.z.assign(lattice.layer_offset[n] * m, 0.0);
    sol.bpath = bpath;
    sol.clock = clock;

    fill_terminal(lattice, terminal, bpath, clock, sol.y, lattice.layer_offset[n]);

    for (std::size_t k = n; k-- > 0;) {
        const std::size_t base = lattice.layer_offset[k];
        const std::size_t next = lattice.layer_offset[k + 1];
        const double t = lattice.grid.time(k);
        const double dA = clock.increment(k);
        const double dB = bpath.increments[k];
        parallel_for(lattice.layer_size(k), [&](std::size_t s) {
            double expectation = 0.0;
            double zproj[16];  // m is small by construction of the lattice cap
            for (std::size_t i = 0; i < m; ++i) zproj[i] = 0.0;
            for (std::size_t b = 0; b <= m; ++b) {
                const double ynext = sol.y[next + lattice.child_of(k, s, b)];
                const double pb = lattice.probs[b];
                expectation += pb * ynext;
                for (std::size_t i = 0; i < m; ++i)
                    zproj[i] += pb * ynext * lattice.e(b, i);
            }
            double* zrow = &sol.z[(base + s) * m];
            for (std::size_t i = 0; i < m; ++i) zrow[i] = zproj[i] / dt;
            sol.y[base + s] =
                solve_node(driver, expectation, {zrow, m}, t, dt, dA, dB,
                           kNodeTolerance, kNodeMaxIter, k, s);
        });
    }
    return sol;
}

namespace {

// E_m-style distance between two iterates on the lattice: max-node sup part
// plus the exact dA- and dt-weighted layer sums.
double em_distance(const JumpLattice& lattice, const ClockA& clock,
                   const Solution& a, const Solution& b) {
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    double sup = 0.0;
    for (std::size_t idx = 0; idx < a.y.size(); ++idx) {
        const double d = a.y[idx] - b.y[idx];
        sup = std::max(sup, d * d);
    }
    double a2 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t base = lattice.layer_offset[k];
        double ey = 0.0, ez = 0.0;
        for (std::size_t s = 0; s < lattice.layer_size(k); ++s) {
            const double p = lattice.node_prob[base + s];
            const double dy = a.y[base + s] - b.y[base + s];
            ey += p * dy * dy;
            for (std::size_t i = 0; i < m; ++i) {
                const double dz = a.z[(base + s) * m + i] - b.z[(base + s) * m + i];
                ez += p * dz * dz;
            }
        }
        a2 += ey * clock.increment(k);
        m2 += ez * lattice.dt();
    }
    return sup + a2 + m2;
}

}  // namespace

PicardResult picard_solve(const JumpLattice& lattice, const DriverSpec& driver,
                          const TerminalSpec& terminal, const BrownianPath& bpath,
                          const ClockA& clock, std::size_t max_iters, double tol) {
    if (!driver.lipschitz)
        throw std::invalid_argument("picard_solve: driver must be in Lipschitz mode");
    check_shapes(lattice, bpath, clock);
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    const double dt = lattice.dt();

    Solution prev;
    prev.steps = n;
    prev.dim = m;
    prev.layer_offset = lattice.layer_offset;
    prev.y.assign(lattice.total_nodes(), 0.0);
    prev.z.assign(lattice.layer_offset[n] * m, 0.0);
    prev.bpath = bpath;
    prev.clock = clock;

    PicardResult result;
    std::size_t growth_streak = 0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        Solution cur = prev;
        fill_terminal(lattice, terminal, bpath, clock, cur.y,
                      lattice.layer_offset[n]);
        for (std::size_t k = n; k-- > 0;) {
            const std::size_t base = lattice.layer_offset[k];
            const std::size_t next = lattice.layer_offset[k + 1];
            const double t = lattice.grid.time(k);
            const double dA = clock.increment(k);
            const double dB = bpath.increments[k];
            parallel_for(lattice.layer_size(k), [&](std::size_t s) {
                double expectation = 0.0;
                double zproj[16];
                for (std::size_t i = 0; i < m; ++i) zproj[i] = 0.0;
                for (std::size_t b = 0; b <= m; ++b) {
                    const double ynext = cur.y[next + lattice.child_of(k, s, b)];
                    const double pb = lattice.probs[b];
                    expectation += pb * ynext;
                    for (std::size_t i = 0; i < m; ++i)
                        zproj[i] += pb * ynext * lattice.e(b, i);
                }
                double* zrow = &cur.z[(base + s) * m];
                for (std::size_t i = 0; i < m; ++i) zrow[i] = zproj[i] / dt;
                // Freeze the previous iterate inside the coefficients.
                const double y_old = prev.y[base + s];
                const auto z_old = prev.z_at(k, s);
                cur.y[base + s] = expectation +
                                  driver.f(t, y_old, z_old) * dt +
                                  driver.h(t, y_old) * dA +
                                  driver.g(t, y_old, z_old) * dB;
            });
        }
        const double dist = em_distance(lattice, clock, cur, prev);
        result.distances.push_back(dist);
        result.iterations = it + 1;
        prev = std::move(cur);
        if (dist <= tol) break;
        if (result.distances.size() >= 2 &&
            dist > result.distances[result.distances.size() - 2]) {
            if (++growth_streak >= 3)
                throw std::runtime_error(
                    "picard_solve: distance grew for 3 consecutive iterations "
                    "(non-contraction)");
        } else {
            growth_streak = 0;
        }
    }
    result.solution = std::move(prev);
    return result;
}

NormReport norms(std::span<const Solution> solutions, const JumpLattice& lattice,
                 double mu, double lambda) {
    if (solutions.empty())
        throw std::invalid_argument("norms: ensemble must be nonempty");
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;

    std::vector<double> sup_each(solutions.size());
    std::vector<double> a2_each(solutions.size());
    std::vector<double> m2_each(solutions.size());

    parallel_for(solutions.size(), [&](std::size_t idx) {
        const Solution& sol = solutions[idx];
        const ClockA& clock = sol.clock;
        std::vector<double> upper(lattice.layer_size(n));
        const std::size_t terminal_base = lattice.layer_offset[n];
        const double w_n =
            std::exp(mu * lattice.grid.horizon + lambda * clock.terminal());
        for (std::size_t s = 0; s < upper.size(); ++s) {
            const double y = sol.y[terminal_base + s];
            upper[s] = w_n * y * y;
        }
        double a2 = 0.0, m2 = 0.0;
        for (std::size_t k = n; k-- > 0;) {
            const std::size_t base = lattice.layer_offset[k];
            const std::size_t sz = lattice.layer_size(k);
            const double w =
                std::exp(mu * lattice.grid.time(k) + lambda * clock.at(k));
            std::vector<double> next_upper(sz);
            double ey = 0.0, ez = 0.0;
            for (std::size_t s = 0; s < sz; ++s) {
                double expectation = 0.0;
                for (std::size_t b = 0; b <= m; ++b)
                    expectation += lattice.probs[b] * upper[lattice.child_of(k, s, b)];
                const double y = sol.y[base + s];
                next_upper[s] = std::max(w * y * y, expectation);
                const double p = lattice.node_prob[base + s];
                ey += p * y * y;
                double zz = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double z = sol.z[(base + s) * m + i];
                    zz += z * z;
                }
                ez += p * zz;
            }
            a2 += w * ey * clock.increment(k);
            m2 += w * ez * lattice.dt();
            upper = std::move(next_upper);
        }
        sup_each[idx] = upper[0];
        a2_each[idx] = a2;
        m2_each[idx] = m2;
    });

    NormReport report;
    report.mu = mu;
    report.lambda = lambda;
    const double count = static_cast<double>(solutions.size());
    report.sup_norm = pairwise_sum(sup_each) / count;
    report.a2_norm = pairwise_sum(a2_each) / count;
    report.m2_norm = pairwise_sum(m2_each) / count;
    report.em_norm = report.sup_norm + report.a2_norm + report.m2_norm;
    return report;
}

double terminal_weighted_square(const JumpLattice& lattice, const ClockA& clock,
                                const BrownianPath& bpath,
                                const TerminalSpec& terminal, double lambda) {
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    const std::size_t base = lattice.layer_offset[n];
    double acc = 0.0;
    for (std::size_t s = 0; s < lattice.layer_size(n); ++s) {
        TerminalState ts;
        ts.levy = lattice.terminal_levy[s];
        ts.clock = clock.terminal();
        ts.brownian = bpath.values.back();
        ts.jump_counts = {&lattice.terminal_counts[s * m], m};
        const double v = terminal.xi(ts);
        acc += lattice.node_prob[base + s] * std::exp(lambda * clock.terminal()) * v * v;
    }
    return acc;
}

}  // namespace gbdsde
