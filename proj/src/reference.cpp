#include "gbdsde/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace gbdsde::ref {

Solution solve_backward_serial(const JumpLattice& lattice, const DriverSpec& driver,
                               const TerminalSpec& terminal,
                               const BrownianPath& bpath, const ClockA& clock) {
    if (bpath.increments.size() != lattice.steps() ||
        clock.values.size() != lattice.steps() + 1)
        throw std::invalid_argument("solve_backward_serial: shape mismatch");
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

    const std::size_t terminal_base = lattice.layer_offset[n];
    for (std::size_t s = 0; s < lattice.layer_size(n); ++s) {
        TerminalState ts;
        ts.levy = lattice.terminal_levy[s];
        ts.clock = clock.terminal();
        ts.brownian = bpath.values.back();
        ts.jump_counts = {&lattice.terminal_counts[s * m], m};
        sol.y[terminal_base + s] = terminal.xi(ts);
    }

    std::vector<double> zrow(m);
    for (std::size_t k = n; k-- > 0;) {
        const std::size_t base = lattice.layer_offset[k];
        const std::size_t next = lattice.layer_offset[k + 1];
        const double t = lattice.grid.time(k);
        const double dA = clock.increment(k);
        const double dB = bpath.increments[k];
        for (std::size_t s = 0; s < lattice.layer_size(k); ++s) {
            double expectation = 0.0;
            for (std::size_t i = 0; i < m; ++i) zrow[i] = 0.0;
            for (std::size_t b = 0; b <= m; ++b) {
                const double ynext = sol.y[next + lattice.child_of(k, s, b)];
                const double pb = lattice.probs[b];
                expectation += pb * ynext;
                for (std::size_t i = 0; i < m; ++i)
                    zrow[i] += pb * ynext * lattice.e(b, i);
            }
            for (std::size_t i = 0; i < m; ++i) {
                zrow[i] /= dt;
                sol.z[(base + s) * m + i] = zrow[i];
            }
            sol.y[base + s] = solve_node(driver, expectation, zrow, t, dt, dA, dB,
                                         kNodeTolerance, kNodeMaxIter, k, s);
        }
    }
    return sol;
}

MeanStdError empirical_bracket_serial(const PathEnsemble& ensemble, std::size_t i,
                                      std::size_t j, double t) {
    if (ensemble.paths < 100)
        throw std::invalid_argument(
            "empirical_bracket_serial: need at least 100 paths");
    std::vector<double> per_path(ensemble.paths);
    for (std::size_t p = 0; p < ensemble.paths; ++p) {
        const auto data = ensemble.path(p);
        double s = 0.0;
        for (std::size_t k = 0; k < ensemble.grid.steps; ++k) {
            if (ensemble.grid.time(k) > t) break;
            s += data.teugels.dH(k, i - 1) * data.teugels.dH(k, j - 1);
        }
        per_path[p] = s;
    }
    return mean_std_error(per_path);
}

}  // namespace gbdsde::ref
