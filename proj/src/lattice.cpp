#include "gbdsde/lattice.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gbdsde {

namespace {

// count_leq[j][i] = number of j-vectors of nonnegative integers with sum <= i
// ( = C(i+j, j) ). Row 0 is all ones.
std::vector<std::vector<std::uint64_t>> build_count_table(std::size_t m,
                                                          std::size_t n) {
    constexpr std::uint64_t clamp = std::uint64_t{1} << 62;  // beyond any node cap
    std::vector<std::vector<std::uint64_t>> s(m + 2,
                                              std::vector<std::uint64_t>(n + 2, 0));
    for (std::size_t i = 0; i <= n + 1; ++i) s[0][i] = 1;
    for (std::size_t j = 1; j <= m + 1; ++j) {
        s[j][0] = 1;
        for (std::size_t i = 1; i <= n + 1; ++i)
            s[j][i] = std::min(clamp, s[j][i - 1] + s[j - 1][i]);
    }
    return s;
}

// Lexicographic rank of the count vector within the layer of cap `cap`.
// Uses the hockey-stick identity: sum_{v=0}^{c-1} S(j, q-v) = S(j+1, q) -
// S(j+1, q-c).
std::size_t rank_in_layer(const std::vector<std::uint32_t>& c, std::size_t cap,
                          const std::vector<std::vector<std::uint64_t>>& s) {
    const std::size_t m = c.size();
    std::uint64_t rank = 0;
    std::size_t used = 0;
    for (std::size_t d = 0; d < m; ++d) {
        const std::size_t q = cap - used;
        const std::size_t j = m - d - 1;
        rank += s[j + 1][q];
        if (q >= c[d])
            rank -= s[j + 1][q - c[d]];
        else
            throw std::logic_error("rank_in_layer: count exceeds cap");
        used += c[d];
    }
    return static_cast<std::size_t>(rank);
}

// Visits every count vector with sum <= cap in lexicographic order.
// Invariant: sum tracks the running total; when position d is examined the
// tail beyond d has already been cleared.
template <class Fn>
void for_each_state(std::size_t m, std::size_t cap, Fn&& fn) {
    std::vector<std::uint32_t> c(m, 0);
    std::size_t sum = 0;
    for (;;) {
        fn(c);
        std::size_t d = m;
        for (;;) {
            if (d == 0) return;
            --d;
            if (sum + 1 <= cap) break;
            sum -= c[d];
            c[d] = 0;
        }
        ++c[d];
        ++sum;
    }
}

}  // namespace

double JumpLattice::moment_residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            double s = 0.0;
            for (std::size_t b = 0; b < branches(); ++b)
                s += probs[b] * e(b, i) * e(b, j);
            const double target = (i == j) ? dt() : 0.0;
            worst = std::max(worst, std::abs(s - target));
        }
    for (std::size_t i = 0; i < dim; ++i) {
        double s = 0.0;
        for (std::size_t b = 0; b < branches(); ++b) s += probs[b] * e(b, i);
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

JumpLattice build_lattice(const JumpMeasure& measure, const OrthoBasis& basis,
                          const TimeGrid& grid, std::size_t max_nodes) {
    measure.validate();
    grid.validate();
    const std::size_t m = measure.dimension();
    if (basis.dimension() != m)
        throw std::invalid_argument("build_lattice: basis/measure dimension mismatch");
    if (m > 16)
        throw std::invalid_argument("build_lattice: at most 16 atoms supported");

    const double dt = grid.dt();
    const double total = measure.total_intensity();
    if (total * dt >= 1.0) {
        const std::size_t min_n =
            static_cast<std::size_t>(std::floor(total * grid.horizon)) + 1;
        std::ostringstream os;
        os << "build_lattice: sum(lambda) * dt = " << total * dt
           << " >= 1; refine the grid to at least N = " << min_n;
        throw std::invalid_argument(os.str());
    }

    JumpLattice lat;
    lat.measure = measure;
    lat.basis = basis;
    lat.grid = grid;
    lat.dim = m;

    lat.probs.resize(m + 1);
    lat.probs[0] = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
        lat.probs[k + 1] = measure.atoms[k].intensity * dt;
        lat.probs[0] -= lat.probs[k + 1];
    }

    // Raw branch increments dH(b) = sum_{j<=i} c_{i,j} (a_b^j 1{jump} - dt M_j).
    const auto moments = power_moments(measure, m);
    lat.raw_incr.assign((m + 1) * m, 0.0);
    for (std::size_t b = 0; b <= m; ++b) {
        std::vector<double> dT(m);
        for (std::size_t j = 1; j <= m; ++j) {
            double jump_power = 0.0;
            if (b >= 1) jump_power = std::pow(measure.atoms[b - 1].size,
                                              static_cast<double>(j));
            dT[j - 1] = jump_power - dt * moments.moment(j);
        }
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += basis.coeffs(i, j) * dT[j];
            lat.raw_incr[b * m + i] = s;
        }
    }

    // Re-orthonormalize under the branch probabilities so that
    // E[e_i] = 0 and E[e_i e_j] = delta_ij dt hold exactly.
    Mat cov(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t b = 0; b <= m; ++b)
                s += lat.probs[b] * lat.raw_incr[b * m + i] * lat.raw_incr[b * m + j];
            cov(i, j) = s;
        }
    const Mat l = cholesky_lower(cov);
    Mat linv = invert_lower(l);
    const double sdt = std::sqrt(dt);
    for (auto& v : linv.a) v *= sdt;
    lat.reorth = linv;
    lat.e_incr.assign((m + 1) * m, 0.0);
    for (std::size_t b = 0; b <= m; ++b)
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j)
                s += lat.reorth(i, j) * lat.raw_incr[b * m + j];
            lat.e_incr[b * m + i] = s;
        }

    // Layer offsets and the state-count guard.
    const auto table = build_count_table(m, grid.steps);
    lat.layer_offset.resize(grid.steps + 2);
    lat.layer_offset[0] = 0;
    for (std::size_t k = 0; k <= grid.steps; ++k) {
        const std::uint64_t sz = table[m][k];
        lat.layer_offset[k + 1] = lat.layer_offset[k] + static_cast<std::size_t>(sz);
        if (lat.layer_offset[k + 1] > max_nodes) {
            std::ostringstream os;
            os << "build_lattice: state count exceeds the cap of " << max_nodes
               << " nodes at layer " << k << "; reduce N or m";
            throw std::invalid_argument(os.str());
        }
    }

    // Child index tables, layer by layer.
    lat.child.assign(lat.layer_offset[grid.steps] * (m + 1), 0);
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const std::size_t base = lat.layer_offset[k];
        std::size_t state = 0;
        std::vector<std::uint32_t> bumped(m);
        for_each_state(m, k, [&](const std::vector<std::uint32_t>& c) {
            const std::size_t row = (base + state) * (m + 1);
            lat.child[row] =
                static_cast<std::uint32_t>(rank_in_layer(c, k + 1, table));
            for (std::size_t b = 1; b <= m; ++b) {
                bumped = c;
                ++bumped[b - 1];
                lat.child[row + b] =
                    static_cast<std::uint32_t>(rank_in_layer(bumped, k + 1, table));
            }
            ++state;
        });
    }

    // Forward-pushed state probabilities.
    lat.node_prob.assign(lat.total_nodes(), 0.0);
    lat.node_prob[0] = 1.0;
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const std::size_t base = lat.layer_offset[k];
        const std::size_t next = lat.layer_offset[k + 1];
        for (std::size_t s = 0; s < lat.layer_size(k); ++s) {
            const double p = lat.node_prob[base + s];
            if (p == 0.0) continue;
            for (std::size_t b = 0; b <= m; ++b)
                lat.node_prob[next + lat.child_of(k, s, b)] += p * lat.probs[b];
        }
    }

    // Terminal layer bookkeeping for xi evaluation.
    const std::size_t terminal = lat.layer_size(grid.steps);
    lat.terminal_levy.assign(terminal, 0.0);
    lat.terminal_counts.assign(terminal * m, 0);
    std::size_t state = 0;
    for_each_state(m, grid.steps, [&](const std::vector<std::uint32_t>& c) {
        double level = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            level += static_cast<double>(c[j]) * measure.atoms[j].size;
            lat.terminal_counts[state * m + j] = c[j];
        }
        lat.terminal_levy[state] = level;
        ++state;
    });

    return lat;
}

}  // namespace gbdsde
