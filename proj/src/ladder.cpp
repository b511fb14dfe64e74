#include "gbdsde/ladder.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gbdsde/parallel.hpp"

namespace gbdsde {

long SearchGrid::half_points() const {
    if (!(spacing > 0.0) || !(radius > 0.0))
        throw std::invalid_argument("SearchGrid: radius and spacing must be > 0");
    return static_cast<long>(std::ceil(radius / spacing));
}

double SearchGrid::point(std::size_t j) const {
    return (static_cast<long>(j) - half_points()) * spacing;
}

namespace {

double abs1(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return s;
}

template <bool kInf>
ConvolutionResult convolve(const std::function<double(std::span<const double>)>& phi,
                           double n, double growth_k, std::span<const double> x,
                           const SearchGrid& grid) {
    if (n < growth_k)
        throw std::invalid_argument("convolution: n must be >= the growth constant");
    const std::size_t p = x.size();
    if (p == 0) throw std::invalid_argument("convolution: empty point");

    double best = phi(x);  // self candidate: exact on n-Lipschitz functions
    const std::size_t per_axis = grid.count();
    std::vector<std::size_t> idx(p, 0);
    std::vector<double> q(p);
    for (;;) {
        for (std::size_t d = 0; d < p; ++d) q[d] = grid.point(idx[d]);
        const double candidate =
            kInf ? phi(q) + n * abs1(x, q) : phi(q) - n * abs1(x, q);
        best = kInf ? std::min(best, candidate) : std::max(best, candidate);
        std::size_t d = p;
        for (;;) {
            if (d == 0) goto done;
            --d;
            if (++idx[d] < per_axis) break;
            idx[d] = 0;
        }
    }
done:
    return {best, (n + growth_k) * grid.spacing * static_cast<double>(p)};
}

}  // namespace

ConvolutionResult inf_convolution(
    const std::function<double(std::span<const double>)>& phi, double n,
    double growth_k, std::span<const double> x, const SearchGrid& grid) {
    return convolve<true>(phi, n, growth_k, x, grid);
}

ConvolutionResult sup_convolution(
    const std::function<double(std::span<const double>)>& phi, double n,
    double growth_k, std::span<const double> x, const SearchGrid& grid) {
    return convolve<false>(phi, n, growth_k, x, grid);
}

LipschitzEnvelope::LipschitzEnvelope(std::function<double(double)> phi, double n,
                                     const SearchGrid& grid, Direction direction)
    : phi_(std::move(phi)), n_(n), origin_(grid.point(0)), spacing_(grid.spacing),
      direction_(direction) {
    const std::size_t count = grid.count();
    prefix_.resize(count);
    suffix_.resize(count);
    // Inf:  value(x) = min over y_j <= x of phi_j + n(x - y_j)  ->  n x + min(phi_j - n y_j)
    //            and   min over y_j >  x of phi_j + n(y_j - x)  -> -n x + min(phi_j + n y_j)
    // Sup:  value(x) = max over y_j <= x of phi_j - n(x - y_j)  -> -n x + max(phi_j + n y_j)
    //            and   max over y_j >  x of phi_j - n(y_j - x)  ->  n x + max(phi_j - n y_j)
    const bool inf = direction_ == Direction::Inf;
    for (std::size_t j = 0; j < count; ++j) {
        const double y = grid.point(j);
        const double v = phi_(y);
        prefix_[j] = inf ? v - n_ * y : v + n_ * y;
        suffix_[j] = inf ? v + n_ * y : v - n_ * y;
    }
    for (std::size_t j = 1; j < count; ++j)
        prefix_[j] = inf ? std::min(prefix_[j - 1], prefix_[j])
                         : std::max(prefix_[j - 1], prefix_[j]);
    for (std::size_t j = count - 1; j-- > 0;)
        suffix_[j] = inf ? std::min(suffix_[j + 1], suffix_[j])
                         : std::max(suffix_[j + 1], suffix_[j]);
}

double LipschitzEnvelope::operator()(double x) const {
    const bool inf = direction_ == Direction::Inf;
    double best = phi_(x);
    const long count = static_cast<long>(prefix_.size());
    long idx = static_cast<long>(std::floor((x - origin_) / spacing_));
    if (idx >= count) idx = count - 1;
    if (inf) {
        if (idx >= 0) best = std::min(best, n_ * x + prefix_[idx]);
        if (idx + 1 < count) {
            const std::size_t j = idx < -1 ? 0 : static_cast<std::size_t>(idx + 1);
            best = std::min(best, -n_ * x + suffix_[j]);
        }
    } else {
        if (idx >= 0) best = std::max(best, -n_ * x + prefix_[idx]);
        if (idx + 1 < count) {
            const std::size_t j = idx < -1 ? 0 : static_cast<std::size_t>(idx + 1);
            best = std::max(best, n_ * x + suffix_[j]);
        }
    }
    return best;
}

double search_radius(double box_radius, double sup_abs_phi, double n, double k) {
    if (n > k) return box_radius + sup_abs_phi / (n - k);
    return box_radius + 2.0 * sup_abs_phi + 1.0;
}

namespace {

double estimate_sup_abs(const ContinuousDriver& driver, const JumpLattice& lattice,
                        bool for_f) {
    // Coarse deterministic scan over the box and a handful of grid times;
    // only the order of magnitude matters for the search radius.
    const double r = driver.box_radius;
    const std::size_t m = lattice.dim;
    std::vector<double> z(m, 0.0);
    double sup = 0.0;
    const std::size_t n = lattice.steps();
    for (std::size_t ti = 0; ti <= 8; ++ti) {
        const double t = lattice.grid.time((ti * n) / 8);
        for (int j = -32; j <= 32; ++j) {
            const double y = r * static_cast<double>(j) / 32.0;
            const double v = for_f ? driver.f(t, y, z) : driver.h(t, y);
            sup = std::max(sup, std::abs(v));
        }
    }
    return sup;
}

}  // namespace

DriverSpec make_rung_driver(const ContinuousDriver& driver,
                            const JumpLattice& lattice, long n,
                            LadderDirection direction, const SearchGrid& grid) {
    if (static_cast<double>(n) < driver.growth_k)
        throw std::invalid_argument("make_rung_driver: n must be >= K");
    const std::size_t steps = lattice.steps();
    const std::size_t m = lattice.dim;
    const double dt = lattice.dt();
    const auto dir = direction == LadderDirection::Minimal
                         ? LipschitzEnvelope::Direction::Inf
                         : LipschitzEnvelope::Direction::Sup;

    DriverSpec rung;
    rung.g = driver.g;
    rung.g_depends_on_z = false;
    rung.f_bound = driver.f_bound;
    rung.g_bound = driver.g_bound;
    rung.h_bound = driver.h_bound;
    rung.lipschitz = true;
    rung.lipschitz_k = static_cast<double>(n) + driver.growth_k;
    rung.beta2 = -1.0;

    // h is z-free: one envelope per grid time.
    auto h_envelopes = std::make_shared<std::vector<LipschitzEnvelope>>();
    h_envelopes->reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = lattice.grid.time(k);
        h_envelopes->emplace_back(
            [h = driver.h, t](double y) { return h(t, y); },
            static_cast<double>(n), grid, dir);
    }
    rung.h = [h_envelopes, dt, steps](double t, double y) {
        std::size_t k = static_cast<std::size_t>(std::llround(t / dt));
        if (k > steps) k = steps;
        return (*h_envelopes)[k](y);
    };

    if (!driver.f_depends_on_z) {
        auto f_envelopes = std::make_shared<std::vector<LipschitzEnvelope>>();
        f_envelopes->reserve(steps + 1);
        std::vector<double> zero(m, 0.0);
        for (std::size_t k = 0; k <= steps; ++k) {
            const double t = lattice.grid.time(k);
            f_envelopes->emplace_back(
                [f = driver.f, t, zero](double y) { return f(t, y, zero); },
                static_cast<double>(n), grid, dir);
        }
        rung.f = [f_envelopes, dt, steps](double t, double y,
                                          std::span<const double>) {
            std::size_t k = static_cast<std::size_t>(std::llround(t / dt));
            if (k > steps) k = steps;
            return (*f_envelopes)[k](y);
        };
    } else {
        // z enters f; the y-convolution is evaluated per call over the grid.
        const bool minimal = direction == LadderDirection::Minimal;
        rung.f = [f = driver.f, n, k = driver.growth_k, grid, minimal](
                     double t, double y, std::span<const double> z) {
            const auto slice = [&](std::span<const double> q) {
                return f(t, q[0], z);
            };
            const double nd = static_cast<double>(n);
            const std::span<const double> point{&y, 1};
            return minimal ? inf_convolution(slice, nd, k, point, grid).value
                           : sup_convolution(slice, nd, k, point, grid).value;
        };
    }
    return rung;
}

namespace {

// E int |dY|^2 (ds + dA) and E int ||dZ||^2 ds between two rungs, exact in
// the jump direction via the stored layer probabilities.
void gap_metrics(const JumpLattice& lattice, const ClockA& clock,
                 const Solution& a, const Solution& b, double& y_gap,
                 double& z_gap) {
    const std::size_t n = lattice.steps();
    const std::size_t m = lattice.dim;
    y_gap = 0.0;
    z_gap = 0.0;
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
        y_gap += ey * (lattice.dt() + clock.increment(k));
        z_gap += ez * lattice.dt();
    }
}

double apriori_bound(const ContinuousDriver& driver, const JumpLattice& lattice,
                     const ClockA& clock, const BrownianPath& bpath,
                     const TerminalSpec& terminal, double mu, double lambda) {
    // Gronwall-shaped constant from the data only: generous but computed
    // once and fixed across rungs.
    const double k = driver.growth_k;
    const double horizon = lattice.grid.horizon;
    const double a_total = clock.terminal();
    double data = terminal_weighted_square(lattice, clock, bpath, terminal, lambda);
    for (std::size_t step = 0; step < lattice.steps(); ++step) {
        const double t = lattice.grid.time(step);
        const double w = std::exp(mu * t + lambda * clock.at(step));
        const double fb = driver.f_bound(t);
        const double gb = driver.g_bound(t);
        const double hb = driver.h_bound(t);
        data += w * (fb * fb + gb * gb) * lattice.dt();
        data += w * hb * hb * clock.increment(step);
    }
    return 8.0 * std::exp(8.0 * (1.0 + k * k) * (horizon + a_total)) * data;
}

}  // namespace

LadderResult run_ladder(const ContinuousDriver& driver, const JumpLattice& lattice,
                        const ClockA& clock, const BrownianPath& bpath,
                        const TerminalSpec& terminal,
                        const std::vector<long>& n_range,
                        LadderDirection direction, const LadderOptions& options) {
    if (n_range.empty())
        throw std::invalid_argument("run_ladder: empty rung schedule");
    for (std::size_t i = 0; i < n_range.size(); ++i) {
        if (static_cast<double>(n_range[i]) < driver.growth_k)
            throw std::invalid_argument("run_ladder: every rung must be >= K");
        if (i > 0 && n_range[i] <= n_range[i - 1])
            throw std::invalid_argument("run_ladder: rungs must increase");
    }

    const double spacing =
        options.spacing > 0.0 ? options.spacing : 1e-3 * driver.box_radius;
    const double sup_f = estimate_sup_abs(driver, lattice, true);
    const double sup_h = estimate_sup_abs(driver, lattice, false);
    const double sup_abs = std::max(sup_f, sup_h);

    LadderResult result;
    result.direction = direction;
    result.apriori_bound = apriori_bound(driver, lattice, clock, bpath, terminal,
                                         options.norm_mu, options.norm_lambda);

    Solution previous;
    DriverSpec previous_driver;
    const bool minimal = direction == LadderDirection::Minimal;

    for (std::size_t r = 0; r < n_range.size(); ++r) {
        const long n = n_range[r];
        const SearchGrid grid{
            search_radius(driver.box_radius, sup_abs, static_cast<double>(n),
                          driver.growth_k),
            spacing};
        DriverSpec rung_driver =
            make_rung_driver(driver, lattice, n, direction, grid);
        Solution sol = solve_backward(lattice, rung_driver, terminal, bpath, clock);

        LadderRung rung;
        rung.n = n;
        rung.y0 = sol.y0();
        rung.norm = norms({&sol, 1}, lattice, options.norm_mu, options.norm_lambda);

        if (r > 0) {
            rung.root_gap = std::abs(sol.y0() - previous.y0());
            gap_metrics(lattice, clock, sol, previous, rung.y_gap_l2,
                        rung.z_gap_l2);
            // Node-wise ordering vs the previous rung. Minimal ladders must
            // not decrease; maximal ladders must not increase.
            double min_gap = 1e300;
            std::size_t bad_step = 0, bad_state = 0;
            double bad_prev = 0.0, bad_next = 0.0;
            for (std::size_t k = 0; k <= lattice.steps(); ++k) {
                const std::size_t base = lattice.layer_offset[k];
                for (std::size_t s = 0; s < lattice.layer_size(k); ++s) {
                    const double before = previous.y[base + s];
                    const double after = sol.y[base + s];
                    const double gap = minimal ? after - before : before - after;
                    if (gap < min_gap) {
                        min_gap = gap;
                        bad_step = k;
                        bad_state = s;
                        bad_prev = before;
                        bad_next = after;
                    }
                }
            }
            rung.min_order_gap = min_gap;
            rung.monotone = min_gap >= -options.monotone_tol;
            if (min_gap < -options.order_abort) {
                std::ostringstream os;
                os << "run_ladder: comparison order violated by " << -min_gap
                   << " at rung n=" << n << ", step " << bad_step << ", node "
                   << bad_state << " (previous " << bad_prev << ", current "
                   << bad_next
                   << "); this indicates a failed jump condition";
                throw LadderOrderViolation(os.str(), n, bad_step, bad_state,
                                           bad_prev, bad_next);
            }
            if (driver.f_depends_on_z) {
                const Solution& upper = minimal ? sol : previous;
                const Solution& lower = minimal ? previous : sol;
                const DriverSpec& upper_driver =
                    minimal ? rung_driver : previous_driver;
                const auto coeffs = difference_quotients(lattice, upper_driver,
                                                         upper_driver, upper, lower);
                rung.jump_min = check_jump_condition(coeffs, lattice).min_value;
            }
        }
        result.rungs.push_back(rung);
        previous = std::move(sol);
        previous_driver = std::move(rung_driver);

        if (options.stop_tolerance > 0.0 && r > 0 &&
            rung.root_gap < options.stop_tolerance) {
            result.converged = true;
            break;
        }
    }
    if (options.stop_tolerance <= 0.0 && result.rungs.size() >= 2)
        result.converged =
            result.rungs.back().root_gap < 1e-6;  // informational only
    result.last_solution = std::move(previous);
    return result;
}

CauchyDiagnostics cauchy_diagnostics(const LadderResult& result) {
    if (result.rungs.size() < 3)
        throw std::invalid_argument("cauchy_diagnostics: need at least 3 rungs");
    CauchyDiagnostics diag;
    for (std::size_t r = 1; r < result.rungs.size(); ++r) {
        diag.y_gaps.push_back(result.rungs[r].y_gap_l2);
        diag.z_gaps.push_back(result.rungs[r].z_gap_l2);
    }
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < diag.y_gaps.size(); ++i) {
        if (diag.y_gaps[i] < 1e-24 && diag.z_gaps[i] < 1e-24) {
            diag.ratios.push_back(0.0);  // noise-level pair, skipped in the fit
            continue;
        }
        diag.ratios.push_back(diag.z_gaps[i] / std::sqrt(diag.y_gaps[i]));
        live.push_back(i);
    }
    if (live.empty()) {
        diag.fitted_c = 0.0;
        diag.shape_holds = true;  // flat ladder: nothing to bound
        return diag;
    }
    const std::size_t half = (live.size() + 1) / 2;
    diag.fitted_c = 0.0;
    for (std::size_t i = 0; i < half; ++i)
        diag.fitted_c = std::max(diag.fitted_c, diag.ratios[live[i]]);
    diag.shape_holds = true;
    for (std::size_t i = half; i < live.size(); ++i) {
        const std::size_t idx = live[i];
        if (diag.z_gaps[idx] >
            diag.fitted_c * std::sqrt(diag.y_gaps[idx]) * (1.0 + 1e-9))
            diag.shape_holds = false;
    }
    return diag;
}

}  // namespace gbdsde

