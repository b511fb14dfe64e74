#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gbdsde {

using DriverFnYZ = std::function<double(double t, double y, std::span<const double> z)>;
using DriverFnY = std::function<double(double t, double y)>;
using GrowthFn = std::function<double(double t)>;

// The data (f, g, h) of the backward equation plus its declared constants.
// In Lipschitz mode the declared constants are what the Picard cross-check
// and the comparison machinery rely on; they are spot-checked, not proven.
struct DriverSpec {
    DriverFnYZ f;                 // f(t, y, z)
    DriverFnY h;                  // h(t, y)
    DriverFnYZ g;                 // g(t, y[, z]); z is ignored unless g_depends_on_z
    bool g_depends_on_z = false;  // only meaningful in Lipschitz mode

    GrowthFn f_bound = [](double) { return 1.0; };  // f_t >= 1
    GrowthFn g_bound = [](double) { return 1.0; };
    GrowthFn h_bound = [](double) { return 1.0; };

    double lipschitz_k = 0.0;   // K
    double z_contraction = 0.0; // alpha in (0,1), Lipschitz mode only
    bool lipschitz = false;

    // Monotonicity constants; recorded for diagnostics, beta2 < 0 is not
    // enforced.
    double beta1 = 0.0;
    double beta2 = -1.0;
};

// Worst violation of |f| <= f_t + K(|y| + ||z||) (and the g, h analogues)
// over `samples` random points with |t| <= horizon, |y|, |z_i| <= box.
// Nonpositive result means the declared growth held everywhere sampled.
double spot_check_growth(const DriverSpec& driver, std::size_t dim,
                         double horizon, double box, std::size_t samples,
                         std::uint64_t seed);

// Terminal data: xi as a function of the terminal lattice state.
struct TerminalState {
    double levy = 0.0;      // L_T
    double clock = 0.0;     // A_T
    double brownian = 0.0;  // B_T
    std::span<const std::uint32_t> jump_counts;  // per-atom totals
};

struct TerminalSpec {
    std::function<double(const TerminalState&)> xi;
};

}  // namespace gbdsde
