#pragma once

#include <cstddef>
#include <vector>

#include "gbdsde/time_grid.hpp"

namespace gbdsde {

// Deterministic continuous nondecreasing clock A with A_0 = 0. Three
// profiles: linear kappa*t, power t^p (p >= 1), user-supplied table.
struct ClockProfile {
    enum class Kind { Linear, Power, Table };
    Kind kind = Kind::Linear;
    double kappa = 1.0;          // Linear
    double exponent = 1.0;       // Power
    std::vector<double> table;   // Table: N+1 values at grid points
};

struct ClockA {
    std::vector<double> values;  // A_{t_k}, k = 0..N

    double at(std::size_t k) const { return values[k]; }
    double increment(std::size_t k) const { return values[k + 1] - values[k]; }
    double terminal() const { return values.back(); }
};

// Exact evaluation at grid points; rejects decreasing tables, nonzero A_0,
// kappa < 0 and exponents < 1.
ClockA clock_values(const ClockProfile& profile, const TimeGrid& grid);

}  // namespace gbdsde
