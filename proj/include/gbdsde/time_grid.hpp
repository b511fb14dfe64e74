#pragma once

#include <cstddef>
#include <stdexcept>

namespace gbdsde {

// Uniform grid t_k = k T / N on [0, T].
struct TimeGrid {
    double horizon = 1.0;   // T
    std::size_t steps = 1;  // N

    TimeGrid() = default;
    TimeGrid(double t, std::size_t n) : horizon(t), steps(n) { validate(); }

    void validate() const {
        if (!(horizon > 0.0))
            throw std::invalid_argument("TimeGrid: horizon must be > 0");
        if (steps < 1)
            throw std::invalid_argument("TimeGrid: steps must be >= 1");
    }

    double dt() const { return horizon / static_cast<double>(steps); }
    double time(std::size_t k) const {
        return horizon * static_cast<double>(k) / static_cast<double>(steps);
    }
};

}  // namespace gbdsde
