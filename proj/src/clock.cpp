#include "gbdsde/clock.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gbdsde {

ClockA clock_values(const ClockProfile& profile, const TimeGrid& grid) {
    grid.validate();
    ClockA clock;
    clock.values.resize(grid.steps + 1);
    switch (profile.kind) {
        case ClockProfile::Kind::Linear:
            if (profile.kappa < 0.0)
                throw std::invalid_argument("clock_values: kappa must be >= 0");
            for (std::size_t k = 0; k <= grid.steps; ++k)
                clock.values[k] = profile.kappa * grid.time(k);
            break;
        case ClockProfile::Kind::Power:
            if (profile.exponent < 1.0)
                throw std::invalid_argument("clock_values: exponent must be >= 1");
            for (std::size_t k = 0; k <= grid.steps; ++k)
                clock.values[k] = std::pow(grid.time(k), profile.exponent);
            break;
        case ClockProfile::Kind::Table:
            if (profile.table.size() != grid.steps + 1)
                throw std::invalid_argument(
                    "clock_values: table must have steps+1 entries");
            if (profile.table.front() != 0.0)
                throw std::invalid_argument("clock_values: table must start at 0");
            for (std::size_t k = 0; k < grid.steps; ++k) {
                if (profile.table[k + 1] < profile.table[k]) {
                    std::ostringstream os;
                    os << "clock_values: table decreases between entries " << k
                       << " and " << k + 1;
                    throw std::invalid_argument(os.str());
                }
            }
            clock.values = profile.table;
            break;
    }
    return clock;
}

}  // namespace gbdsde
