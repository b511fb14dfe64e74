#include "gbdsde/parallel.hpp"

#include <cmath>

namespace gbdsde {

double pairwise_sum(std::span<const double> x) {
    if (x.size() <= 32) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.subspan(0, half)) + pairwise_sum(x.subspan(half));
}

MeanStdError mean_std_error(std::span<const double> x) {
    MeanStdError out;
    out.n = x.size();
    if (x.empty()) return out;
    out.mean = pairwise_sum(x) / static_cast<double>(x.size());
    if (x.size() < 2) return out;
    double ss = 0.0;
    for (double v : x) {
        const double d = v - out.mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(x.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(x.size()));
    return out;
}

}  // namespace gbdsde
