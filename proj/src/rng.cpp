#include "gbdsde/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace gbdsde {

double normal_draw(std::mt19937_64& eng) {
    // Moro's inversion: Beasley-Springer rational fit in the center,
    // Chebyshev-fitted log expansion in the tails. |error| < 3e-9.
    static const double a[4] = {2.50662823884, -18.61500062529, 41.39119773534,
                                -25.44106049637};
    static const double b[4] = {-8.47351093090, 23.08336743743, -21.06224101826,
                                3.13082909833};
    static const double c[9] = {0.3374754822726147, 0.9761690190917186,
                                0.1607979714918209, 0.0276438810333863,
                                0.0038405729373609, 0.0003951896511919,
                                0.0000321767881768, 0.0000002888167364,
                                0.0000003960315187};
    const double u = uniform01(eng);
    const double y = u - 0.5;
    if (std::abs(y) < 0.42) {
        const double r = y * y;
        return y * (((a[3] * r + a[2]) * r + a[1]) * r + a[0]) /
               ((((b[3] * r + b[2]) * r + b[1]) * r + b[0]) * r + 1.0);
    }
    double r = (y > 0.0) ? 1.0 - u : u;
    r = std::log(-std::log(r));
    double x = c[0];
    double p = 1.0;
    for (int i = 1; i < 9; ++i) {
        p *= r;
        x += c[i] * p;
    }
    return (y > 0.0) ? x : -x;
}

unsigned poisson_draw(std::mt19937_64& eng, double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson_draw: mean < 0");
    if (mean == 0.0) return 0;
    // Sequential inversion: walk the CDF. Fine for the per-step means used
    // here (lambda * dt is well below 1 on any solvable grid).
    const double u = uniform01(eng);
    double p = std::exp(-mean);
    double cdf = p;
    unsigned k = 0;
    while (u > cdf && k < 10000000u) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

}  // namespace gbdsde
