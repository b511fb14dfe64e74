#pragma once

#include <cstddef>
#include <exception>
#include <span>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gbdsde {

// Runs body(i) for i in [0, n). Uses OpenMP when available and n is large
// enough to pay for the fork; results must not depend on iteration order.
// The first exception thrown by any iteration is rethrown after the region
// (exceptions must not unwind out of an OpenMP block).
template <class F>
void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
    if (n >= 128) {
        std::exception_ptr error;
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(gbdsde_parallel_for_error)
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

// Order-independent reduction: the input is materialized, so the result is
// identical for any thread count. Recursive pairwise splitting keeps the
// rounding error O(log n).
double pairwise_sum(std::span<const double> x);

struct MeanStdError {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

// Sample mean and standard error of the mean (pairwise sums underneath).
MeanStdError mean_std_error(std::span<const double> x);

}  // namespace gbdsde
