#include "gbdsde/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace gbdsde {

Mat cholesky_lower(const Mat& g) {
    const std::size_t n = g.n;
    Mat l(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = g(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (!(s > 0.0))
                    throw std::invalid_argument(
                        "cholesky_lower: matrix is not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

Mat invert_lower(const Mat& l) {
    const std::size_t n = l.n;
    Mat inv(n);
    for (std::size_t i = 0; i < n; ++i) {
        inv(i, i) = 1.0 / l(i, i);
        for (std::size_t j = 0; j < i; ++j) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s += l(i, k) * inv(k, j);
            inv(i, j) = -s / l(i, i);
        }
    }
    return inv;
}

static double norm1(const Mat& m) {
    double best = 0.0;
    for (std::size_t j = 0; j < m.n; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < m.n; ++i) col += std::abs(m(i, j));
        best = std::max(best, col);
    }
    return best;
}

Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.n);
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t k = 0; k < a.n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < a.n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

double condition_1norm(const Mat& g) {
    const Mat l = cholesky_lower(g);
    const Mat linv = invert_lower(l);
    // g^{-1} = linv^T linv
    Mat ginv(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j) {
            double s = 0.0;
            for (std::size_t k = std::max(i, j); k < g.n; ++k)
                s += linv(k, i) * linv(k, j);
            ginv(i, j) = s;
        }
    return norm1(g) * norm1(ginv);
}

}  // namespace gbdsde
