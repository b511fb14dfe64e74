#pragma once

#include <cstddef>
#include <vector>

namespace gbdsde {

// Small dense square matrix, row-major. Everything in this project is m x m
// with m the number of jump atoms, so no attempt at scale.
struct Mat {
    std::size_t n = 0;
    std::vector<double> a;

    Mat() = default;
    explicit Mat(std::size_t size) : n(size), a(size * size, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// Throws std::invalid_argument if a pivot is not strictly positive.
Mat cholesky_lower(const Mat& g);

// Inverse of a lower-triangular matrix with nonzero diagonal.
Mat invert_lower(const Mat& l);

// 1-norm condition number estimate via the explicit inverse (fine at m <= 8).
double condition_1norm(const Mat& g);

Mat matmul(const Mat& a, const Mat& b);

}  // namespace gbdsde
