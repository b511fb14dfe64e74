#pragma once

#include <cstddef>
#include <vector>

#include "gbdsde/jump_measure.hpp"
#include "gbdsde/linalg.hpp"

namespace gbdsde {

// Orthonormal polynomial basis q_i(x) = c_{i,i} x^{i-1} + ... + c_{i,1}
// with respect to mu(dx) = x^2 nu(dx), i.e. weights w_k = a_k^2 lambda_k at
// the atom points. The rows of coeffs define the Teugels martingales
// H^{(i)} = sum_{j<=i} c_{i,j} T^{(j)}.
struct OrthoBasis {
    Mat coeffs;                        // lower triangular, positive diagonal
    std::vector<double> points;        // a_k
    std::vector<double> weights;       // w_k = a_k^2 lambda_k

    std::size_t dimension() const { return coeffs.n; }

    // q_i(x), i is 1-based (q_1 is the constant polynomial). Horner on the
    // degree-(i-1) coefficients. Throws std::out_of_range for bad i.
    double eval_q(std::size_t i, double x) const;

    // max_{i,j} |sum_k w_k q_i(a_k) q_j(a_k) - delta_ij|
    double orthonormality_residual() const;
};

// Moment matrix of mu: G[j][k] = sum_r w_r a_r^{j+k-2}, 1 <= j,k <= m.
// Symmetric positive definite for distinct nonzero atoms; throws
// std::runtime_error when the 1-norm condition estimate exceeds 1e12
// (atoms too close to coincident).
Mat gram_matrix(const JumpMeasure& measure);

// Inverse-transpose Cholesky of the Gram matrix, positive diagonal.
// Equivalent to Gram-Schmidt on 1, x, x^2, ...
OrthoBasis orthonormalize(const JumpMeasure& measure, const Mat& gram);

// Convenience: gram + orthonormalize.
OrthoBasis build_basis(const JumpMeasure& measure);

inline constexpr double kGramConditionLimit = 1e12;

}  // namespace gbdsde
