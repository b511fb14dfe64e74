#pragma once

#include <cstddef>
#include <vector>

namespace gbdsde {

struct JumpAtom {
    double size = 0.0;       // a_k, nonzero
    double intensity = 0.0;  // lambda_k per unit time, > 0
};

// Pure-jump Levy measure with finitely many atoms. The model has no
// continuous part; everything downstream (Teugels basis, lattice, solver)
// assumes exactly these m jump sizes.
struct JumpMeasure {
    std::vector<JumpAtom> atoms;

    std::size_t dimension() const { return atoms.size(); }  // m
    double total_intensity() const;                         // sum of lambda_k

    // Throws std::invalid_argument naming the violated constraint:
    // m >= 1, sizes nonzero and pairwise distinct, intensities > 0.
    void validate() const;
};

// moments[i-1] = E[L_1^{(i)}] = sum_k lambda_k a_k^i, i = 1..max_order.
struct PowerMomentTable {
    std::vector<double> moments;

    double moment(std::size_t order) const { return moments.at(order - 1); }
    std::size_t max_order() const { return moments.size(); }
};

// Closed-form power moments of the jump part, no sampling.
PowerMomentTable power_moments(const JumpMeasure& measure, std::size_t max_order);

}  // namespace gbdsde
