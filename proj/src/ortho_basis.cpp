#include "gbdsde/ortho_basis.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gbdsde {

double JumpMeasure::total_intensity() const {
    double s = 0.0;
    for (const auto& atom : atoms) s += atom.intensity;
    return s;
}

void JumpMeasure::validate() const {
    if (atoms.empty())
        throw std::invalid_argument("JumpMeasure: needs at least one atom");
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (atoms[k].size == 0.0) {
            std::ostringstream os;
            os << "JumpMeasure: atoms[" << k << "].size must be nonzero";
            throw std::invalid_argument(os.str());
        }
        if (!(atoms[k].intensity > 0.0)) {
            std::ostringstream os;
            os << "JumpMeasure: atoms[" << k << "].intensity must be > 0";
            throw std::invalid_argument(os.str());
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (atoms[j].size == atoms[k].size) {
                std::ostringstream os;
                os << "JumpMeasure: atoms[" << j << "] and atoms[" << k
                   << "] have the same size " << atoms[k].size;
                throw std::invalid_argument(os.str());
            }
        }
    }
}

PowerMomentTable power_moments(const JumpMeasure& measure, std::size_t max_order) {
    measure.validate();
    if (max_order < 1)
        throw std::invalid_argument("power_moments: max_order must be >= 1");
    PowerMomentTable table;
    table.moments.resize(max_order, 0.0);
    for (const auto& atom : measure.atoms) {
        double p = 1.0;
        for (std::size_t i = 0; i < max_order; ++i) {
            p *= atom.size;
            table.moments[i] += atom.intensity * p;
        }
    }
    return table;
}

Mat gram_matrix(const JumpMeasure& measure) {
    measure.validate();
    const std::size_t m = measure.dimension();
    Mat g(m);
    for (const auto& atom : measure.atoms) {
        const double w = atom.size * atom.size * atom.intensity;
        double row_power = w;  // w * a^{2i} at row i
        for (std::size_t i = 0; i < m; ++i) {
            double term = row_power;  // w * a^{i+j} along the row
            for (std::size_t j = i; j < m; ++j) {
                g(i, j) += term;
                term *= atom.size;
            }
            row_power *= atom.size * atom.size;
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);

    const double cond = condition_1norm(g);
    if (cond > kGramConditionLimit) {
        std::ostringstream os;
        os << "gram_matrix: condition estimate " << cond << " exceeds "
           << kGramConditionLimit << " (atoms too close to coincident)";
        throw std::runtime_error(os.str());
    }
    return g;
}

double OrthoBasis::eval_q(std::size_t i, double x) const {
    if (i < 1 || i > dimension())
        throw std::out_of_range("OrthoBasis::eval_q: index out of range");
    const std::size_t row = i - 1;
    double v = coeffs(row, row);  // leading coefficient of x^{i-1}
    for (std::size_t k = row; k-- > 0;) v = v * x + coeffs(row, k);
    return v;
}

double OrthoBasis::orthonormality_residual() const {
    const std::size_t m = dimension();
    double worst = 0.0;
    for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = 1; j <= m; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < points.size(); ++k)
                s += weights[k] * eval_q(i, points[k]) * eval_q(j, points[k]);
            const double target = (i == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(s - target));
        }
    return worst;
}

OrthoBasis orthonormalize(const JumpMeasure& measure, const Mat& gram) {
    OrthoBasis basis;
    const Mat l = cholesky_lower(gram);  // throws on non-SPD input
    basis.coeffs = invert_lower(l);      // positive diagonal by construction
    basis.points.reserve(measure.atoms.size());
    basis.weights.reserve(measure.atoms.size());
    for (const auto& atom : measure.atoms) {
        basis.points.push_back(atom.size);
        basis.weights.push_back(atom.size * atom.size * atom.intensity);
    }

    // One refinement pass: re-measure the inner products of the computed
    // q_i and fold the residual Cholesky back into the coefficients. Takes
    // the orthonormality defect from O(kappa eps) to machine level.
    const std::size_t m = basis.dimension();
    Mat residual(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < basis.points.size(); ++k)
                s += basis.weights[k] * basis.eval_q(i + 1, basis.points[k]) *
                     basis.eval_q(j + 1, basis.points[k]);
            residual(i, j) = s;
        }
    const Mat correction = invert_lower(cholesky_lower(residual));
    basis.coeffs = matmul(correction, basis.coeffs);
    return basis;
}

OrthoBasis build_basis(const JumpMeasure& measure) {
    return orthonormalize(measure, gram_matrix(measure));
}

}  // namespace gbdsde
