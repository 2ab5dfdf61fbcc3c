#include "puffer/types.hpp"

#include <cmath>

#include "puffer/errors.hpp"

namespace puffer {

void RegressionProblem::validate() const {
    if (X.rows() != Y.size())
        throw DimensionMismatch("RegressionProblem: X has " + std::to_string(X.rows()) +
                                " rows but Y has " + std::to_string(Y.size()) + " entries");
    if (!X.allFinite() || !Y.allFinite())
        throw NonFiniteInput("RegressionProblem: non-finite entries in X or Y");
    if (beta_star) {
        if (beta_star->size() != X.cols())
            throw DimensionMismatch("RegressionProblem: beta_star length does not match p");
        if (!beta_star->allFinite())
            throw NonFiniteInput("RegressionProblem: non-finite entries in beta_star");
    }
    if (sigma2 && !(*sigma2 >= 0.0))
        throw InvalidSpec("RegressionProblem: sigma2 must be nonnegative");
}

void SupportSet::validate(Eigen::Index p) const {
    if (signs.size() != indices.size())
        throw DimensionMismatch("SupportSet: signs length does not match indices");
    Eigen::Index prev = -1;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const Eigen::Index j = indices[k];
        if (j < 0 || j >= p) throw InvalidSpec("SupportSet: index out of range");
        if (j <= prev) throw InvalidSpec("SupportSet: indices must be strictly increasing");
        prev = j;
        if (signs[k] != 1 && signs[k] != -1)
            throw InvalidSpec("SupportSet: signs must be +1 or -1");
    }
}

SupportSet SupportSet::leading(Eigen::Index s) {
    SupportSet out;
    out.indices.reserve(static_cast<std::size_t>(s));
    out.signs.assign(static_cast<std::size_t>(s), 1);
    for (Eigen::Index j = 0; j < s; ++j) out.indices.push_back(j);
    return out;
}

SupportSet SupportSet::from_beta(const Eigen::VectorXd& beta, double zero_tol) {
    SupportSet out;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (std::abs(beta(j)) > zero_tol) {
            out.indices.push_back(j);
            out.signs.push_back(beta(j) > 0 ? 1 : -1);
        }
    }
    return out;
}

Eigen::VectorXd SupportSet::sign_vector() const {
    Eigen::VectorXd b(static_cast<Eigen::Index>(signs.size()));
    for (std::size_t k = 0; k < signs.size(); ++k)
        b(static_cast<Eigen::Index>(k)) = static_cast<double>(signs[k]);
    return b;
}

Eigen::VectorXd PufferDecomposition::preconditioner_scale() const {
    Eigen::VectorXd g(D.size());
    for (Eigen::Index i = 0; i < D.size(); ++i) {
        g(i) = tikhonov_delta == 0.0 ? 1.0 / D(i) : D(i) / (D(i) * D(i) + tikhonov_delta);
    }
    return g;
}

Eigen::VectorXd PufferDecomposition::design_scale() const {
    return D.cwiseProduct(preconditioner_scale());
}

}  // namespace puffer
