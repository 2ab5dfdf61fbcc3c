#include "puffer/core.hpp"

#include <Eigen/SVD>

#include "puffer/errors.hpp"
#include "puffer/kernels.hpp"

namespace puffer {

PufferDecomposition thin_svd(const Eigen::Ref<const Eigen::MatrixXd>& X, double rank_tolerance) {
    if (!(rank_tolerance > 0.0) || rank_tolerance >= 1.0)
        throw InvalidSpec("thin_svd: rank_tolerance must lie in (0, 1)");
    if (X.size() == 0) throw InvalidSpec("thin_svd: empty matrix");
    if (!X.allFinite()) throw NonFiniteInput("thin_svd: non-finite entries");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) throw AllZeroMatrix("thin_svd: matrix is all zero");

    const double cutoff = rank_tolerance * sv(0);
    Eigen::Index d = 0;
    while (d < sv.size() && sv(d) > cutoff) ++d;

    PufferDecomposition out;
    out.U = svd.matrixU().leftCols(d);
    out.D = sv.head(d);
    out.V = svd.matrixV().leftCols(d);
    out.rank = d;
    out.rank_tolerance = rank_tolerance;
    out.tikhonov_delta = 0.0;
    return out;
}

Eigen::MatrixXd transformed_design(const PufferDecomposition& d) {
    return kernels::scaled_tcrossprod(d.U, d.design_scale(), d.V);
}

Eigen::MatrixXd puffer_design(const Eigen::Ref<const Eigen::MatrixXd>& X, double rank_tolerance,
                              double tikhonov_delta) {
    PufferDecomposition d = thin_svd(X, rank_tolerance);
    d.tikhonov_delta = tikhonov_delta;
    return transformed_design(d);
}

Eigen::VectorXd apply_preconditioner(const PufferDecomposition& d,
                                     const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() != d.U.rows())
        throw DimensionMismatch("apply_preconditioner: vector length does not match n");
    const Eigen::VectorXd proj = kernels::gemv_transpose(d.U, v);
    return d.U * d.preconditioner_scale().cwiseProduct(proj);
}

TransformedProblem puffer_transform(std::shared_ptr<const RegressionProblem> problem,
                                    double rank_tolerance, double tikhonov_delta) {
    if (!problem) throw InvalidSpec("puffer_transform: null problem");
    problem->validate();
    if (!(tikhonov_delta >= 0.0))
        throw InvalidSpec("puffer_transform: tikhonov_delta must be nonnegative");

    TransformedProblem out;
    out.decomposition = thin_svd(problem->X, rank_tolerance);
    out.decomposition.tikhonov_delta = tikhonov_delta;
    out.X_tilde = transformed_design(out.decomposition);
    out.Y_tilde = apply_preconditioner(out.decomposition, problem->Y);
    out.source = std::move(problem);
    return out;
}

TransformedProblem puffer_transform(const RegressionProblem& problem, double rank_tolerance,
                                    double tikhonov_delta) {
    return puffer_transform(std::make_shared<const RegressionProblem>(problem), rank_tolerance,
                            tikhonov_delta);
}

double factor_orthonormality_error(const PufferDecomposition& d) {
    const Eigen::MatrixXd iu = kernels::crossprod(d.U, d.U);
    const Eigen::MatrixXd iv = kernels::crossprod(d.V, d.V);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d.rank, d.rank);
    return std::max((iu - eye).cwiseAbs().maxCoeff(), (iv - eye).cwiseAbs().maxCoeff());
}

double transform_orthonormality_error(const Eigen::Ref<const Eigen::MatrixXd>& X_tilde) {
    const Eigen::Index n = X_tilde.rows();
    const Eigen::Index p = X_tilde.cols();
    if (n >= p) {
        const Eigen::MatrixXd g = kernels::crossprod(X_tilde, X_tilde);
        return (g - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
    }
    const Eigen::MatrixXd xt = X_tilde.transpose();
    const Eigen::MatrixXd g = kernels::crossprod(xt, xt);
    return (g - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

}  // namespace puffer
