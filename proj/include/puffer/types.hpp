#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

namespace puffer {

/// Linear regression instance Y = X b + noise. beta_star and sigma2 are only
/// present for simulated problems. Immutable after construction; safe to
/// share read-only across threads.
struct RegressionProblem {
    Eigen::MatrixXd X;
    Eigen::VectorXd Y;
    std::optional<Eigen::VectorXd> beta_star;
    std::optional<double> sigma2;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }

    /// Throws DimensionMismatch / NonFiniteInput / InvalidSpec on violation.
    void validate() const;
};

/// Index set of relevant predictors together with the coefficient signs.
/// Indices are 0-based column positions, strictly increasing.
struct SupportSet {
    std::vector<Eigen::Index> indices;
    std::vector<int> signs;  // entries in {-1, +1}, one per index

    std::size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }

    void validate(Eigen::Index p) const;

    /// {0, ..., s-1} with all-positive signs (the leading-support convention).
    static SupportSet leading(Eigen::Index s);

    /// Support and signs of the entries of beta with |beta_j| > zero_tol.
    static SupportSet from_beta(const Eigen::VectorXd& beta, double zero_tol = 0.0);

    Eigen::VectorXd sign_vector() const;
};

/// Thin SVD X = U diag(D) Vᵀ truncated at the numerical rank, plus the knobs
/// that produced it. The preconditioner F = U diag(g) Uᵀ never exists as a
/// dense matrix; g is exposed via preconditioner_scale().
struct PufferDecomposition {
    Eigen::MatrixXd U;  // n×d, orthonormal columns
    Eigen::VectorXd D;  // d singular values, strictly positive, nonincreasing
    Eigen::MatrixXd V;  // p×d, orthonormal columns
    Eigen::Index rank = 0;
    double rank_tolerance = 0.0;
    double tikhonov_delta = 0.0;

    /// Diagonal factor of F: 1/D_i when delta = 0, else D_i/(D_i² + delta).
    Eigen::VectorXd preconditioner_scale() const;

    /// Singular-value multipliers of the transformed design: D_i·g_i
    /// (all ones when delta = 0).
    Eigen::VectorXd design_scale() const;
};

/// Preconditioned regression equation: X_tilde = F X, Y_tilde = F Y. Keeps a
/// handle to the untransformed problem (model selection refits against it).
struct TransformedProblem {
    Eigen::MatrixXd X_tilde;
    Eigen::VectorXd Y_tilde;
    std::shared_ptr<const RegressionProblem> source;
    PufferDecomposition decomposition;
};

}  // namespace puffer
