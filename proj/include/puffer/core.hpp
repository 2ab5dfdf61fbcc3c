#pragma once

#include <memory>

#include "puffer/types.hpp"

namespace puffer {

inline constexpr double kDefaultRankTolerance = 1e-10;

/// Thin SVD of X with singular values below rank_tolerance × σ_max dropped.
/// Throws NonFiniteInput / AllZeroMatrix / InvalidSpec.
PufferDecomposition thin_svd(const Eigen::Ref<const Eigen::MatrixXd>& X,
                             double rank_tolerance = kDefaultRankTolerance);

/// The transformed design F X built from an existing decomposition:
/// U diag(D_i g_i) Vᵀ, which is U Vᵀ when tikhonov_delta = 0.
Eigen::MatrixXd transformed_design(const PufferDecomposition& d);

/// Convenience: decompose X and return F X directly.
Eigen::MatrixXd puffer_design(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              double rank_tolerance = kDefaultRankTolerance,
                              double tikhonov_delta = 0.0);

/// F v = U diag(g) Uᵀ v without materializing F.
Eigen::VectorXd apply_preconditioner(const PufferDecomposition& d,
                                     const Eigen::Ref<const Eigen::VectorXd>& v);

/// Left-multiplies the regression equation by F. The overload taking a
/// shared_ptr avoids copying X into the result's source handle.
TransformedProblem puffer_transform(std::shared_ptr<const RegressionProblem> problem,
                                    double rank_tolerance = kDefaultRankTolerance,
                                    double tikhonov_delta = 0.0);
TransformedProblem puffer_transform(const RegressionProblem& problem,
                                    double rank_tolerance = kDefaultRankTolerance,
                                    double tikhonov_delta = 0.0);

/// max |UᵀU − I| and |VᵀV − I| over both factors.
double factor_orthonormality_error(const PufferDecomposition& d);

/// max-entry deviation of the transformed design's Gram from the identity;
/// uses X̃ᵀX̃ when n ≥ p and X̃X̃ᵀ otherwise.
double transform_orthonormality_error(const Eigen::Ref<const Eigen::MatrixXd>& X_tilde);

}  // namespace puffer
