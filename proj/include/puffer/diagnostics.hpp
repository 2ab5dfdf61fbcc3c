#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "puffer/types.hpp"

namespace puffer::diagnostics {

/// Condition-number threshold above which a support Gram matrix is treated as
/// numerically singular.
inline constexpr double kGramConditionLimit = 1e12;

struct DiagnosticsReport {
    double ic_score = 0.0;
    double eta = 1.0;           // 1 − ic_score
    double c_min = 0.0;         // Λ_min(X(S)ᵀX(S))
    double c_min_scaled = 0.0;  // Λ_min((1/n)X(S)ᵀX(S))
    double d_min_proxy = 0.0;   // min_i D_ii² / p
    double m_beta = 0.0;        // min_{j∈S} |β*_j| (0 when β* unknown)
    double psi = 0.0;           // Ψ(X, β*, λ)
    double prob_bound = 0.0;    // sign-recovery probability bound (may be negative)
};

struct SignReport {
    int false_positives = 0;
    int false_negatives = 0;
    bool sign_match = false;
    double l2_error = 0.0;
};

/// Outcome of the exact-recovery conditions for one noise realization.
struct RecoveryConditions {
    bool r1_strict = false;  // stationarity off the support, strict
    bool r2 = false;         // sign preservation on the support
    bool recovered() const { return r1_strict && r2; }
};

/// ‖X(Sᶜ)ᵀ X(S) (X(S)ᵀX(S))⁻¹ b‖_∞ with b the support signs. The
/// irrepresentable condition holds iff this is < 1.
double ic_score(const Eigen::Ref<const Eigen::MatrixXd>& X, const SupportSet& support);

/// Evaluates the two KKT recovery conditions for a given lambda and noise
/// vector epsilon = Y − Xβ*. When both hold (R1 strictly) the Lasso solution
/// at lambda is unique and sign-equal to β*.
RecoveryConditions kkt_recovery_conditions(const RegressionProblem& problem,
                                           const SupportSet& support, double lambda,
                                           const Eigen::Ref<const Eigen::VectorXd>& epsilon);
bool kkt_recovery_check(const RegressionProblem& problem, const SupportSet& support,
                        double lambda, const Eigen::Ref<const Eigen::VectorXd>& epsilon);

/// Ψ = λ [ η/√C_min + ‖(X(S)ᵀX(S))⁻¹ b‖_∞ ]; exact recovery needs the
/// minimum signal to exceed this value.
double psi_bound(const Eigen::Ref<const Eigen::MatrixXd>& X, const SupportSet& support,
                 double lambda, double eta);

/// 1 − 2p·exp(−n λ² C̃_min / (2σ²)).
double theorem1_bound(double n, double p, double lambda, double sigma2, double c_min_scaled);

/// 1 − 2p·exp(−p λ² η² d_min / (2σ²)).
double theorem3_bound(double n, double p, double lambda, double sigma2, double eta,
                      double d_min);

/// The lambda with λ² = √(n·log p / (s·p²)).
double theorem3_corollary_lambda(double n, double p, double s);

/// False positives/negatives, sign agreement and ℓ2 error of an estimate
/// against the truth. Entries with |β̂_j| ≤ zero_tol count as zero.
SignReport sign_report(const Eigen::Ref<const Eigen::VectorXd>& beta_hat,
                       const Eigen::Ref<const Eigen::VectorXd>& beta_star,
                       double zero_tol = 0.0);

/// Pearson correlations of num_pairs distinct column pairs drawn uniformly
/// without replacement, reproducible from the seed.
std::vector<double> pairwise_correlation_sample(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                                Eigen::Index num_pairs, std::uint64_t seed);

/// Columns centered to mean zero and scaled to standard deviation one
/// (n−1 convention).
Eigen::MatrixXd center_and_scale(const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Worst KKT violation of beta for the Lasso problem at lambda, in units of
/// lambda. Independent re-computation used to certify solver output.
double kkt_optimality_residual(const Eigen::Ref<const Eigen::MatrixXd>& X,
                               const Eigen::Ref<const Eigen::VectorXd>& Y,
                               const Eigen::Ref<const Eigen::VectorXd>& beta, double lambda);

/// Assembles the full report for one design: IC score, eigenvalue bounds, Ψ
/// and the applicable theorem probability bound (Theorem 1 when n ≥ p, else
/// the high-dimensional bound).
DiagnosticsReport make_report(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const SupportSet& support, const PufferDecomposition& decomposition,
                              double lambda, double sigma2,
                              const std::optional<Eigen::VectorXd>& beta_star = std::nullopt);

}  // namespace puffer::diagnostics
