#include "puffer/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "puffer/errors.hpp"
#include "puffer/kernels.hpp"

namespace puffer::diagnostics {

namespace {

Eigen::MatrixXd gather_columns(const Eigen::Ref<const Eigen::MatrixXd>& X,
                               const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.col(idx[k]);
    return out;
}

struct GramFactor {
    Eigen::MatrixXd Ms;           // X(S), n×s
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;

    double c_min() const { return eig.eigenvalues()(0); }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        return eig.eigenvectors() *
               eig.eigenvalues().cwiseInverse().cwiseProduct(eig.eigenvectors().transpose() * rhs);
    }
};

GramFactor support_gram(const Eigen::Ref<const Eigen::MatrixXd>& X, const SupportSet& support) {
    support.validate(X.cols());
    if (support.empty()) throw EmptySupport("support set is empty");
    GramFactor f;
    f.Ms = gather_columns(X, support.indices);
    const Eigen::MatrixXd gram = kernels::crossprod(f.Ms, f.Ms);
    f.eig.compute(gram);
    if (f.eig.info() != Eigen::Success)
        throw SingularGram("support Gram eigendecomposition failed");
    const double lo = f.eig.eigenvalues()(0);
    const double hi = f.eig.eigenvalues()(f.eig.eigenvalues().size() - 1);
    if (!(lo > 0.0) || hi / lo > kGramConditionLimit)
        throw SingularGram("support Gram is numerically singular (condition > 1e12)");
    return f;
}

}  // namespace

double ic_score(const Eigen::Ref<const Eigen::MatrixXd>& X, const SupportSet& support) {
    const GramFactor f = support_gram(X, support);
    const Eigen::VectorXd u = f.solve(support.sign_vector());
    const Eigen::VectorXd w = f.Ms * u;                      // n
    const Eigen::VectorXd t = kernels::gemv_transpose(X, w); // p
    std::vector<char> in_support(static_cast<std::size_t>(X.cols()), 0);
    for (const Eigen::Index j : support.indices) in_support[static_cast<std::size_t>(j)] = 1;
    double score = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        if (!in_support[static_cast<std::size_t>(j)]) score = std::max(score, std::abs(t(j)));
    return score;
}

RecoveryConditions kkt_recovery_conditions(const RegressionProblem& problem,
                                           const SupportSet& support, double lambda,
                                           const Eigen::Ref<const Eigen::VectorXd>& epsilon) {
    if (!problem.beta_star) throw InvalidSpec("kkt_recovery_conditions: beta_star required");
    if (epsilon.size() != problem.n())
        throw DimensionMismatch("kkt_recovery_conditions: epsilon length does not match n");
    if (!(lambda > 0.0)) throw InvalidSpec("kkt_recovery_conditions: lambda must be positive");

    const Eigen::MatrixXd& X = problem.X;
    const GramFactor f = support_gram(X, support);
    const Eigen::Index s = static_cast<Eigen::Index>(support.size());

    Eigen::VectorXd beta_s(s), b(s);
    for (Eigen::Index k = 0; k < s; ++k) {
        const double v = (*problem.beta_star)(support.indices[static_cast<std::size_t>(k)]);
        if (v == 0.0)
            throw InvalidSpec("kkt_recovery_conditions: support index with zero true coefficient");
        beta_s(k) = v;
        b(k) = v > 0 ? 1.0 : -1.0;
    }

    const Eigen::VectorXd a = kernels::gemv_transpose(f.Ms, epsilon) - lambda * b;
    const Eigen::VectorXd u = f.solve(a);

    RecoveryConditions out;
    out.r2 = true;
    for (Eigen::Index k = 0; k < s; ++k) {
        const double v = beta_s(k) + u(k);
        const double sgn = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
        if (sgn != b(k)) {
            out.r2 = false;
            break;
        }
    }

    const Eigen::VectorXd w = f.Ms * u - epsilon;
    const Eigen::VectorXd t = kernels::gemv_transpose(X, w);
    std::vector<char> in_support(static_cast<std::size_t>(X.cols()), 0);
    for (const Eigen::Index j : support.indices) in_support[static_cast<std::size_t>(j)] = 1;
    out.r1_strict = true;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (in_support[static_cast<std::size_t>(j)]) continue;
        if (!(std::abs(t(j)) < lambda)) {
            out.r1_strict = false;
            break;
        }
    }
    return out;
}

bool kkt_recovery_check(const RegressionProblem& problem, const SupportSet& support,
                        double lambda, const Eigen::Ref<const Eigen::VectorXd>& epsilon) {
    return kkt_recovery_conditions(problem, support, lambda, epsilon).recovered();
}

double psi_bound(const Eigen::Ref<const Eigen::MatrixXd>& X, const SupportSet& support,
                 double lambda, double eta) {
    const GramFactor f = support_gram(X, support);
    const Eigen::VectorXd u = f.solve(support.sign_vector());
    return lambda * (eta / std::sqrt(f.c_min()) + u.cwiseAbs().maxCoeff());
}

double theorem1_bound(double n, double p, double lambda, double sigma2, double c_min_scaled) {
    if (!(n > 0) || !(p > 0) || !(sigma2 > 0) || !(c_min_scaled >= 0) || !(lambda >= 0))
        throw InvalidSpec("theorem1_bound: inputs must be positive");
    return 1.0 - 2.0 * p * std::exp(-n * lambda * lambda * c_min_scaled / (2.0 * sigma2));
}

double theorem3_bound(double n, double p, double lambda, double sigma2, double eta,
                      double d_min) {
    if (!(n > 0) || !(p > 0) || !(sigma2 > 0) || !(d_min >= 0) || !(lambda >= 0))
        throw InvalidSpec("theorem3_bound: inputs must be positive");
    if (!(eta > 0.0) || eta > 1.0) throw InvalidSpec("theorem3_bound: eta must lie in (0, 1]");
    return 1.0 - 2.0 * p * std::exp(-p * lambda * lambda * eta * eta * d_min / (2.0 * sigma2));
}

double theorem3_corollary_lambda(double n, double p, double s) {
    if (!(n > 0) || !(p > 1) || !(s > 0))
        throw InvalidSpec("theorem3_corollary_lambda: inputs must be positive");
    const double lambda_sq = std::sqrt(n * std::log(p) / (s * p * p));
    return std::sqrt(lambda_sq);
}

SignReport sign_report(const Eigen::Ref<const Eigen::VectorXd>& beta_hat,
                       const Eigen::Ref<const Eigen::VectorXd>& beta_star, double zero_tol) {
    if (beta_hat.size() != beta_star.size())
        throw DimensionMismatch("sign_report: coefficient vectors differ in length");
    SignReport out;
    bool signs_ok = true;
    for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
        const bool est_nonzero = std::abs(beta_hat(j)) > zero_tol;
        const bool true_nonzero = beta_star(j) != 0.0;
        if (est_nonzero && !true_nonzero) ++out.false_positives;
        if (!est_nonzero && true_nonzero) ++out.false_negatives;
        if (est_nonzero && true_nonzero &&
            (beta_hat(j) > 0) != (beta_star(j) > 0))
            signs_ok = false;
    }
    out.sign_match = out.false_positives == 0 && out.false_negatives == 0 && signs_ok;
    out.l2_error = (beta_hat - beta_star).norm();
    return out;
}

std::vector<double> pairwise_correlation_sample(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                                Eigen::Index num_pairs, std::uint64_t seed) {
    if (X.cols() < 2) throw InvalidSpec("pairwise_correlation_sample: need p >= 2");
    const auto pairs = kernels::sample_pair_indices(X.cols(), num_pairs, seed);
    const kernels::PairCorrelations pc = kernels::pair_correlations(X, pairs);
    if (!pc.zero_variance.empty()) {
        const auto k = static_cast<std::size_t>(pc.zero_variance.front());
        throw ZeroVarianceColumn(
            "pairwise_correlation_sample: correlation undefined for column pair (" +
            std::to_string(pairs[k].first + 1) + ", " + std::to_string(pairs[k].second + 1) + ")");
    }
    return pc.values;
}

Eigen::MatrixXd center_and_scale(const Eigen::Ref<const Eigen::MatrixXd>& X) {
    std::vector<Eigen::Index> zero_variance;
    Eigen::MatrixXd out = kernels::standardize_columns(X, zero_variance);
    if (!zero_variance.empty())
        throw ZeroVarianceColumn("center_and_scale: column " +
                                 std::to_string(zero_variance.front() + 1) +
                                 " has zero variance");
    return out;
}

double kkt_optimality_residual(const Eigen::Ref<const Eigen::MatrixXd>& X,
                               const Eigen::Ref<const Eigen::VectorXd>& Y,
                               const Eigen::Ref<const Eigen::VectorXd>& beta, double lambda) {
    if (X.rows() != Y.size() || X.cols() != beta.size())
        throw DimensionMismatch("kkt_optimality_residual: dimension mismatch");
    if (!(lambda > 0.0)) throw InvalidSpec("kkt_optimality_residual: lambda must be positive");
    const Eigen::VectorXd r = Y - X * beta;
    const Eigen::VectorXd g = kernels::gemv_transpose(X, r);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        double v;
        if (beta(j) != 0.0) {
            v = std::abs(g(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0));
        } else {
            v = std::max(std::abs(g(j)) - lambda, 0.0);
        }
        worst = std::max(worst, v);
    }
    return worst / lambda;
}

DiagnosticsReport make_report(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const SupportSet& support, const PufferDecomposition& decomposition,
                              double lambda, double sigma2,
                              const std::optional<Eigen::VectorXd>& beta_star) {
    DiagnosticsReport rep;
    rep.ic_score = ic_score(X, support);
    rep.eta = 1.0 - rep.ic_score;

    const GramFactor f = support_gram(X, support);
    rep.c_min = f.c_min();
    rep.c_min_scaled = rep.c_min / static_cast<double>(X.rows());
    const double d_min_sq = decomposition.D(decomposition.D.size() - 1);
    rep.d_min_proxy = d_min_sq * d_min_sq / static_cast<double>(X.cols());

    if (beta_star) {
        double m = std::numeric_limits<double>::infinity();
        for (const Eigen::Index j : support.indices) m = std::min(m, std::abs((*beta_star)(j)));
        rep.m_beta = std::isfinite(m) ? m : 0.0;
    }

    const double eta_for_psi = std::max(rep.eta, 0.0);
    rep.psi = psi_bound(X, support, lambda, eta_for_psi);

    if (X.rows() >= X.cols()) {
        rep.prob_bound = theorem1_bound(static_cast<double>(X.rows()),
                                        static_cast<double>(X.cols()), lambda, sigma2,
                                        rep.c_min_scaled);
    } else if (rep.eta > 0.0) {
        rep.prob_bound = theorem3_bound(static_cast<double>(X.rows()),
                                        static_cast<double>(X.cols()), lambda, sigma2, rep.eta,
                                        rep.d_min_proxy);
    } else {
        // IC fails: the high-dimensional bound does not apply; report the
        // vacuous limit.
        rep.prob_bound = 1.0 - 2.0 * static_cast<double>(X.cols());
    }
    return rep;
}

}  // namespace puffer::diagnostics
