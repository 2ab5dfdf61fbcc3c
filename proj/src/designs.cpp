#include "puffer/designs.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <vector>

#include "puffer/core.hpp"
#include "puffer/errors.hpp"
#include "puffer/rng.hpp"

namespace puffer::designs {

void DesignSpec::validate() const {
    if (n < 1 || p < 1) throw InvalidSpec("DesignSpec: n and p must be at least 1");
    switch (kind) {
        case Kind::ConstantCorrelation:
            if (!(rho >= 0.0) || rho >= 1.0)
                throw InvalidSpec("DesignSpec: rho must lie in [0, 1)");
            break;
        case Kind::Covariance:
            if (sigma.rows() != p || sigma.cols() != p)
                throw InvalidSpec("DesignSpec: covariance must be p×p");
            if (!sigma.isApprox(sigma.transpose(), 1e-12))
                throw InvalidSpec("DesignSpec: covariance must be symmetric");
            break;
        case Kind::StiefelUniform:
            if (n > p) throw InvalidSpec("DesignSpec: StiefelUniform requires n <= p");
            break;
        case Kind::IidGaussian:
            break;
    }
}

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index n, Eigen::Index p, Rng& rng) {
    Eigen::MatrixXd z(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) z(i, j) = rng.normal();
    return z;
}

}  // namespace

Eigen::MatrixXd sample_design(const DesignSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    switch (spec.kind) {
        case DesignSpec::Kind::IidGaussian:
            return gaussian_matrix(spec.n, spec.p, rng);

        case DesignSpec::Kind::ConstantCorrelation: {
            // One-factor construction: X_ij = √ρ g_i + √(1−ρ) z_ij realizes
            // Σ_ii = 1, Σ_{i≠j} = ρ exactly without a p×p factorization.
            const double a = std::sqrt(spec.rho);
            const double b = std::sqrt(1.0 - spec.rho);
            Eigen::VectorXd g(spec.n);
            for (Eigen::Index i = 0; i < spec.n; ++i) g(i) = rng.normal();
            Eigen::MatrixXd x(spec.n, spec.p);
            for (Eigen::Index j = 0; j < spec.p; ++j)
                for (Eigen::Index i = 0; i < spec.n; ++i) x(i, j) = a * g(i) + b * rng.normal();
            return x;
        }

        case DesignSpec::Kind::Covariance: {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.sigma);
            if (eig.info() != Eigen::Success)
                throw InvalidSpec("sample_design: covariance eigendecomposition failed");
            if (!(eig.eigenvalues()(0) > 0.0))
                throw InvalidSpec("sample_design: covariance is not positive definite");
            const Eigen::MatrixXd root = eig.eigenvectors() *
                                         eig.eigenvalues().cwiseSqrt().asDiagonal() *
                                         eig.eigenvectors().transpose();
            return gaussian_matrix(spec.n, spec.p, rng) * root;
        }

        case DesignSpec::Kind::StiefelUniform:
            return sample_stiefel_uniform(spec.n, spec.p, spec.seed);
    }
    throw InvalidSpec("sample_design: unknown kind");
}

Eigen::MatrixXd sample_stiefel_uniform(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    if (n < 1 || p < 1) throw InvalidSpec("sample_stiefel_uniform: n and p must be at least 1");
    if (n > p) throw InvalidSpec("sample_stiefel_uniform: requires n <= p");
    Rng rng(seed);
    const Eigen::MatrixXd z = gaussian_matrix(n, p, rng);
    return puffer_design(z);
}

Eigen::VectorXd sample_beta_star(Eigen::Index p, Eigen::Index s, double magnitude,
                                 std::uint64_t seed, bool randomize) {
    if (s < 0 || s > p) throw InvalidSpec("sample_beta_star: need 0 <= s <= p");
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (!randomize) {
        beta.head(s).setConstant(magnitude);
        return beta;
    }
    Rng rng(seed);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (Eigen::Index k = 0; k < s; ++k) {
        const auto r =
            k + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(p - k)));
        std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(r)]);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        beta(idx[static_cast<std::size_t>(k)]) = sign * magnitude;
    }
    return beta;
}

Eigen::VectorXd sample_noise(Eigen::Index n, double sigma2, std::uint64_t seed) {
    if (!(sigma2 >= 0.0)) throw InvalidSpec("sample_noise: sigma2 must be nonnegative");
    Rng rng(seed);
    const double sd = std::sqrt(sigma2);
    Eigen::VectorXd e(n);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = sd * rng.normal();
    return e;
}

Eigen::MatrixXd ic_violating_sigma(Eigen::Index p, Eigen::Index s, double gamma) {
    if (s < 1 || s >= p) throw InvalidSpec("ic_violating_sigma: need 1 <= s < p");
    const double residual = 1.0 - static_cast<double>(s) * gamma * gamma;
    if (!(residual > 0.0))
        throw InvalidSpec("ic_violating_sigma: s*gamma^2 must be below 1 for a valid covariance");
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
    for (Eigen::Index j = s; j < p; ++j) {
        for (Eigen::Index i = 0; i < s; ++i) {
            sigma(i, j) = gamma;
            sigma(j, i) = gamma;
        }
        for (Eigen::Index k = s; k < p; ++k)
            if (k != j) sigma(j, k) = static_cast<double>(s) * gamma * gamma;
    }
    return sigma;
}

}  // namespace puffer::designs
