#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace puffer::designs {

/// Declarative description of a random design matrix. All sampling is a pure
/// function of (spec, seed).
struct DesignSpec {
    enum class Kind { IidGaussian, ConstantCorrelation, Covariance, StiefelUniform };

    Kind kind = Kind::IidGaussian;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    double rho = 0.0;       // ConstantCorrelation only, in [0, 1)
    Eigen::MatrixXd sigma;  // Covariance only, p×p SPD
    std::uint64_t seed = 0;

    void validate() const;
};

Eigen::MatrixXd sample_design(const DesignSpec& spec);

/// Gaussian matrix pushed through the Puffer Transformation; the result is
/// uniform on the Stiefel manifold V(n, p) and satisfies V Vᵀ = I_n.
Eigen::MatrixXd sample_stiefel_uniform(Eigen::Index n, Eigen::Index p, std::uint64_t seed);

/// Sparse coefficient vector: the first s entries equal magnitude, the rest
/// are zero. With randomize = true the support positions and signs are drawn
/// from the seed instead.
Eigen::VectorXd sample_beta_star(Eigen::Index p, Eigen::Index s, double magnitude,
                                 std::uint64_t seed, bool randomize = false);

/// iid N(0, sigma2) noise vector.
Eigen::VectorXd sample_noise(Eigen::Index n, double sigma2, std::uint64_t seed);

/// Covariance whose population IC score is s·gamma: support block I_s, every
/// off-support column correlated gamma with each support column. SPD for
/// s·gamma² < 1.
Eigen::MatrixXd ic_violating_sigma(Eigen::Index p, Eigen::Index s, double gamma);

}  // namespace puffer::designs
