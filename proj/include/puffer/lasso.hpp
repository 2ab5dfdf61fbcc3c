#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace puffer::lasso {

struct SolveOptions {
    double tol = 1e-7;     // relative KKT tolerance
    int max_iter = 10000;  // full cyclic sweeps
    bool trace_objective = false;
};

struct LassoSolution {
    double lambda = 0.0;
    Eigen::VectorXd beta_hat;
    int active_count = 0;
    double kkt_residual = 0.0;  // worst KKT violation, in units of lambda
    int iterations = 0;         // full sweeps performed
    bool converged = true;
    std::vector<double> objective_trace;  // one entry per sweep when requested
};

struct LassoPath {
    std::vector<LassoSolution> solutions;  // strictly decreasing lambda
    double lambda_max = 0.0;
    int grid_size = 0;
};

struct PathOptions {
    int grid_size = 100;
    double lambda_min_ratio = 0.0;  // 0 = auto: 1e-4 when n > p, else 1e-3
    SolveOptions solve;
};

/// sign(z) · max(|z| − lambda, 0).
double soft_threshold(double z, double lambda);

/// ‖XᵀY‖_∞: the smallest lambda whose solution is identically zero.
double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& Y);

/// ½‖Y − Xb‖² + lambda‖b‖₁.
double objective(const Eigen::Ref<const Eigen::MatrixXd>& X,
                 const Eigen::Ref<const Eigen::VectorXd>& Y,
                 const Eigen::Ref<const Eigen::VectorXd>& beta, double lambda);

/// Cyclic coordinate descent with active-set iteration. Non-convergence
/// within max_iter sweeps returns the best iterate with converged = false.
LassoSolution solve_lasso(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>& Y, double lambda,
                          const SolveOptions& opts = {},
                          const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

/// Warm-started solutions on a geometric grid from lambda_max down to
/// lambda_max · lambda_min_ratio.
LassoPath lasso_path(const Eigen::Ref<const Eigen::MatrixXd>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& Y, const PathOptions& opts = {});

}  // namespace puffer::lasso
