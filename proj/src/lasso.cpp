#include "puffer/lasso.hpp"

#include <cmath>

#include "puffer/errors.hpp"
#include "puffer/kernels.hpp"

namespace puffer::lasso {

double soft_threshold(double z, double lambda) {
    const double a = std::abs(z) - lambda;
    if (a <= 0.0) return 0.0;
    return z > 0 ? a : -a;
}

double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& Y) {
    if (X.rows() != Y.size()) throw DimensionMismatch("lambda_max: X rows != Y length");
    if (X.cols() == 0) return 0.0;
    return kernels::gemv_transpose(X, Y).cwiseAbs().maxCoeff();
}

double objective(const Eigen::Ref<const Eigen::MatrixXd>& X,
                 const Eigen::Ref<const Eigen::VectorXd>& Y,
                 const Eigen::Ref<const Eigen::VectorXd>& beta, double lambda) {
    const Eigen::VectorXd r = Y - X * beta;
    return 0.5 * r.squaredNorm() + lambda * beta.lpNorm<1>();
}

namespace {

// Worst violation of the subgradient conditions, in units of lambda:
// active coordinates must have X_jᵀr = lambda·sign(beta_j), inactive ones
// |X_jᵀr| <= lambda.
double kkt_residual_of(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& r,
                       const Eigen::VectorXd& beta, double lambda) {
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

struct SweepState {
    Eigen::VectorXd beta;
    Eigen::VectorXd residual;
    Eigen::VectorXd colnorm2;
};

// One pass over the given coordinates; returns the largest residual-scale
// step |Δbeta_j|·‖X_j‖.
double sweep(const Eigen::Ref<const Eigen::MatrixXd>& X, SweepState& st, double lambda,
             const std::vector<Eigen::Index>& order) {
    double max_step = 0.0;
    for (const Eigen::Index j : order) {
        const double nj2 = st.colnorm2(j);
        if (nj2 == 0.0) continue;
        const double z = X.col(j).dot(st.residual) + nj2 * st.beta(j);
        const double bn = soft_threshold(z, lambda) / nj2;
        const double d = bn - st.beta(j);
        if (d != 0.0) {
            st.residual -= d * X.col(j);
            st.beta(j) = bn;
            max_step = std::max(max_step, std::abs(d) * std::sqrt(nj2));
        }
    }
    return max_step;
}

}  // namespace

LassoSolution solve_lasso(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>& Y, double lambda,
                          const SolveOptions& opts, const std::optional<Eigen::VectorXd>& warm_start) {
    if (X.rows() != Y.size()) throw DimensionMismatch("solve_lasso: X rows != Y length");
    if (!(lambda > 0.0)) throw InvalidSpec("solve_lasso: lambda must be positive");
    if (!(opts.tol > 0.0)) throw InvalidSpec("solve_lasso: tol must be positive");

    const Eigen::Index p = X.cols();
    SweepState st;
    st.colnorm2 = X.colwise().squaredNorm();
    if (warm_start) {
        if (warm_start->size() != p)
            throw DimensionMismatch("solve_lasso: warm start length does not match p");
        st.beta = *warm_start;
        st.residual = Y - X * st.beta;
    } else {
        st.beta = Eigen::VectorXd::Zero(p);
        st.residual = Y;
    }

    std::vector<Eigen::Index> all(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;

    LassoSolution sol;
    sol.lambda = lambda;

    const double max_colnorm = std::sqrt(st.colnorm2.maxCoeff());
    const double inner_stop = 0.1 * opts.tol * lambda / std::max(1.0, max_colnorm);

    bool converged = false;
    int iter = 0;
    while (iter < opts.max_iter) {
        ++iter;
        sweep(X, st, lambda, all);
        if (opts.trace_objective)
            sol.objective_trace.push_back(objective(X, Y, st.beta, lambda));

        // Refine on the current active set; cheap relative to full sweeps.
        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < p; ++j)
            if (st.beta(j) != 0.0) active.push_back(j);
        for (int k = 0; k < 10000 && !active.empty(); ++k) {
            const double step = sweep(X, st, lambda, active);
            if (opts.trace_objective)
                sol.objective_trace.push_back(objective(X, Y, st.beta, lambda));
            if (step <= inner_stop) break;
        }

        sol.kkt_residual = kkt_residual_of(X, st.residual, st.beta, lambda);
        if (sol.kkt_residual <= opts.tol) {
            converged = true;
            break;
        }
    }

    sol.beta_hat = std::move(st.beta);
    sol.iterations = iter;
    sol.converged = converged;
    sol.active_count = 0;
    for (Eigen::Index j = 0; j < p; ++j)
        if (sol.beta_hat(j) != 0.0) ++sol.active_count;
    return sol;
}

LassoPath lasso_path(const Eigen::Ref<const Eigen::MatrixXd>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& Y, const PathOptions& opts) {
    if (opts.grid_size < 2) throw InvalidSpec("lasso_path: grid_size must be at least 2");
    double ratio = opts.lambda_min_ratio;
    if (ratio == 0.0) ratio = X.rows() > X.cols() ? 1e-4 : 1e-3;
    if (!(ratio > 0.0) || ratio >= 1.0)
        throw InvalidSpec("lasso_path: lambda_min_ratio must lie in (0, 1)");

    LassoPath path;
    path.grid_size = opts.grid_size;
    path.lambda_max = lambda_max(X, Y);
    // Degenerate XᵀY = 0: every solution is zero; run the grid from 1 so the
    // lambdas stay strictly decreasing.
    const double top = path.lambda_max > 0.0 ? path.lambda_max : 1.0;

    path.solutions.reserve(static_cast<std::size_t>(opts.grid_size));
    std::optional<Eigen::VectorXd> warm;
    for (int k = 0; k < opts.grid_size; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(opts.grid_size - 1);
        const double lam = top * std::pow(ratio, t);
        LassoSolution sol = solve_lasso(X, Y, lam, opts.solve, warm);
        warm = sol.beta_hat;
        path.solutions.push_back(std::move(sol));
    }
    return path;
}

}  // namespace puffer::lasso
