#include "puffer/selection.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "puffer/errors.hpp"

namespace puffer::selection {

OlsFit ols_refit(const Eigen::Ref<const Eigen::MatrixXd>& X,
                 const Eigen::Ref<const Eigen::VectorXd>& Y,
                 const std::vector<Eigen::Index>& support, bool with_intercept) {
    if (X.rows() != Y.size()) throw DimensionMismatch("ols_refit: X rows != Y length");
    const Eigen::Index n = X.rows();
    const auto s = static_cast<Eigen::Index>(support.size());
    if (s > n) throw SingularGram("ols_refit: more support columns than observations");
    for (const Eigen::Index j : support)
        if (j < 0 || j >= X.cols()) throw InvalidSpec("ols_refit: support index out of range");

    const Eigen::Index cols = s + (with_intercept ? 1 : 0);
    OlsFit fit;
    fit.coef = Eigen::VectorXd::Zero(s);
    if (cols == 0) {
        fit.rss = Y.squaredNorm();
        return fit;
    }

    Eigen::MatrixXd A(n, cols);
    Eigen::Index c = 0;
    if (with_intercept) A.col(c++).setOnes();
    for (Eigen::Index k = 0; k < s; ++k) A.col(c++) = X.col(support[static_cast<std::size_t>(k)]);

    // Rank is checked on the support columns alone; a collinear intercept (as
    // with an identity design spanning the constant vector) is solved
    // least-squares and does not raise.
    if (s > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_s(A.rightCols(s));
        if (qr_s.rank() < s) throw SingularGram("ols_refit: support columns are rank-deficient");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::VectorXd sol = qr.solve(Y);
    c = 0;
    if (with_intercept) fit.intercept = sol(c++);
    for (Eigen::Index k = 0; k < s; ++k) fit.coef(k) = sol(c++);
    fit.rss = (Y - A * sol).squaredNorm();
    return fit;
}

double bic_gaussian(Eigen::Index n, double rss, int k_params) {
    const double nn = static_cast<double>(n);
    const double safe_rss = std::max(rss, 1e-300);
    return nn * std::log(2.0 * std::numbers::pi * safe_rss / nn) + nn +
           static_cast<double>(k_params) * std::log(nn);
}

namespace {

std::vector<Eigen::Index> support_of(const Eigen::VectorXd& beta) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (beta(j) != 0.0) out.push_back(j);
    return out;
}

}  // namespace

SelectionResult first_with_df(const lasso::LassoPath& path, int k) {
    if (k < 0) throw InvalidSpec("first_with_df: k must be nonnegative");
    for (std::size_t i = 0; i < path.solutions.size(); ++i) {
        const auto& sol = path.solutions[i];
        if (sol.active_count >= k) {
            SelectionResult res;
            res.rule = Rule::FirstWithDf;
            res.chosen_lambda = sol.lambda;
            res.chosen_support = support_of(sol.beta_hat);
            res.df = sol.active_count;
            res.path_index = i;
            return res;
        }
    }
    throw NoSuchModel("first_with_df: no path solution reaches " + std::to_string(k) +
                      " predictors");
}

SelectionResult ols_bic_select(const lasso::LassoPath& path,
                               const Eigen::Ref<const Eigen::MatrixXd>& X_orig,
                               const Eigen::Ref<const Eigen::VectorXd>& Y_orig, int df_max,
                               bool refit_intercept) {
    if (df_max < 1) throw InvalidSpec("ols_bic_select: df_max must be at least 1");

    SelectionResult res;
    res.rule = Rule::OlsBic;
    bool found = false;
    double best_bic = 0.0;

    for (int df = 1; df <= df_max; ++df) {
        // First model along the path with exactly df degrees of freedom.
        std::size_t idx = path.solutions.size();
        for (std::size_t i = 0; i < path.solutions.size(); ++i) {
            if (path.solutions[i].active_count == df) {
                idx = i;
                break;
            }
        }
        if (idx == path.solutions.size()) continue;  // df never attained

        const auto support = support_of(path.solutions[idx].beta_hat);
        double bic;
        try {
            const OlsFit fit = ols_refit(X_orig, Y_orig, support, refit_intercept);
            const int k_params =
                static_cast<int>(support.size()) + (refit_intercept ? 1 : 0) + 1;
            bic = bic_gaussian(X_orig.rows(), fit.rss, k_params);
        } catch (const SingularGram&) {
            res.warnings.push_back("df " + std::to_string(df) +
                                   " skipped: rank-deficient OLS refit");
            continue;
        }
        res.bic_scores[df] = bic;
        if (!found || bic < best_bic) {
            found = true;
            best_bic = bic;
            res.chosen_lambda = path.solutions[idx].lambda;
            res.chosen_support = support;
            res.df = df;
            res.path_index = idx;
        }
    }

    if (!found) throw NoSuchModel("ols_bic_select: no df in 1.." + std::to_string(df_max) +
                                  " attained along the path");
    return res;
}

}  // namespace puffer::selection
