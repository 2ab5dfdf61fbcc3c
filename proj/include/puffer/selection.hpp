#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "puffer/lasso.hpp"

namespace puffer::selection {

enum class Rule { OlsBic, FirstWithDf };

struct SelectionResult {
    double chosen_lambda = 0.0;
    std::vector<Eigen::Index> chosen_support;
    int df = 0;
    std::map<int, double> bic_scores;  // df → BIC, OlsBic only
    Rule rule = Rule::FirstWithDf;
    std::size_t path_index = 0;  // position of the chosen solution in the path
    std::vector<std::string> warnings;
};

struct OlsFit {
    double intercept = 0.0;
    Eigen::VectorXd coef;  // one entry per support column
    double rss = 0.0;
};

/// Least squares of Y on X restricted to the support columns, plus an
/// intercept unless disabled. Throws SingularGram when X(support) is
/// rank-deficient.
OlsFit ols_refit(const Eigen::Ref<const Eigen::MatrixXd>& X,
                 const Eigen::Ref<const Eigen::VectorXd>& Y,
                 const std::vector<Eigen::Index>& support, bool with_intercept = true);

/// Gaussian BIC with the variance estimated by maximum likelihood:
/// n·log(2π·rss/n) + n + k_params·log n.
double bic_gaussian(Eigen::Index n, double rss, int k_params);

/// First solution along the path (decreasing lambda) with at least k active
/// coefficients. k = 0 selects the first (empty) model.
SelectionResult first_with_df(const lasso::LassoPath& path, int k);

/// The paper's tuning rule: for each df in 1..df_max take the first model on
/// the path with exactly df active coefficients (unattained df are skipped),
/// refit OLS on the original data, and pick the df minimizing the BIC. A
/// rank-deficient refit skips that df with a warning.
SelectionResult ols_bic_select(const lasso::LassoPath& path,
                               const Eigen::Ref<const Eigen::MatrixXd>& X_orig,
                               const Eigen::Ref<const Eigen::VectorXd>& Y_orig, int df_max = 40,
                               bool refit_intercept = true);

}  // namespace puffer::selection
