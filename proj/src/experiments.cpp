#include "puffer/experiments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <tuple>

#include "puffer/core.hpp"
#include "puffer/designs.hpp"
#include "puffer/diagnostics.hpp"
#include "puffer/errors.hpp"
#include "puffer/kernels.hpp"
#include "puffer/lasso.hpp"
#include "puffer/rng.hpp"
#include "puffer/selection.hpp"

namespace puffer::experiments {

std::string study_name(Study study) {
    switch (study) {
        case Study::CorrelationReduction: return "CorrelationReduction";
        case Study::BicSweep: return "BicSweep";
        case Study::FirstDfSweep: return "FirstDfSweep";
        case Study::StiefelIcStudy: return "StiefelIcStudy";
        case Study::RecoveryRate: return "RecoveryRate";
        case Study::StiefelCoherence: return "StiefelCoherence";
    }
    return "?";
}

Study study_from_name(const std::string& name) {
    if (name == "CorrelationReduction") return Study::CorrelationReduction;
    if (name == "BicSweep") return Study::BicSweep;
    if (name == "FirstDfSweep") return Study::FirstDfSweep;
    if (name == "StiefelIcStudy") return Study::StiefelIcStudy;
    if (name == "RecoveryRate") return Study::RecoveryRate;
    if (name == "StiefelCoherence") return Study::StiefelCoherence;
    throw InvalidSpec("unknown study: " + name);
}

std::string method_name(Method method) {
    return method == Method::StandardLasso ? "StandardLasso" : "PreconditionedLasso";
}

Method method_from_name(const std::string& name) {
    if (name == "StandardLasso") return Method::StandardLasso;
    if (name == "PreconditionedLasso") return Method::PreconditionedLasso;
    throw InvalidSpec("unknown method: " + name);
}

void ExperimentConfig::validate() const {
    if (n < 1) throw InvalidSpec("ExperimentConfig: n must be at least 1");
    if (p_grid.empty()) throw InvalidSpec("ExperimentConfig: p_grid must be nonempty");
    for (const auto p : p_grid)
        if (p < 1) throw InvalidSpec("ExperimentConfig: p values must be at least 1");
    if (replicates < 1) throw InvalidSpec("ExperimentConfig: replicates must be at least 1");
    if (methods.empty()) throw InvalidSpec("ExperimentConfig: methods must be nonempty");
    if (grid_size < 2) throw InvalidSpec("ExperimentConfig: grid_size must be at least 2");
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0))
        throw InvalidSpec("ExperimentConfig: max_failure_fraction must lie in [0, 1]");

    const bool uses_rho = study == Study::CorrelationReduction || study == Study::BicSweep ||
                          study == Study::FirstDfSweep;
    if (uses_rho) {
        if (rho_grid.empty())
            throw InvalidSpec("ExperimentConfig: rho_grid must be nonempty for this study");
        for (const double r : rho_grid)
            if (!(r >= 0.0) || r >= 1.0)
                throw InvalidSpec("ExperimentConfig: rho values must lie in [0, 1)");
    }
    const bool uses_s = study != Study::StiefelCoherence;
    if (uses_s) {
        if (s < 1) throw InvalidSpec("ExperimentConfig: s must be at least 1");
        for (const auto p : p_grid)
            if (s > p) throw InvalidSpec("ExperimentConfig: s exceeds a grid p");
    }
    if (study == Study::RecoveryRate) {
        for (const auto p : p_grid)
            if (p > n) throw InvalidSpec("ExperimentConfig: RecoveryRate requires n >= p");
    }
    if (study == Study::StiefelCoherence || study == Study::StiefelIcStudy) {
        for (const auto p : p_grid)
            if (n > p)
                throw InvalidSpec("ExperimentConfig: this study requires n <= p");
    }
    if (study == Study::StiefelIcStudy && q_max < 1)
        throw InvalidSpec("ExperimentConfig: q_max must be at least 1");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t rho_tag(double rho) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof rho);
    std::memcpy(&bits, &rho, sizeof bits);
    return bits;
}

struct TaskOutcome {
    std::vector<ResultRow> rows;
    std::vector<std::string> failures;
};

// Runs tasks 0..count-1, replicates in parallel, and assembles outcomes in
// task order so the result is independent of scheduling.
std::vector<TaskOutcome> run_tasks(int count,
                                   const std::function<TaskOutcome(int)>& task) {
    std::vector<TaskOutcome> out(static_cast<std::size_t>(count));
#pragma omp parallel for num_threads(kernels::thread_budget()) schedule(dynamic)
    for (int t = 0; t < count; ++t) {
        try {
            out[static_cast<std::size_t>(t)] = task(t);
        } catch (const std::exception& e) {
            out[static_cast<std::size_t>(t)].failures.push_back(e.what());
        }
    }
    return out;
}

ExperimentResult assemble(const ExperimentConfig& config, std::vector<TaskOutcome> outcomes,
                          int capacity) {
    ExperimentResult result;
    for (auto& o : outcomes) {
        for (auto& r : o.rows) result.rows.push_back(std::move(r));
        for (auto& f : o.failures) result.failures.push_back(std::move(f));
    }
    result.failed_units = static_cast<int>(result.failures.size());
    if (result.failed_units > config.max_failure_fraction * capacity) {
        std::string msg = "experiment failed: " + std::to_string(result.failed_units) + "/" +
                          std::to_string(capacity) + " units failed";
        for (std::size_t i = 0; i < result.failures.size() && i < 3; ++i)
            msg += "; " + result.failures[i];
        throw NumericError(msg);
    }
    append_aggregates(result.rows);
    return result;
}

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = sample_mean(v);
    double ss = 0.0;
    for (const double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto m = static_cast<double>(v.size());
    auto idx = static_cast<std::size_t>(std::ceil(q * m)) - 1;
    if (idx >= v.size()) idx = v.size() - 1;
    return v[idx];
}

}  // namespace

void append_aggregates(std::vector<ResultRow>& rows) {
    using Key = std::tuple<std::string, std::string, Eigen::Index, double, int>;
    std::vector<Key> order;
    std::map<Key, std::vector<const ResultRow*>> groups;
    for (const auto& r : rows) {
        if (r.aggregate) continue;
        Key k{r.study, r.method, r.p, r.rho, r.q};
        auto [it, inserted] = groups.try_emplace(k);
        if (inserted) order.push_back(k);
        it->second.push_back(&r);
    }
    std::vector<ResultRow> agg;
    for (const auto& k : order) {
        const auto& members = groups[k];
        ResultRow a;
        std::tie(a.study, a.method, a.p, a.rho, a.q) = k;
        a.replicate = -1;
        a.aggregate = true;
        std::map<std::string, std::pair<double, int>> sums;
        for (const ResultRow* r : members)
            for (const auto& [name, value] : r->metrics) {
                auto& slot = sums[name];
                slot.first += value;
                slot.second += 1;
            }
        for (const auto& [name, sum_count] : sums)
            a.metrics[name] = sum_count.first / static_cast<double>(sum_count.second);
        agg.push_back(std::move(a));
    }
    for (auto& a : agg) rows.push_back(std::move(a));
}

ExperimentResult run(const ExperimentConfig& config) {
    config.validate();
    switch (config.study) {
        case Study::CorrelationReduction: return run_correlation_reduction(config);
        case Study::BicSweep:
        case Study::FirstDfSweep: return run_recovery_sweep(config);
        case Study::StiefelIcStudy: return run_stiefel_ic_study(config);
        case Study::RecoveryRate: return run_recovery_rate(config);
        case Study::StiefelCoherence: return run_stiefel_coherence(config);
    }
    throw InvalidSpec("run: unknown study");
}

ExperimentResult run_correlation_reduction(const ExperimentConfig& config) {
    const auto np = static_cast<int>(config.p_grid.size());
    const auto nr = static_cast<int>(config.rho_grid.size());
    const int tasks = np * nr * config.replicates;
    const std::uint64_t tag = static_cast<std::uint64_t>(config.study);

    auto outcomes = run_tasks(tasks, [&](int t) -> TaskOutcome {
        const int rep = t % config.replicates;
        const int irho = (t / config.replicates) % nr;
        const int ip = t / (config.replicates * nr);
        const Eigen::Index p = config.p_grid[static_cast<std::size_t>(ip)];
        const double rho = config.rho_grid[static_cast<std::size_t>(irho)];
        const auto t0 = Clock::now();

        designs::DesignSpec spec;
        spec.kind = designs::DesignSpec::Kind::ConstantCorrelation;
        spec.n = config.n;
        spec.p = p;
        spec.rho = rho;
        spec.seed = derive_seed(config.master_seed,
                                {tag, static_cast<std::uint64_t>(ip), rho_tag(rho),
                                 static_cast<std::uint64_t>(rep), 0});
        const Eigen::MatrixXd X = designs::sample_design(spec);

        const std::uint64_t pair_seed =
            derive_seed(config.master_seed, {tag, static_cast<std::uint64_t>(ip), rho_tag(rho),
                                             static_cast<std::uint64_t>(rep), 1});
        const std::uint64_t total_pairs64 =
            static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(p - 1) / 2;
        const Eigen::Index npairs = std::min<Eigen::Index>(
            config.num_pairs, static_cast<Eigen::Index>(total_pairs64));
        const auto pairs = kernels::sample_pair_indices(p, npairs, pair_seed);

        const auto cor_x = kernels::pair_correlations(X, pairs);
        const Eigen::MatrixXd FX = puffer_design(X);
        const auto cor_fx = kernels::pair_correlations(FX, pairs);
        if (!cor_x.zero_variance.empty() || !cor_fx.zero_variance.empty())
            throw ZeroVarianceColumn("correlation undefined on sampled pair");

        const SupportSet support = SupportSet::leading(config.s);
        const double ic_before = diagnostics::ic_score(X, support);
        const double ic_after = diagnostics::ic_score(FX, support);

        ResultRow row;
        row.study = study_name(config.study);
        row.p = p;
        row.rho = rho;
        row.replicate = rep;
        row.metrics["mean_cor"] = sample_mean(cor_x.values);
        row.metrics["sd_cor"] = sample_sd(cor_x.values);
        row.metrics["mean_cor_after"] = sample_mean(cor_fx.values);
        row.metrics["sd_cor_after"] = sample_sd(cor_fx.values);
        row.metrics["ic_score_before"] = ic_before;
        row.metrics["ic_score_after"] = ic_after;
        row.metrics["runtime_seconds"] = seconds_since(t0);
        TaskOutcome out;
        out.rows.push_back(std::move(row));
        return out;
    });

    return assemble(config, std::move(outcomes), tasks);
}

ExperimentResult run_recovery_sweep(const ExperimentConfig& config) {
    const auto np = static_cast<int>(config.p_grid.size());
    const auto nr = static_cast<int>(config.rho_grid.size());
    const int tasks = np * nr * config.replicates;
    const std::uint64_t tag = static_cast<std::uint64_t>(config.study);

    auto outcomes = run_tasks(tasks, [&](int t) -> TaskOutcome {
        const int rep = t % config.replicates;
        const int irho = (t / config.replicates) % nr;
        const int ip = t / (config.replicates * nr);
        const Eigen::Index p = config.p_grid[static_cast<std::size_t>(ip)];
        const double rho = config.rho_grid[static_cast<std::size_t>(irho)];

        designs::DesignSpec spec;
        spec.kind = designs::DesignSpec::Kind::ConstantCorrelation;
        spec.n = config.n;
        spec.p = p;
        spec.rho = rho;
        spec.seed = derive_seed(config.master_seed,
                                {tag, static_cast<std::uint64_t>(ip), rho_tag(rho),
                                 static_cast<std::uint64_t>(rep), 0});
        const std::uint64_t noise_seed =
            derive_seed(config.master_seed, {tag, static_cast<std::uint64_t>(ip), rho_tag(rho),
                                             static_cast<std::uint64_t>(rep), 1});

        // Both methods see the same data: the support stays fixed at the
        // leading s columns while X and the noise are resampled per replicate.
        auto problem = std::make_shared<RegressionProblem>();
        problem->X = designs::sample_design(spec);
        problem->beta_star = designs::sample_beta_star(p, config.s, config.beta_magnitude, 0);
        problem->Y = problem->X * (*problem->beta_star) +
                     designs::sample_noise(config.n, config.sigma2, noise_seed);
        problem->sigma2 = config.sigma2;

        lasso::PathOptions popts;
        popts.grid_size = config.grid_size;
        popts.lambda_min_ratio = config.lambda_min_ratio;

        TaskOutcome out;
        for (const Method method : config.methods) {
            const auto m0 = Clock::now();
            try {
                lasso::LassoPath path;
                if (method == Method::PreconditionedLasso) {
                    const TransformedProblem tp = puffer_transform(problem);
                    const double dev = transform_orthonormality_error(tp.X_tilde);
                    if (!(dev < 1e-8))
                        throw NumericError("transformed design failed orthonormality check");
                    path = lasso::lasso_path(tp.X_tilde, tp.Y_tilde, popts);
                } else {
                    path = lasso::lasso_path(problem->X, problem->Y, popts);
                }
                const selection::SelectionResult sel =
                    config.study == Study::BicSweep
                        ? selection::ols_bic_select(path, problem->X, problem->Y, config.df_max)
                        : selection::first_with_df(path, config.first_df_k);
                const Eigen::VectorXd& beta_hat = path.solutions[sel.path_index].beta_hat;
                const diagnostics::SignReport sr =
                    diagnostics::sign_report(beta_hat, *problem->beta_star);

                ResultRow row;
                row.study = study_name(config.study);
                row.method = method_name(method);
                row.p = p;
                row.rho = rho;
                row.replicate = rep;
                row.metrics["false_negatives"] = sr.false_negatives;
                row.metrics["false_positives"] = sr.false_positives;
                row.metrics["l2_error"] = sr.l2_error;
                row.metrics["sign_match"] = sr.sign_match ? 1.0 : 0.0;
                row.metrics["selected_df"] = sel.df;
                row.metrics["selected_lambda"] = sel.chosen_lambda;
                // The transformation is known to behave poorly when p ≈ n.
                row.metrics["near_n_regime"] =
                    (2 * p >= config.n && p <= 2 * config.n) ? 1.0 : 0.0;
                row.metrics["runtime_seconds"] = seconds_since(m0);
                out.rows.push_back(std::move(row));
            } catch (const std::exception& e) {
                out.failures.push_back(study_name(config.study) + " p=" + std::to_string(p) +
                                       " rho=" + std::to_string(rho) + " rep=" +
                                       std::to_string(rep) + " " + method_name(method) + ": " +
                                       e.what());
            }
        }
        return out;
    });

    return assemble(config, std::move(outcomes),
                    tasks * static_cast<int>(config.methods.size()));
}

ExperimentResult run_stiefel_ic_study(const ExperimentConfig& config) {
    const auto np = static_cast<int>(config.p_grid.size());
    const int tasks = np * config.replicates;
    const std::uint64_t tag = static_cast<std::uint64_t>(config.study);

    auto outcomes = run_tasks(tasks, [&](int t) -> TaskOutcome {
        const int rep = t % config.replicates;
        const int ip = t / config.replicates;
        const Eigen::Index p = config.p_grid[static_cast<std::size_t>(ip)];
        const auto t0 = Clock::now();

        designs::DesignSpec spec;
        spec.kind = designs::DesignSpec::Kind::IidGaussian;
        spec.n = config.n;
        spec.p = p;
        spec.seed = derive_seed(config.master_seed, {tag, static_cast<std::uint64_t>(ip),
                                                     static_cast<std::uint64_t>(rep), 0});
        const Eigen::MatrixXd X = designs::sample_design(spec);
        const Eigen::MatrixXd V = puffer_design(X);
        const Eigen::MatrixXd Xc = diagnostics::center_and_scale(X);
        const Eigen::MatrixXd Vc = diagnostics::center_and_scale(V);

        TaskOutcome out;
        for (int q = 1; q <= config.q_max; ++q) {
            const SupportSet support = SupportSet::leading(q);
            double ic_x, ic_v;
            try {
                ic_x = diagnostics::ic_score(Xc, support);
                ic_v = diagnostics::ic_score(Vc, support);
            } catch (const SingularGram& e) {
                out.failures.push_back("StiefelIcStudy rep=" + std::to_string(rep) +
                                       " q=" + std::to_string(q) + ": " + e.what());
                continue;
            }
            ResultRow row;
            row.study = study_name(config.study);
            row.p = p;
            row.q = q;
            row.replicate = rep;
            row.metrics["ic_score_before"] = ic_x;  // iid Gaussian design
            row.metrics["ic_score_after"] = ic_v;   // its Stiefel projection
            row.metrics["ic_diff"] = ic_x - ic_v;
            out.rows.push_back(std::move(row));
        }
        const double elapsed = seconds_since(t0);
        for (auto& row : out.rows) row.metrics["runtime_seconds"] = elapsed;
        return out;
    });

    return assemble(config, std::move(outcomes), tasks * config.q_max);
}

ExperimentResult run_recovery_rate(const ExperimentConfig& config) {
    const auto np = static_cast<int>(config.p_grid.size());
    const int tasks = np * config.replicates;
    const std::uint64_t tag = static_cast<std::uint64_t>(config.study);
    const double gamma =
        config.ic_gamma > 0.0 ? config.ic_gamma : 1.2 / static_cast<double>(config.s);
    const double lambda_thm =
        std::sqrt(std::log(static_cast<double>(config.n)) / static_cast<double>(config.n));

    const bool run_standard =
        std::find(config.methods.begin(), config.methods.end(), Method::StandardLasso) !=
        config.methods.end();

    auto outcomes = run_tasks(tasks, [&](int t) -> TaskOutcome {
        const int rep = t % config.replicates;
        const int ip = t / config.replicates;
        const Eigen::Index p = config.p_grid[static_cast<std::size_t>(ip)];

        designs::DesignSpec spec;
        spec.kind = designs::DesignSpec::Kind::Covariance;
        spec.n = config.n;
        spec.p = p;
        spec.sigma = designs::ic_violating_sigma(p, config.s, gamma);
        spec.seed = derive_seed(config.master_seed, {tag, static_cast<std::uint64_t>(ip),
                                                     static_cast<std::uint64_t>(rep), 0});
        const std::uint64_t noise_seed =
            derive_seed(config.master_seed,
                        {tag, static_cast<std::uint64_t>(ip), static_cast<std::uint64_t>(rep), 1});

        auto problem = std::make_shared<RegressionProblem>();
        problem->X = designs::sample_design(spec);
        problem->beta_star = designs::sample_beta_star(p, config.s, config.beta_magnitude, 0);
        problem->Y = problem->X * (*problem->beta_star) +
                     designs::sample_noise(config.n, config.sigma2, noise_seed);
        problem->sigma2 = config.sigma2;

        const SupportSet support = SupportSet::leading(config.s);
        const double ic_before = diagnostics::ic_score(problem->X, support);

        // Theorem bound ingredients for this realization.
        const Eigen::MatrixXd gram = kernels::crossprod(problem->X, problem->X);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        const double c_min_scaled = eig.eigenvalues()(0) / static_cast<double>(config.n);
        const double bound =
            config.sigma2 > 0.0
                ? diagnostics::theorem1_bound(static_cast<double>(config.n),
                                              static_cast<double>(p), lambda_thm, config.sigma2,
                                              c_min_scaled)
                : 1.0;

        TaskOutcome out;
        {
            const auto m0 = Clock::now();
            const TransformedProblem tp = puffer_transform(problem);
            const double dev = transform_orthonormality_error(tp.X_tilde);
            if (!(dev < 1e-8))
                throw NumericError("transformed design failed orthonormality check");
            const lasso::LassoSolution sol =
                lasso::solve_lasso(tp.X_tilde, tp.Y_tilde, lambda_thm);
            const diagnostics::SignReport sr =
                diagnostics::sign_report(sol.beta_hat, *problem->beta_star);
            ResultRow row;
            row.study = study_name(config.study);
            row.method = method_name(Method::PreconditionedLasso);
            row.p = p;
            row.replicate = rep;
            row.metrics["sign_match"] = sr.sign_match ? 1.0 : 0.0;
            row.metrics["false_negatives"] = sr.false_negatives;
            row.metrics["false_positives"] = sr.false_positives;
            row.metrics["l2_error"] = sr.l2_error;
            row.metrics["ic_score_before"] = ic_before;
            row.metrics["ic_violated"] = ic_before > 1.0 ? 1.0 : 0.0;
            row.metrics["lambda"] = lambda_thm;
            row.metrics["prob_bound"] = bound;
            row.metrics["runtime_seconds"] = seconds_since(m0);
            out.rows.push_back(std::move(row));
        }
        if (run_standard) {
            const auto m0 = Clock::now();
            lasso::PathOptions popts;
            popts.grid_size = config.grid_size;
            popts.lambda_min_ratio = config.lambda_min_ratio;
            const lasso::LassoPath path = lasso::lasso_path(problem->X, problem->Y, popts);
            // Best case for the standard Lasso: recovery counts if any grid
            // point matches the true signs.
            bool recovered = false;
            int best_errors = INT_MAX;
            double best_l2 = 0.0;
            for (const auto& sol : path.solutions) {
                const diagnostics::SignReport sr =
                    diagnostics::sign_report(sol.beta_hat, *problem->beta_star);
                if (sr.sign_match) recovered = true;
                const int errs = sr.false_negatives + sr.false_positives;
                if (errs < best_errors) {
                    best_errors = errs;
                    best_l2 = sr.l2_error;
                }
            }
            ResultRow row;
            row.study = study_name(config.study);
            row.method = method_name(Method::StandardLasso);
            row.p = p;
            row.replicate = rep;
            row.metrics["sign_match"] = recovered ? 1.0 : 0.0;
            row.metrics["min_sign_errors"] = best_errors;
            row.metrics["l2_error"] = best_l2;
            row.metrics["ic_score_before"] = ic_before;
            row.metrics["runtime_seconds"] = seconds_since(m0);
            out.rows.push_back(std::move(row));
        }
        return out;
    });

    return assemble(config, std::move(outcomes),
                    tasks * static_cast<int>(config.methods.size()));
}

ExperimentResult run_stiefel_coherence(const ExperimentConfig& config) {
    const auto np = static_cast<int>(config.p_grid.size());
    const int tasks = np * config.replicates;
    const std::uint64_t tag = static_cast<std::uint64_t>(config.study);

    auto outcomes = run_tasks(tasks, [&](int t) -> TaskOutcome {
        const int rep = t % config.replicates;
        const int ip = t / config.replicates;
        const Eigen::Index p = config.p_grid[static_cast<std::size_t>(ip)];
        const auto t0 = Clock::now();

        const std::uint64_t stiefel_seed = derive_seed(
            config.master_seed,
            {tag, static_cast<std::uint64_t>(ip), static_cast<std::uint64_t>(rep), 0});
        const std::uint64_t gauss_seed = derive_seed(
            config.master_seed,
            {tag, static_cast<std::uint64_t>(ip), static_cast<std::uint64_t>(rep), 1});
        const std::uint64_t pair_seed = derive_seed(
            config.master_seed,
            {tag, static_cast<std::uint64_t>(ip), static_cast<std::uint64_t>(rep), 2});

        const Eigen::MatrixXd V = designs::sample_stiefel_uniform(config.n, p, stiefel_seed);
        designs::DesignSpec gspec;
        gspec.kind = designs::DesignSpec::Kind::IidGaussian;
        gspec.n = config.n;
        gspec.p = p;
        gspec.seed = gauss_seed;
        const Eigen::MatrixXd G = designs::sample_design(gspec);

        const std::uint64_t total_pairs64 =
            static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(p - 1) / 2;
        const Eigen::Index npairs = std::min<Eigen::Index>(
            config.coherence_pairs, static_cast<Eigen::Index>(total_pairs64));
        const auto pairs = kernels::sample_pair_indices(p, npairs, pair_seed);

        auto coherences = [&](const Eigen::MatrixXd& m, std::vector<double>& raw,
                              std::vector<double>& normalized) {
            raw.clear();
            normalized.clear();
            raw.reserve(pairs.size());
            normalized.reserve(pairs.size());
            for (const auto& [i, j] : pairs) {
                const double dot = m.col(i).dot(m.col(j));
                const double ni = m.col(i).norm();
                const double nj = m.col(j).norm();
                raw.push_back(std::abs(dot));
                normalized.push_back(ni > 0 && nj > 0 ? std::abs(dot) / (ni * nj) : 0.0);
            }
        };

        std::vector<double> raw, normalized;
        TaskOutcome out;
        {
            coherences(V, raw, normalized);
            ResultRow row;
            row.study = study_name(config.study);
            row.method = "Stiefel";
            row.p = p;
            row.replicate = rep;
            row.metrics["coh_raw_max"] = raw.empty() ? 0.0 : *std::max_element(raw.begin(), raw.end());
            row.metrics["coh_raw_q99"] = quantile(raw, 0.99);
            row.metrics["coh_norm_max"] =
                normalized.empty() ? 0.0 : *std::max_element(normalized.begin(), normalized.end());
            row.metrics["coh_norm_q99"] = quantile(normalized, 0.99);
            row.metrics["runtime_seconds"] = seconds_since(t0);
            out.rows.push_back(std::move(row));
        }
        {
            coherences(G, raw, normalized);
            ResultRow row;
            row.study = study_name(config.study);
            row.method = "Gaussian";
            row.p = p;
            row.replicate = rep;
            row.metrics["coh_norm_max"] =
                normalized.empty() ? 0.0 : *std::max_element(normalized.begin(), normalized.end());
            row.metrics["coh_norm_q99"] = quantile(normalized, 0.99);
            out.rows.push_back(std::move(row));
        }
        return out;
    });

    return assemble(config, std::move(outcomes), tasks);
}

}  // namespace puffer::experiments
