// Command-line front end: precondition / fit / diagnose / simulate /
// ic-score / sample. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 numerical failure.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "puffer/core.hpp"
#include "puffer/designs.hpp"
#include "puffer/diagnostics.hpp"
#include "puffer/errors.hpp"
#include "puffer/experiments.hpp"
#include "puffer/io.hpp"
#include "puffer/lasso.hpp"
#include "puffer/selection.hpp"

namespace {

using puffer::io::Json;

constexpr std::uint64_t kDefaultSeed = 42;

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void add_timestamp(Json& j, bool no_timestamp) {
    if (!no_timestamp) j["generated_at"] = iso_timestamp();
}

void emit_json(const Json& j, const std::string& output) {
    const std::string text = j.dump(2) + "\n";
    if (output.empty()) {
        std::cout << text;
    } else {
        puffer::io::write_text_file(output, text);
    }
}

// "1,4,7" (1-based) → 0-based indices; "+,-,+" → signs.
puffer::SupportSet parse_support(const std::string& spec, const std::string& signs_spec,
                                 Eigen::Index p) {
    puffer::SupportSet support;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        char* end = nullptr;
        const long v = std::strtol(tok.c_str(), &end, 10);
        if (end == tok.c_str() || *end != '\0')
            throw puffer::InvalidSpec("cannot parse support index '" + tok + "'");
        support.indices.push_back(static_cast<Eigen::Index>(v - 1));
    }
    if (signs_spec.empty()) {
        support.signs.assign(support.indices.size(), 1);
    } else {
        std::stringstream sg(signs_spec);
        while (std::getline(sg, tok, ',')) {
            if (tok == "+" || tok == "+1" || tok == "1")
                support.signs.push_back(1);
            else if (tok == "-" || tok == "-1")
                support.signs.push_back(-1);
            else
                throw puffer::InvalidSpec("cannot parse sign '" + tok + "'");
        }
    }
    support.validate(p);
    return support;
}

Json report_to_json(const puffer::diagnostics::DiagnosticsReport& rep, bool has_beta) {
    Json j;
    j["ic_score"] = rep.ic_score;
    j["eta"] = rep.eta;
    j["c_min"] = rep.c_min;
    j["c_min_scaled"] = rep.c_min_scaled;
    j["d_min_proxy"] = rep.d_min_proxy;
    if (has_beta)
        j["m_beta"] = rep.m_beta;
    else
        j["m_beta"] = nullptr;
    j["psi"] = rep.psi;
    j["prob_bound"] = rep.prob_bound;
    return j;
}

struct FitArgs {
    std::string input, y_col, output;
    bool precondition = false;
    double lambda = 0.0;
    bool lambda_set = false;
    bool path = false;
    int grid = 100;
    double lambda_min_ratio = 0.0;
    std::vector<std::string> select;
    double tikhonov = 0.0;
    double tol = 1e-7;
    int max_iter = 10000;
    bool no_timestamp = false;
};

int run_fit(const FitArgs& a) {
    if (a.lambda_set == a.path) {
        std::cerr << "ERROR 1: fit requires exactly one of --lambda or --path\n";
        return 1;
    }
    const auto problem =
        std::make_shared<const puffer::RegressionProblem>(puffer::io::load_csv(a.input, a.y_col));

    const Eigen::MatrixXd* X = &problem->X;
    const Eigen::VectorXd* Y = &problem->Y;
    std::optional<puffer::TransformedProblem> tp;
    if (a.precondition) {
        tp = puffer::puffer_transform(problem, puffer::kDefaultRankTolerance, a.tikhonov);
        X = &tp->X_tilde;
        Y = &tp->Y_tilde;
    }

    puffer::lasso::SolveOptions sopts;
    sopts.tol = a.tol;
    sopts.max_iter = a.max_iter;

    Json j;
    j["command"] = "fit";
    add_timestamp(j, a.no_timestamp);
    j["input"] = a.input;
    j["preconditioned"] = a.precondition;

    auto solution_json = [](const puffer::lasso::LassoSolution& sol) {
        Json s;
        s["lambda"] = sol.lambda;
        s["active_count"] = sol.active_count;
        s["kkt_residual"] = sol.kkt_residual;
        s["iterations"] = sol.iterations;
        s["converged"] = sol.converged;
        s["coefficients"] = std::vector<double>(sol.beta_hat.data(),
                                                sol.beta_hat.data() + sol.beta_hat.size());
        return s;
    };

    if (a.lambda_set) {
        const double lam_max = puffer::lasso::lambda_max(*X, *Y);
        if (a.lambda >= lam_max) {
            // Above lambda_max the solution is identically zero.
            puffer::lasso::LassoSolution sol;
            sol.lambda = a.lambda;
            sol.beta_hat = Eigen::VectorXd::Zero(X->cols());
            j["solution"] = solution_json(sol);
        } else {
            j["solution"] = solution_json(puffer::lasso::solve_lasso(*X, *Y, a.lambda, sopts));
        }
        emit_json(j, a.output);
        return 0;
    }

    puffer::lasso::PathOptions popts;
    popts.grid_size = a.grid;
    popts.lambda_min_ratio = a.lambda_min_ratio;
    popts.solve = sopts;
    const puffer::lasso::LassoPath path = puffer::lasso::lasso_path(*X, *Y, popts);

    if (a.select.empty()) {
        std::cerr << "ERROR 1: --path requires --select {ols-bic|first-df K}\n";
        return 1;
    }
    puffer::selection::SelectionResult sel;
    if (a.select[0] == "ols-bic") {
        sel = puffer::selection::ols_bic_select(path, problem->X, problem->Y);
    } else if (a.select[0] == "first-df") {
        int k = 10;
        if (a.select.size() > 1) k = std::stoi(a.select[1]);
        sel = puffer::selection::first_with_df(path, k);
    } else {
        std::cerr << "ERROR 1: unknown selection rule '" << a.select[0] << "'\n";
        return 1;
    }

    j["solution"] = solution_json(path.solutions[sel.path_index]);
    Json js;
    js["rule"] = sel.rule == puffer::selection::Rule::OlsBic ? "ols-bic" : "first-df";
    js["chosen_lambda"] = sel.chosen_lambda;
    js["df"] = sel.df;
    Json support = Json::array();
    for (const auto idx : sel.chosen_support) support.push_back(idx + 1);
    js["support"] = support;
    if (!sel.bic_scores.empty()) {
        Json scores;
        for (const auto& [df, bic] : sel.bic_scores) scores[std::to_string(df)] = bic;
        js["bic_scores"] = scores;
    }
    if (!sel.warnings.empty()) js["warnings"] = sel.warnings;
    j["selection"] = js;
    j["lambda_max"] = path.lambda_max;
    emit_json(j, a.output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Puffer-transformed sparse regression toolkit"};
    app.require_subcommand(1);

    // precondition
    auto* pre = app.add_subcommand("precondition", "Puffer-transform a dataset");
    std::string pre_input, pre_ycol, pre_output, pre_sidecar;
    double pre_tikhonov = 0.0, pre_rank_tol = puffer::kDefaultRankTolerance;
    bool pre_no_ts = false;
    pre->add_option("--input", pre_input, "input CSV")->required();
    pre->add_option("--y-col", pre_ycol, "response column (name or 1-based index)")->required();
    pre->add_option("--output", pre_output, "output CSV for the transformed problem")->required();
    pre->add_option("--tikhonov", pre_tikhonov, "Tikhonov delta added to squared singular values");
    pre->add_option("--rank-tol", pre_rank_tol, "relative singular value cutoff");
    pre->add_option("--sidecar", pre_sidecar, "sidecar JSON path (default: <output>.json)");
    pre->add_flag("--no-timestamp", pre_no_ts, "omit the timestamp field");

    // fit
    auto* fit = app.add_subcommand("fit", "solve the Lasso, optionally preconditioned");
    FitArgs fa;
    fit->add_option("--input", fa.input, "input CSV")->required();
    fit->add_option("--y-col", fa.y_col, "response column")->required();
    fit->add_flag("--precondition", fa.precondition, "fit on the Puffer-transformed problem");
    auto* lam_opt = fit->add_option("--lambda", fa.lambda, "single penalty value");
    fit->add_flag("--path", fa.path, "fit a full regularization path");
    fit->add_option("--grid", fa.grid, "path grid size");
    fit->add_option("--lambda-min-ratio", fa.lambda_min_ratio, "smallest lambda as a fraction");
    fit->add_option("--select", fa.select,
                    "model selection rule: 'ols-bic' or 'first-df K'")
        ->expected(1, 2);
    fit->add_option("--tikhonov", fa.tikhonov, "Tikhonov delta for --precondition");
    fit->add_option("--tol", fa.tol, "KKT tolerance");
    fit->add_option("--max-iter", fa.max_iter, "maximum coordinate-descent sweeps");
    fit->add_option("--output", fa.output, "output JSON path (default: stdout)");
    fit->add_flag("--no-timestamp", fa.no_timestamp, "omit the timestamp field");

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "irrepresentable-condition diagnostics");
    std::string dg_input, dg_ycol, dg_support, dg_signs, dg_output;
    bool dg_center = false, dg_no_ts = false;
    double dg_lambda = 0.0, dg_sigma2 = 0.0;
    diag->add_option("--input", dg_input, "input CSV")->required();
    diag->add_option("--y-col", dg_ycol, "response column")->required();
    diag->add_option("--support", dg_support, "1-based support indices, comma separated")
        ->required();
    diag->add_option("--signs", dg_signs, "support signs, e.g. +,+,-");
    diag->add_flag("--center-scale", dg_center, "center and scale columns first");
    diag->add_option("--lambda", dg_lambda, "penalty for the psi bound (default sqrt(log n / n))");
    diag->add_option("--sigma2", dg_sigma2, "noise variance (default: estimated from OLS refit)");
    diag->add_option("--output", dg_output, "output JSON path (default: stdout)");
    diag->add_flag("--no-timestamp", dg_no_ts, "omit the timestamp field");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a Monte-Carlo study from a JSON config");
    std::string sim_config, sim_out;
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false, sim_no_ts = false;
    sim->add_option("--config", sim_config, "experiment config JSON")->required();
    sim->add_option("--out", sim_out, "output CSV path")->required();
    sim->add_option("--seed", sim_seed, "override the config master seed")
        ->each([&](const std::string&) { sim_seed_set = true; });
    sim->add_flag("--no-timestamp", sim_no_ts, "omit the timestamp comment");

    // ic-score
    auto* ic = app.add_subcommand("ic-score", "irrepresentable-condition score of a design");
    std::string ic_input, ic_ycol, ic_support, ic_signs, ic_output;
    bool ic_center = false;
    ic->add_option("--input", ic_input, "input CSV (design matrix)")->required();
    ic->add_option("--y-col", ic_ycol, "response column to exclude, if present");
    ic->add_option("--support", ic_support, "1-based support indices")->required();
    ic->add_option("--signs", ic_signs, "support signs");
    ic->add_flag("--center-scale", ic_center, "center and scale columns first");
    ic->add_option("--output", ic_output, "output JSON path (default: stdout)");

    // sample
    auto* smp = app.add_subcommand("sample", "generate a random design matrix");
    std::string smp_kind, smp_output;
    Eigen::Index smp_n = 0, smp_p = 0;
    double smp_rho = 0.0;
    std::uint64_t smp_seed = kDefaultSeed;
    smp->add_option("kind", smp_kind, "gaussian | stiefel | constant-cor")->required();
    smp->add_option("--n", smp_n, "rows")->required();
    smp->add_option("--p", smp_p, "columns")->required();
    smp->add_option("--rho", smp_rho, "constant correlation (constant-cor only)");
    smp->add_option("--seed", smp_seed, "random seed");
    smp->add_option("--output", smp_output, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (pre->parsed()) {
            const auto problem = std::make_shared<const puffer::RegressionProblem>(
                puffer::io::load_csv(pre_input, pre_ycol));
            const puffer::TransformedProblem tp =
                puffer::puffer_transform(problem, pre_rank_tol, pre_tikhonov);
            puffer::io::write_problem_csv(pre_output, tp.X_tilde, tp.Y_tilde);
            Json side;
            side["command"] = "precondition";
            add_timestamp(side, pre_no_ts);
            side["n"] = tp.X_tilde.rows();
            side["p"] = tp.X_tilde.cols();
            side["rank"] = tp.decomposition.rank;
            side["rank_tolerance"] = tp.decomposition.rank_tolerance;
            side["tikhonov_delta"] = tp.decomposition.tikhonov_delta;
            side["singular_values"] = std::vector<double>(
                tp.decomposition.D.data(), tp.decomposition.D.data() + tp.decomposition.D.size());
            emit_json(side, pre_sidecar.empty() ? pre_output + ".json" : pre_sidecar);
            return 0;
        }

        if (fit->parsed()) {
            fa.lambda_set = lam_opt->count() > 0;
            return run_fit(fa);
        }

        if (diag->parsed()) {
            const puffer::RegressionProblem problem = puffer::io::load_csv(dg_input, dg_ycol);
            Eigen::MatrixXd X = problem.X;
            if (dg_center) X = puffer::diagnostics::center_and_scale(X);
            const puffer::SupportSet support = parse_support(dg_support, dg_signs, X.cols());

            const double n = static_cast<double>(X.rows());
            const double lambda = dg_lambda > 0.0 ? dg_lambda : std::sqrt(std::log(n) / n);
            double sigma2 = dg_sigma2;
            if (!(sigma2 > 0.0)) {
                const puffer::selection::OlsFit fit0 =
                    puffer::selection::ols_refit(X, problem.Y, support.indices);
                const double dof =
                    std::max(1.0, n - static_cast<double>(support.size()) - 1.0);
                sigma2 = std::max(fit0.rss / dof, 1e-12);
            }

            const puffer::PufferDecomposition dec = puffer::thin_svd(X);
            const Eigen::MatrixXd FX = puffer::transformed_design(dec);
            puffer::PufferDecomposition dec_after = dec;
            dec_after.D.setOnes(dec.rank);

            Json j;
            j["command"] = "diagnose";
            add_timestamp(j, dg_no_ts);
            j["n"] = X.rows();
            j["p"] = X.cols();
            j["lambda"] = lambda;
            j["sigma2"] = sigma2;
            Json sup = Json::array();
            for (const auto idx : support.indices) sup.push_back(idx + 1);
            j["support"] = sup;
            j["before"] = report_to_json(
                puffer::diagnostics::make_report(X, support, dec, lambda, sigma2,
                                                 problem.beta_star),
                problem.beta_star.has_value());
            j["after"] = report_to_json(
                puffer::diagnostics::make_report(FX, support, dec_after, lambda, sigma2,
                                                 problem.beta_star),
                problem.beta_star.has_value());
            emit_json(j, dg_output);
            return 0;
        }

        if (sim->parsed()) {
            puffer::experiments::ExperimentConfig cfg =
                puffer::io::load_experiment_config(sim_config);
            if (sim_seed_set) cfg.master_seed = sim_seed;
            const puffer::experiments::ExperimentResult result =
                puffer::experiments::run(cfg);
            puffer::io::write_text_file(sim_out, puffer::io::result_to_csv(result));
            for (const auto& f : result.failures)
                std::cerr << "warning: " << f << "\n";
            std::cerr << "wrote " << result.rows.size() << " rows to " << sim_out << "\n";
            return 0;
        }

        if (ic->parsed()) {
            Eigen::MatrixXd X;
            if (ic_ycol.empty()) {
                X = puffer::io::read_csv(ic_input).values;
            } else {
                X = puffer::io::load_csv(ic_input, ic_ycol).X;
            }
            if (!X.allFinite()) throw puffer::NonFiniteInput("design contains non-finite values");
            if (ic_center) X = puffer::diagnostics::center_and_scale(X);
            const puffer::SupportSet support = parse_support(ic_support, ic_signs, X.cols());
            const double score = puffer::diagnostics::ic_score(X, support);
            Json j;
            j["ic_score"] = score;
            j["eta"] = 1.0 - score;
            j["holds"] = score < 1.0;
            emit_json(j, ic_output);
            return 0;
        }

        if (smp->parsed()) {
            puffer::designs::DesignSpec spec;
            spec.n = smp_n;
            spec.p = smp_p;
            spec.seed = smp_seed;
            if (smp_kind == "gaussian") {
                spec.kind = puffer::designs::DesignSpec::Kind::IidGaussian;
            } else if (smp_kind == "stiefel") {
                spec.kind = puffer::designs::DesignSpec::Kind::StiefelUniform;
            } else if (smp_kind == "constant-cor") {
                spec.kind = puffer::designs::DesignSpec::Kind::ConstantCorrelation;
                spec.rho = smp_rho;
            } else {
                std::cerr << "ERROR 1: unknown sample kind '" << smp_kind << "'\n";
                return 1;
            }
            puffer::io::write_matrix_csv(smp_output, puffer::designs::sample_design(spec));
            return 0;
        }
    } catch (const puffer::DataError& e) {
        std::cerr << "ERROR 2: " << e.what() << "\n";
        return 2;
    } catch (const puffer::NumericError& e) {
        std::cerr << "ERROR 3: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "ERROR 3: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
