#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace puffer::experiments {

enum class Study {
    CorrelationReduction,
    BicSweep,
    FirstDfSweep,
    StiefelIcStudy,
    RecoveryRate,
    StiefelCoherence,
};

enum class Method { StandardLasso, PreconditionedLasso };

std::string study_name(Study study);
Study study_from_name(const std::string& name);
std::string method_name(Method method);
Method method_from_name(const std::string& name);

/// Declarative Monte-Carlo sweep. Identical configs (including master_seed)
/// produce bitwise-identical result rows, independent of thread count.
struct ExperimentConfig {
    Study study = Study::CorrelationReduction;
    Eigen::Index n = 250;
    std::vector<Eigen::Index> p_grid;
    std::vector<double> rho_grid;
    Eigen::Index s = 20;
    double beta_magnitude = 10.0;
    double sigma2 = 1.0;
    int replicates = 10;
    std::vector<Method> methods = {Method::StandardLasso, Method::PreconditionedLasso};
    std::uint64_t master_seed = 42;

    int grid_size = 100;            // lasso path grid
    double lambda_min_ratio = 0.0;  // 0 = solver default
    int df_max = 40;                // OLS-BIC df range
    int first_df_k = 10;            // first-with-df rule
    Eigen::Index num_pairs = 10000; // correlation sampling
    int q_max = 30;                 // Stiefel IC study support sizes
    double ic_gamma = 0.0;          // recovery-rate cross correlation; 0 = 1.2/s
    Eigen::Index coherence_pairs = 1000;
    double max_failure_fraction = 0.10;

    void validate() const;
};

/// One table row keyed by (study, method, p, rho, q, replicate). Aggregate
/// rows carry replicate = -1 and the arithmetic mean of their group's
/// metrics.
struct ResultRow {
    std::string study;
    std::string method;
    Eigen::Index p = 0;
    double rho = 0.0;
    int q = 0;
    int replicate = -1;
    bool aggregate = false;
    std::map<std::string, double> metrics;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    int failed_units = 0;
    std::vector<std::string> failures;
};

ExperimentResult run(const ExperimentConfig& config);

ExperimentResult run_correlation_reduction(const ExperimentConfig& config);
ExperimentResult run_recovery_sweep(const ExperimentConfig& config);
ExperimentResult run_stiefel_ic_study(const ExperimentConfig& config);
ExperimentResult run_recovery_rate(const ExperimentConfig& config);
ExperimentResult run_stiefel_coherence(const ExperimentConfig& config);

/// Appends one aggregate row per distinct (study, method, p, rho, q) group,
/// in first-appearance order. Exposed for testing.
void append_aggregates(std::vector<ResultRow>& rows);

}  // namespace puffer::experiments
