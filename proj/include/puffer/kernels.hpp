#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

// Data-parallel kernels behind the numerical hot paths: Gram products for the
// preconditioner and the IC diagnostics, transposed mat-vecs for KKT checks,
// and Pearson correlations over sampled column pairs.
//
// Every kernel exists twice: kernels::serial::* is the single-threaded
// reference, kernels::omp::* the OpenMP version. Both compute each output
// entry with the identical expression, so results match bitwise regardless of
// thread count. The unqualified entry points dispatch to the OpenMP version
// when the thread budget and problem size warrant it.

namespace puffer::kernels {

using IndexPair = std::pair<Eigen::Index, Eigen::Index>;

/// Per-pair Pearson correlation output; `zero_variance` marks pairs whose
/// correlation is undefined (a touched column has zero variance).
struct PairCorrelations {
    std::vector<double> values;
    std::vector<Eigen::Index> zero_variance;
};

/// Threads available to parallel kernels: omp_get_max_threads() capped by the
/// PUFFER_THREADS environment variable. Re-read on every call so tests can
/// flip the cap at runtime.
int thread_budget();

/// True when called from inside an OpenMP parallel region (nested kernels then
/// fall back to their serial bodies).
bool in_parallel_region();

namespace serial {

/// aᵀ·b for matrices with a common row count.
Eigen::MatrixXd crossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                          const Eigen::Ref<const Eigen::MatrixXd>& b);

/// a·diag(scale)·bᵀ (a: n×d, scale: d, b: p×d → n×p).
Eigen::MatrixXd scaled_tcrossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                  const Eigen::Ref<const Eigen::VectorXd>& scale,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b);

/// aᵀ·x.
Eigen::VectorXd gemv_transpose(const Eigen::Ref<const Eigen::MatrixXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& x);

/// Pearson correlations of the given column pairs of x (columns centered
/// internally).
PairCorrelations pair_correlations(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const std::vector<IndexPair>& pairs);

/// Columns shifted to mean zero and scaled to unit standard deviation
/// (n-1 convention); indices of zero-variance columns are reported instead of
/// scaled.
Eigen::MatrixXd standardize_columns(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    std::vector<Eigen::Index>& zero_variance);

}  // namespace serial

namespace omp {

Eigen::MatrixXd crossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                          const Eigen::Ref<const Eigen::MatrixXd>& b);
Eigen::MatrixXd scaled_tcrossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                  const Eigen::Ref<const Eigen::VectorXd>& scale,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b);
Eigen::VectorXd gemv_transpose(const Eigen::Ref<const Eigen::MatrixXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& x);
PairCorrelations pair_correlations(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const std::vector<IndexPair>& pairs);
Eigen::MatrixXd standardize_columns(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    std::vector<Eigen::Index>& zero_variance);

}  // namespace omp

Eigen::MatrixXd crossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                          const Eigen::Ref<const Eigen::MatrixXd>& b);
Eigen::MatrixXd scaled_tcrossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                  const Eigen::Ref<const Eigen::VectorXd>& scale,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b);
Eigen::VectorXd gemv_transpose(const Eigen::Ref<const Eigen::MatrixXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& x);
PairCorrelations pair_correlations(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const std::vector<IndexPair>& pairs);
Eigen::MatrixXd standardize_columns(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    std::vector<Eigen::Index>& zero_variance);

/// Distinct unordered column pairs (i < j) drawn uniformly without
/// replacement, reproducible from the seed.
std::vector<IndexPair> sample_pair_indices(Eigen::Index p, Eigen::Index num_pairs,
                                           std::uint64_t seed);

}  // namespace puffer::kernels
