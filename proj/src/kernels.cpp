#include "puffer/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_set>

#include "puffer/errors.hpp"
#include "puffer/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace puffer::kernels {

int thread_budget() {
#ifdef _OPENMP
    int t = omp_get_max_threads();
#else
    int t = 1;
#endif
    if (const char* env = std::getenv("PUFFER_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1 && cap < t) t = static_cast<int>(cap);
    }
    return t;
}

bool in_parallel_region() {
#ifdef _OPENMP
    return omp_in_parallel() != 0;
#else
    return false;
#endif
}

namespace {

// One output entry per task keeps serial and OpenMP results bitwise equal:
// the inner expression (Eigen dot / gemv) is identical either way.

double pair_correlation_one(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Index i,
                            Eigen::Index j, bool& undefined) {
    const Eigen::Index n = x.rows();
    const double mi = x.col(i).mean();
    const double mj = x.col(j).mean();
    double sii = 0.0, sjj = 0.0, sij = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        const double di = x(r, i) - mi;
        const double dj = x(r, j) - mj;
        sii += di * di;
        sjj += dj * dj;
        sij += di * dj;
    }
    if (sii == 0.0 || sjj == 0.0) {
        undefined = true;
        return 0.0;
    }
    undefined = false;
    return sij / std::sqrt(sii * sjj);
}

void standardize_column_one(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::MatrixXd& out,
                            Eigen::Index j, bool& zero_var) {
    const Eigen::Index n = x.rows();
    const double mean = x.col(j).mean();
    double ss = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        const double d = x(r, j) - mean;
        ss += d * d;
    }
    if (ss == 0.0 || n < 2) {
        zero_var = true;
        out.col(j).setZero();
        return;
    }
    zero_var = false;
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    for (Eigen::Index r = 0; r < n; ++r) out(r, j) = (x(r, j) - mean) / sd;
}

}  // namespace

namespace serial {

Eigen::MatrixXd crossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                          const Eigen::Ref<const Eigen::MatrixXd>& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("crossprod: row counts differ");
    Eigen::MatrixXd c(a.cols(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j)
        for (Eigen::Index i = 0; i < a.cols(); ++i) c(i, j) = a.col(i).dot(b.col(j));
    return c;
}

Eigen::MatrixXd scaled_tcrossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                  const Eigen::Ref<const Eigen::VectorXd>& scale,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b) {
    if (a.cols() != scale.size() || b.cols() != scale.size())
        throw DimensionMismatch("scaled_tcrossprod: inner dimensions differ");
    Eigen::MatrixXd c(a.rows(), b.rows());
    Eigen::VectorXd w(scale.size());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        w = scale.cwiseProduct(b.row(j).transpose());
        c.col(j).noalias() = a * w;
    }
    return c;
}

Eigen::VectorXd gemv_transpose(const Eigen::Ref<const Eigen::MatrixXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (a.rows() != x.size()) throw DimensionMismatch("gemv_transpose: size mismatch");
    Eigen::VectorXd y(a.cols());
    for (Eigen::Index i = 0; i < a.cols(); ++i) y(i) = a.col(i).dot(x);
    return y;
}

PairCorrelations pair_correlations(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const std::vector<IndexPair>& pairs) {
    PairCorrelations out;
    out.values.resize(pairs.size());
    std::vector<char> bad(pairs.size(), 0);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        bool undefined = false;
        out.values[k] = pair_correlation_one(x, pairs[k].first, pairs[k].second, undefined);
        bad[k] = undefined ? 1 : 0;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k)
        if (bad[k]) out.zero_variance.push_back(static_cast<Eigen::Index>(k));
    return out;
}

Eigen::MatrixXd standardize_columns(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    std::vector<Eigen::Index>& zero_variance) {
    Eigen::MatrixXd out(x.rows(), x.cols());
    std::vector<char> bad(static_cast<std::size_t>(x.cols()), 0);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        bool zv = false;
        standardize_column_one(x, out, j, zv);
        bad[static_cast<std::size_t>(j)] = zv ? 1 : 0;
    }
    zero_variance.clear();
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        if (bad[static_cast<std::size_t>(j)]) zero_variance.push_back(j);
    return out;
}

}  // namespace serial

namespace omp {

Eigen::MatrixXd crossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                          const Eigen::Ref<const Eigen::MatrixXd>& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("crossprod: row counts differ");
    Eigen::MatrixXd c(a.cols(), b.cols());
    const Eigen::Index total = a.cols() * b.cols();
#pragma omp parallel for num_threads(thread_budget()) schedule(static)
    for (Eigen::Index t = 0; t < total; ++t) {
        const Eigen::Index i = t % a.cols();
        const Eigen::Index j = t / a.cols();
        c(i, j) = a.col(i).dot(b.col(j));
    }
    return c;
}

Eigen::MatrixXd scaled_tcrossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                  const Eigen::Ref<const Eigen::VectorXd>& scale,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b) {
    if (a.cols() != scale.size() || b.cols() != scale.size())
        throw DimensionMismatch("scaled_tcrossprod: inner dimensions differ");
    Eigen::MatrixXd c(a.rows(), b.rows());
#pragma omp parallel for num_threads(thread_budget()) schedule(static)
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        Eigen::VectorXd w = scale.cwiseProduct(b.row(j).transpose());
        c.col(j).noalias() = a * w;
    }
    return c;
}

Eigen::VectorXd gemv_transpose(const Eigen::Ref<const Eigen::MatrixXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (a.rows() != x.size()) throw DimensionMismatch("gemv_transpose: size mismatch");
    Eigen::VectorXd y(a.cols());
#pragma omp parallel for num_threads(thread_budget()) schedule(static)
    for (Eigen::Index i = 0; i < a.cols(); ++i) y(i) = a.col(i).dot(x);
    return y;
}

PairCorrelations pair_correlations(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const std::vector<IndexPair>& pairs) {
    PairCorrelations out;
    out.values.resize(pairs.size());
    std::vector<char> bad(pairs.size(), 0);
    const Eigen::Index total = static_cast<Eigen::Index>(pairs.size());
#pragma omp parallel for num_threads(thread_budget()) schedule(static)
    for (Eigen::Index k = 0; k < total; ++k) {
        bool undefined = false;
        out.values[static_cast<std::size_t>(k)] =
            pair_correlation_one(x, pairs[static_cast<std::size_t>(k)].first,
                                 pairs[static_cast<std::size_t>(k)].second, undefined);
        bad[static_cast<std::size_t>(k)] = undefined ? 1 : 0;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k)
        if (bad[k]) out.zero_variance.push_back(static_cast<Eigen::Index>(k));
    return out;
}

Eigen::MatrixXd standardize_columns(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    std::vector<Eigen::Index>& zero_variance) {
    Eigen::MatrixXd out(x.rows(), x.cols());
    std::vector<char> bad(static_cast<std::size_t>(x.cols()), 0);
#pragma omp parallel for num_threads(thread_budget()) schedule(static)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        bool zv = false;
        standardize_column_one(x, out, j, zv);
        bad[static_cast<std::size_t>(j)] = zv ? 1 : 0;
    }
    zero_variance.clear();
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        if (bad[static_cast<std::size_t>(j)]) zero_variance.push_back(j);
    return out;
}

}  // namespace omp

namespace {

bool use_parallel(Eigen::Index work) {
    return thread_budget() > 1 && !in_parallel_region() && work >= (Eigen::Index{1} << 16);
}

}  // namespace

Eigen::MatrixXd crossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                          const Eigen::Ref<const Eigen::MatrixXd>& b) {
    return use_parallel(a.rows() * a.cols() * b.cols()) ? omp::crossprod(a, b)
                                                        : serial::crossprod(a, b);
}

Eigen::MatrixXd scaled_tcrossprod(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                  const Eigen::Ref<const Eigen::VectorXd>& scale,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b) {
    return use_parallel(a.rows() * a.cols() * b.rows()) ? omp::scaled_tcrossprod(a, scale, b)
                                                        : serial::scaled_tcrossprod(a, scale, b);
}

Eigen::VectorXd gemv_transpose(const Eigen::Ref<const Eigen::MatrixXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& x) {
    return use_parallel(a.rows() * a.cols()) ? omp::gemv_transpose(a, x)
                                             : serial::gemv_transpose(a, x);
}

PairCorrelations pair_correlations(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const std::vector<IndexPair>& pairs) {
    const auto work = static_cast<Eigen::Index>(pairs.size()) * x.rows();
    return use_parallel(work) ? omp::pair_correlations(x, pairs)
                              : serial::pair_correlations(x, pairs);
}

Eigen::MatrixXd standardize_columns(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    std::vector<Eigen::Index>& zero_variance) {
    return use_parallel(x.size()) ? omp::standardize_columns(x, zero_variance)
                                  : serial::standardize_columns(x, zero_variance);
}

std::vector<IndexPair> sample_pair_indices(Eigen::Index p, Eigen::Index num_pairs,
                                           std::uint64_t seed) {
    if (p < 2) throw InvalidSpec("sample_pair_indices: need at least two columns");
    const std::uint64_t total =
        static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(p - 1) / 2;
    if (num_pairs < 0 || static_cast<std::uint64_t>(num_pairs) > total)
        throw InvalidSpec("sample_pair_indices: more pairs requested than exist");

    std::vector<IndexPair> pairs;
    pairs.reserve(static_cast<std::size_t>(num_pairs));
    Rng rng(seed);

    if (static_cast<std::uint64_t>(num_pairs) * 2 >= total) {
        // Dense request: enumerate all pairs and take a partial Fisher-Yates prefix.
        std::vector<IndexPair> all;
        all.reserve(static_cast<std::size_t>(total));
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = i + 1; j < p; ++j) all.emplace_back(i, j);
        for (Eigen::Index k = 0; k < num_pairs; ++k) {
            const auto r = k + static_cast<Eigen::Index>(
                                   rng.below(static_cast<std::uint64_t>(all.size()) - k));
            std::swap(all[static_cast<std::size_t>(k)], all[static_cast<std::size_t>(r)]);
            pairs.push_back(all[static_cast<std::size_t>(k)]);
        }
        return pairs;
    }

    std::unordered_set<std::uint64_t> seen;
    seen.reserve(static_cast<std::size_t>(num_pairs) * 2);
    while (pairs.size() < static_cast<std::size_t>(num_pairs)) {
        auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(p)));
        auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(p)));
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        const std::uint64_t key =
            static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(p) +
            static_cast<std::uint64_t>(j);
        if (seen.insert(key).second) pairs.emplace_back(i, j);
    }
    return pairs;
}

}  // namespace puffer::kernels
