#include <doctest.h>

#include <Eigen/Dense>
#include <cstdlib>
#include <set>
#include <tuple>

#include "puffer/errors.hpp"
#include "puffer/kernels.hpp"
#include "puffer/rng.hpp"

using namespace puffer;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.normal();
    return x;
}

}  // namespace

TEST_CASE("serial and omp kernels agree bitwise") {
    for (const auto& [n, pa, pb] : {std::tuple<int, int, int>{17, 5, 9},
                                    std::tuple<int, int, int>{1, 1, 1},
                                    std::tuple<int, int, int>{64, 33, 7},
                                    std::tuple<int, int, int>{3, 40, 2}}) {
        const Eigen::MatrixXd a = random_matrix(n, pa, 100 + static_cast<std::uint64_t>(n));
        const Eigen::MatrixXd b = random_matrix(n, pb, 200 + static_cast<std::uint64_t>(n));

        const Eigen::MatrixXd c1 = kernels::serial::crossprod(a, b);
        const Eigen::MatrixXd c2 = kernels::omp::crossprod(a, b);
        CHECK((c1 - c2).cwiseAbs().maxCoeff() == 0.0);

        const Eigen::VectorXd scale = random_matrix(pa, 1, 300).col(0);
        const Eigen::MatrixXd bt = random_matrix(pb, pa, 400);
        const Eigen::MatrixXd t1 = kernels::serial::scaled_tcrossprod(a, scale, bt);
        const Eigen::MatrixXd t2 = kernels::omp::scaled_tcrossprod(a, scale, bt);
        CHECK((t1 - t2).cwiseAbs().maxCoeff() == 0.0);

        const Eigen::VectorXd x = random_matrix(n, 1, 500).col(0);
        const Eigen::VectorXd y1 = kernels::serial::gemv_transpose(a, x);
        const Eigen::VectorXd y2 = kernels::omp::gemv_transpose(a, x);
        CHECK((y1 - y2).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("crossprod matches Eigen") {
    const Eigen::MatrixXd a = random_matrix(23, 6, 1);
    const Eigen::MatrixXd b = random_matrix(23, 4, 2);
    const Eigen::MatrixXd expected = a.transpose() * b;
    CHECK((kernels::crossprod(a, b) - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(kernels::crossprod(a, random_matrix(5, 2, 3)), DimensionMismatch);
}

TEST_CASE("scaled_tcrossprod matches the dense formula") {
    const Eigen::MatrixXd u = random_matrix(8, 3, 4);
    const Eigen::MatrixXd v = random_matrix(11, 3, 5);
    const Eigen::VectorXd s = random_matrix(3, 1, 6).col(0);
    const Eigen::MatrixXd expected = u * s.asDiagonal() * v.transpose();
    CHECK((kernels::scaled_tcrossprod(u, s, v) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pair_correlations matches a naive evaluation") {
    const Eigen::MatrixXd x = random_matrix(30, 8, 7);
    const auto pairs = kernels::sample_pair_indices(8, 10, 99);
    const auto pc = kernels::pair_correlations(x, pairs);
    REQUIRE(pc.values.size() == pairs.size());
    CHECK(pc.zero_variance.empty());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const Eigen::VectorXd ci = x.col(pairs[k].first).array() - x.col(pairs[k].first).mean();
        const Eigen::VectorXd cj =
            x.col(pairs[k].second).array() - x.col(pairs[k].second).mean();
        const double expected = ci.dot(cj) / std::sqrt(ci.squaredNorm() * cj.squaredNorm());
        CHECK(pc.values[k] == doctest::Approx(expected).epsilon(1e-12));
    }

    const auto pc2 = kernels::omp::pair_correlations(x, pairs);
    for (std::size_t k = 0; k < pairs.size(); ++k) CHECK(pc.values[k] == pc2.values[k]);
}

TEST_CASE("pair_correlations flags zero-variance columns") {
    Eigen::MatrixXd x = random_matrix(10, 3, 8);
    x.col(1).setConstant(4.0);
    const std::vector<kernels::IndexPair> pairs{{0, 1}, {0, 2}};
    const auto pc = kernels::pair_correlations(x, pairs);
    REQUIRE(pc.zero_variance.size() == 1);
    CHECK(pc.zero_variance[0] == 0);
}

TEST_CASE("standardize_columns centers and scales") {
    const Eigen::MatrixXd x = random_matrix(40, 5, 9);
    std::vector<Eigen::Index> zv;
    const Eigen::MatrixXd out = kernels::standardize_columns(x, zv);
    CHECK(zv.empty());
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        CHECK(std::abs(out.col(j).mean()) < 1e-12);
        const double var = out.col(j).squaredNorm() / static_cast<double>(out.rows() - 1);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sample_pair_indices: distinct, in-range, reproducible") {
    const auto pairs = kernels::sample_pair_indices(50, 200, 5);
    CHECK(pairs.size() == 200);
    std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
    for (const auto& pr : pairs) {
        CHECK(pr.first < pr.second);
        CHECK(pr.second < 50);
        CHECK(seen.insert(pr).second);
    }
    CHECK(pairs == kernels::sample_pair_indices(50, 200, 5));
    CHECK(pairs != kernels::sample_pair_indices(50, 200, 6));

    const auto all = kernels::sample_pair_indices(5, 10, 1);
    CHECK(all.size() == 10);
    CHECK_THROWS_AS(kernels::sample_pair_indices(5, 11, 1), InvalidSpec);
}

TEST_CASE("PUFFER_THREADS caps the thread budget") {
    setenv("PUFFER_THREADS", "1", 1);
    CHECK(kernels::thread_budget() == 1);
    unsetenv("PUFFER_THREADS");
    CHECK(kernels::thread_budget() >= 1);
}
