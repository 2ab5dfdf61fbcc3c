// Times the OpenMP kernels against their serial reference implementations
// and checks that both produce identical results.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <functional>

#include "puffer/core.hpp"
#include "puffer/designs.hpp"
#include "puffer/kernels.hpp"
#include "puffer/lasso.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_call(const std::function<void()>& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        fn();
        const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
        best = std::min(best, dt);
    }
    return best;
}

void report(const char* name, double serial_s, double omp_s, double max_diff) {
    std::printf("%-22s serial %9.4fs   omp %9.4fs   speedup %5.2fx   max|diff| %.3e\n", name,
                serial_s, omp_s, serial_s / omp_s, max_diff);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel benchmark: serial reference vs OpenMP"};
    Eigen::Index n = 200, p = 10000, pairs = 10000;
    int reps = 3;
    app.add_option("--n", n, "rows");
    app.add_option("--p", p, "columns");
    app.add_option("--pairs", pairs, "correlation pairs");
    app.add_option("--reps", reps, "repetitions (best time reported)");
    CLI11_PARSE(app, argc, argv);

    std::printf("n=%ld p=%ld pairs=%ld threads=%d\n", static_cast<long>(n), static_cast<long>(p),
                static_cast<long>(pairs), puffer::kernels::thread_budget());

    puffer::designs::DesignSpec spec;
    spec.kind = puffer::designs::DesignSpec::Kind::ConstantCorrelation;
    spec.n = n;
    spec.p = p;
    spec.rho = 0.5;
    spec.seed = 7;
    const Eigen::MatrixXd X = puffer::designs::sample_design(spec);
    const puffer::PufferDecomposition dec = puffer::thin_svd(X);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dec.rank);
    const Eigen::VectorXd y = puffer::designs::sample_noise(n, 1.0, 11);

    {
        Eigen::MatrixXd a, b;
        const double ts = time_call([&] { a = puffer::kernels::serial::scaled_tcrossprod(
                                              dec.U, ones, dec.V); }, reps);
        const double to = time_call([&] { b = puffer::kernels::omp::scaled_tcrossprod(
                                              dec.U, ones, dec.V); }, reps);
        report("scaled_tcrossprod", ts, to, (a - b).cwiseAbs().maxCoeff());
    }
    {
        const Eigen::MatrixXd xs = X.leftCols(std::min<Eigen::Index>(p, 40));
        Eigen::MatrixXd a, b;
        const double ts =
            time_call([&] { a = puffer::kernels::serial::crossprod(X, xs); }, reps);
        const double to = time_call([&] { b = puffer::kernels::omp::crossprod(X, xs); }, reps);
        report("crossprod (p x 40)", ts, to, (a - b).cwiseAbs().maxCoeff());
    }
    {
        Eigen::VectorXd a, b;
        const double ts =
            time_call([&] { a = puffer::kernels::serial::gemv_transpose(X, y); }, reps);
        const double to =
            time_call([&] { b = puffer::kernels::omp::gemv_transpose(X, y); }, reps);
        report("gemv_transpose", ts, to, (a - b).cwiseAbs().maxCoeff());
    }
    {
        const auto idx = puffer::kernels::sample_pair_indices(
            p, std::min<Eigen::Index>(pairs, p * (p - 1) / 2), 13);
        puffer::kernels::PairCorrelations a, b;
        const double ts =
            time_call([&] { a = puffer::kernels::serial::pair_correlations(X, idx); }, reps);
        const double to =
            time_call([&] { b = puffer::kernels::omp::pair_correlations(X, idx); }, reps);
        double md = 0.0;
        for (std::size_t k = 0; k < a.values.size(); ++k)
            md = std::max(md, std::abs(a.values[k] - b.values[k]));
        report("pair_correlations", ts, to, md);
    }
    {
        std::vector<Eigen::Index> zv;
        Eigen::MatrixXd a, b;
        const double ts = time_call(
            [&] { a = puffer::kernels::serial::standardize_columns(X, zv); }, reps);
        const double to =
            time_call([&] { b = puffer::kernels::omp::standardize_columns(X, zv); }, reps);
        report("standardize_columns", ts, to, (a - b).cwiseAbs().maxCoeff());
    }
    return 0;
}
