// Serial reference vs OpenMP backend on the kernels that dominate training.
// Run: ./bench_kernels [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <vector>

#include "hermite/hermite.hpp"
#include "hermite/kernels.hpp"
#include "hermite/rng.hpp"

namespace {

using hermite::Rng;
namespace kernels = hermite::kernels;

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.gaussian();
    return v;
}

void bench_matmul_serial(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto a = random_vec(n * n, 1);
    const auto b = random_vec(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : state) {
        kernels::serial::matmul_nn(n, n, n, a.data(), b.data(), c.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * n * n * n);
}

void bench_matmul_openmp(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto a = random_vec(n * n, 1);
    const auto b = random_vec(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : state) {
        kernels::openmp::matmul_nn(n, n, n, a.data(), b.data(), c.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * n * n * n);
}

void bench_reduce_serial(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto x = random_vec(n, 3);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::reduce_sumsq(n, x.data()));
    state.SetItemsProcessed(state.iterations() * n);
}

void bench_reduce_openmp(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto x = random_vec(n, 3);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::openmp::reduce_sumsq(n, x.data()));
    state.SetItemsProcessed(state.iterations() * n);
}

void hermite_eval_rows(std::size_t n, const double* x, double* out, bool parallel) {
    const bool saved = kernels::parallel_enabled();
    kernels::set_parallel_enabled(parallel);
    std::vector<double> coeffs = {0.4, 0.5, 0.28, 0.0, -0.08};
    kernels::for_each_index(n, [&](std::size_t i) {
        double h[5];
        hermite::basis::eval_normalized_all(4, x[i], h);
        double acc = 0.0;
        for (int k = 0; k <= 4; ++k) acc += coeffs[k] * h[k];
        out[i] = acc;
    });
    kernels::set_parallel_enabled(saved);
}

void bench_hermite_eval_serial(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto x = random_vec(n, 4);
    std::vector<double> out(n);
    for (auto _ : state) {
        hermite_eval_rows(n, x.data(), out.data(), false);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void bench_hermite_eval_openmp(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto x = random_vec(n, 4);
    std::vector<double> out(n);
    for (auto _ : state) {
        hermite_eval_rows(n, x.data(), out.data(), true);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * n);
}

BENCHMARK(bench_matmul_serial)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(bench_matmul_openmp)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(bench_reduce_serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bench_reduce_openmp)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bench_hermite_eval_serial)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(bench_hermite_eval_openmp)->Arg(1 << 14)->Arg(1 << 18);

} // namespace

BENCHMARK_MAIN();
