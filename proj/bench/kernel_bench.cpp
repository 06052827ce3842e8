// Parallel vs serial-reference kernel throughput. Each pairing first asserts
// bit-identical outputs (the determinism contract the tests also check), then
// times both variants on the same inputs.
#include <benchmark/benchmark.h>

#include <cstdlib>

#include "pegasus/kernels.hpp"
#include "pegasus/matrix.hpp"
#include "pegasus/rng.hpp"

namespace {

using pegasus::Matrix;
using pegasus::Rng;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix m(rows, cols);
    Rng rng(seed);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

void require_equal(const Matrix& a, const Matrix& b, const char* what) {
    if (!(a == b)) {
        std::fprintf(stderr, "FATAL: %s: omp and ref outputs differ bitwise\n", what);
        std::abort();
    }
}

void bm_matmul_omp(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix A = random_matrix(n, n, 1);
    const Matrix B = random_matrix(n, n, 2);
    require_equal(pegasus::kernels::matmul(A, B), pegasus::kernels::ref::matmul(A, B), "matmul");
    for (auto _ : state) benchmark::DoNotOptimize(pegasus::kernels::matmul(A, B));
}

void bm_matmul_ref(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix A = random_matrix(n, n, 1);
    const Matrix B = random_matrix(n, n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(pegasus::kernels::ref::matmul(A, B));
}

void bm_matmul_at_omp(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix A = random_matrix(4 * n, n, 3);
    require_equal(pegasus::kernels::matmul_at(A, A), pegasus::kernels::ref::matmul_at(A, A),
                  "matmul_at");
    for (auto _ : state) benchmark::DoNotOptimize(pegasus::kernels::matmul_at(A, A));
}

void bm_matmul_at_ref(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix A = random_matrix(4 * n, n, 3);
    for (auto _ : state) benchmark::DoNotOptimize(pegasus::kernels::ref::matmul_at(A, A));
}

void bm_pairwise_sqdist_omp(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix A = random_matrix(n, 32, 4);
    require_equal(pegasus::kernels::pairwise_sqdist(A, A),
                  pegasus::kernels::ref::pairwise_sqdist(A, A), "pairwise_sqdist");
    for (auto _ : state) benchmark::DoNotOptimize(pegasus::kernels::pairwise_sqdist(A, A));
}

void bm_pairwise_sqdist_ref(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix A = random_matrix(n, 32, 4);
    for (auto _ : state) benchmark::DoNotOptimize(pegasus::kernels::ref::pairwise_sqdist(A, A));
}

BENCHMARK(bm_matmul_omp)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_matmul_ref)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_matmul_at_omp)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_matmul_at_ref)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_pairwise_sqdist_omp)->Arg(256)->Arg(1024);
BENCHMARK(bm_pairwise_sqdist_ref)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
