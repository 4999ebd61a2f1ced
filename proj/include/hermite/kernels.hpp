#ifndef HERMITE_KERNELS_HPP
#define HERMITE_KERNELS_HPP

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

// Dense numeric kernels. Every kernel exists twice: a plain serial reference
// under kernels::serial and an OpenMP version under kernels::openmp. The
// unqualified functions dispatch between them at runtime.
//
// Both backends are bit-for-bit identical by construction: parallel loops
// split work so that each output element is produced by exactly the same
// arithmetic as the serial loop, and reductions accumulate fixed-size blocks
// that are combined in block order regardless of thread count.

namespace hermite::kernels {

/// Fixed reduction block size shared by both backends.
inline constexpr std::size_t kReduceBlock = 1024;

/// Problem sizes below this run serially even when the parallel backend is on.
inline constexpr std::size_t kParallelCutoff = 4096;

bool parallel_enabled();
void set_parallel_enabled(bool on);
int max_threads();

namespace serial {

void matmul_nn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c);
void matmul_tn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c);
void matmul_nt(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c);
void add_row_vector(std::size_t rows, std::size_t cols, double* mat, const double* vec);
void col_sum(std::size_t rows, std::size_t cols, const double* mat, double* out);
void ewise_add(std::size_t n, const double* a, const double* b, double* out);
void ewise_sub(std::size_t n, const double* a, const double* b, double* out);
void ewise_mul(std::size_t n, const double* a, const double* b, double* out);
void axpy(std::size_t n, double alpha, const double* x, double* y);
void scale(std::size_t n, double alpha, double* x);
double reduce_sum(std::size_t n, const double* x);
double reduce_sumsq(std::size_t n, const double* x);
double reduce_dot(std::size_t n, const double* x, const double* y);
bool all_finite(std::size_t n, const double* x);
void softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out);
void log_softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out);

} // namespace serial

namespace openmp {

void matmul_nn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c);
void matmul_tn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c);
void matmul_nt(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c);
void add_row_vector(std::size_t rows, std::size_t cols, double* mat, const double* vec);
void col_sum(std::size_t rows, std::size_t cols, const double* mat, double* out);
void ewise_add(std::size_t n, const double* a, const double* b, double* out);
void ewise_sub(std::size_t n, const double* a, const double* b, double* out);
void ewise_mul(std::size_t n, const double* a, const double* b, double* out);
void axpy(std::size_t n, double alpha, const double* x, double* y);
void scale(std::size_t n, double alpha, double* x);
double reduce_sum(std::size_t n, const double* x);
double reduce_sumsq(std::size_t n, const double* x);
double reduce_dot(std::size_t n, const double* x, const double* y);
bool all_finite(std::size_t n, const double* x);
void softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out);
void log_softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out);

} // namespace openmp

// Dispatching entry points.

void matmul_nn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c);
void matmul_tn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c);
void matmul_nt(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c);
void add_row_vector(std::size_t rows, std::size_t cols, double* mat, const double* vec);
void col_sum(std::size_t rows, std::size_t cols, const double* mat, double* out);
void ewise_add(std::size_t n, const double* a, const double* b, double* out);
void ewise_sub(std::size_t n, const double* a, const double* b, double* out);
void ewise_mul(std::size_t n, const double* a, const double* b, double* out);
void axpy(std::size_t n, double alpha, const double* x, double* y);
void scale(std::size_t n, double alpha, double* x);
double reduce_sum(std::size_t n, const double* x);
double reduce_sumsq(std::size_t n, const double* x);
double reduce_dot(std::size_t n, const double* x, const double* y);
bool all_finite(std::size_t n, const double* x);
void softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out);
void log_softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out);

/// Apply fn(i) for i in [0, n), in parallel when profitable. fn must write
/// only state owned by index i.
template <typename Fn>
void for_each_index(std::size_t n, Fn&& fn) {
#ifdef _OPENMP
    if (parallel_enabled() && n >= kParallelCutoff) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            fn(static_cast<std::size_t>(i));
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

} // namespace hermite::kernels

#endif
