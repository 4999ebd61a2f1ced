#include "hermite/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <vector>

namespace hermite::kernels {

namespace {
std::atomic<bool> g_parallel{true};

// Block-partial reduction shared by both backends so their arithmetic is
// identical: block sums are always combined in block order.
double combine_blocks(const std::vector<double>& partials) {
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

double block_sum(const double* x, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i];
    return s;
}

double block_sumsq(const double* x, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i] * x[i];
    return s;
}

double block_dot(const double* x, const double* y, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
    return s;
}

inline std::size_t num_blocks(std::size_t n) { return (n + kReduceBlock - 1) / kReduceBlock; }

void softmax_row(std::size_t cols, const double* z, double* out) {
    double zmax = z[0];
    for (std::size_t j = 1; j < cols; ++j) zmax = std::max(zmax, z[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        out[j] = std::exp(z[j] - zmax);
        denom += out[j];
    }
    const double inv = 1.0 / denom;
    for (std::size_t j = 0; j < cols; ++j) out[j] *= inv;
}

void log_softmax_row(std::size_t cols, const double* z, double* out) {
    double zmax = z[0];
    for (std::size_t j = 1; j < cols; ++j) zmax = std::max(zmax, z[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) denom += std::exp(z[j] - zmax);
    const double lse = zmax + std::log(denom);
    for (std::size_t j = 0; j < cols; ++j) out[j] = z[j] - lse;
}

} // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel_enabled(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// ---------------------------------------------------------------------------
// Serial reference backend
// ---------------------------------------------------------------------------

namespace serial {

// c[m x n] = a[m x k] * b[k x n]; ikj order keeps the inner loop unit stride.
void matmul_nn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        std::memset(ci, 0, n * sizeof(double));
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

// c[k x n] = a^T * b with a[m x k], b[m x n].
void matmul_tn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c) {
    for (std::size_t p = 0; p < k; ++p) {
        double* cp = c + p * n;
        std::memset(cp, 0, n * sizeof(double));
        for (std::size_t i = 0; i < m; ++i) {
            const double aip = a[i * k + p];
            const double* bi = b + i * n;
            for (std::size_t j = 0; j < n; ++j) cp[j] += aip * bi[j];
        }
    }
}

// c[m x k] = a * b^T with a[m x n], b[k x n].
void matmul_nt(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * n;
        double* ci = c + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double* bp = b + p * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += ai[j] * bp[j];
            ci[p] = s;
        }
    }
}

void add_row_vector(std::size_t rows, std::size_t cols, double* mat, const double* vec) {
    for (std::size_t i = 0; i < rows; ++i) {
        double* mi = mat + i * cols;
        for (std::size_t j = 0; j < cols; ++j) mi[j] += vec[j];
    }
}

void col_sum(std::size_t rows, std::size_t cols, const double* mat, double* out) {
    for (std::size_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += mat[i * cols + j];
        out[j] = s;
    }
}

void ewise_add(std::size_t n, const double* a, const double* b, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void ewise_sub(std::size_t n, const double* a, const double* b, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void ewise_mul(std::size_t n, const double* a, const double* b, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(std::size_t n, double alpha, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double reduce_sum(std::size_t n, const double* x) {
    const std::size_t nb = num_blocks(n);
    std::vector<double> partials(nb);
    for (std::size_t b = 0; b < nb; ++b)
        partials[b] = block_sum(x, b * kReduceBlock, std::min(n, (b + 1) * kReduceBlock));
    return combine_blocks(partials);
}

double reduce_sumsq(std::size_t n, const double* x) {
    const std::size_t nb = num_blocks(n);
    std::vector<double> partials(nb);
    for (std::size_t b = 0; b < nb; ++b)
        partials[b] = block_sumsq(x, b * kReduceBlock, std::min(n, (b + 1) * kReduceBlock));
    return combine_blocks(partials);
}

double reduce_dot(std::size_t n, const double* x, const double* y) {
    const std::size_t nb = num_blocks(n);
    std::vector<double> partials(nb);
    for (std::size_t b = 0; b < nb; ++b)
        partials[b] = block_dot(x, y, b * kReduceBlock, std::min(n, (b + 1) * kReduceBlock));
    return combine_blocks(partials);
}

bool all_finite(std::size_t n, const double* x) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

void softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out) {
    for (std::size_t i = 0; i < rows; ++i) softmax_row(cols, logits + i * cols, out + i * cols);
}

void log_softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out) {
    for (std::size_t i = 0; i < rows; ++i)
        log_softmax_row(cols, logits + i * cols, out + i * cols);
}

} // namespace serial

// ---------------------------------------------------------------------------
// OpenMP backend. Without _OPENMP the pragmas vanish and these compile to the
// serial loops, so the dispatcher stays valid on any toolchain.
// ---------------------------------------------------------------------------

namespace openmp {

void matmul_nn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(m); ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        std::memset(ci, 0, n * sizeof(double));
        const double* ai = a + static_cast<std::size_t>(i) * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void matmul_tn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static)
    for (long long p = 0; p < static_cast<long long>(k); ++p) {
        double* cp = c + static_cast<std::size_t>(p) * n;
        std::memset(cp, 0, n * sizeof(double));
        for (std::size_t i = 0; i < m; ++i) {
            const double aip = a[i * k + static_cast<std::size_t>(p)];
            const double* bi = b + i * n;
            for (std::size_t j = 0; j < n; ++j) cp[j] += aip * bi[j];
        }
    }
}

void matmul_nt(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(m); ++i) {
        const double* ai = a + static_cast<std::size_t>(i) * n;
        double* ci = c + static_cast<std::size_t>(i) * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double* bp = b + p * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += ai[j] * bp[j];
            ci[p] = s;
        }
    }
}

void add_row_vector(std::size_t rows, std::size_t cols, double* mat, const double* vec) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(rows); ++i) {
        double* mi = mat + static_cast<std::size_t>(i) * cols;
        for (std::size_t j = 0; j < cols; ++j) mi[j] += vec[j];
    }
}

void col_sum(std::size_t rows, std::size_t cols, const double* mat, double* out) {
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < static_cast<long long>(cols); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += mat[i * cols + static_cast<std::size_t>(j)];
        out[j] = s;
    }
}

void ewise_add(std::size_t n, const double* a, const double* b, double* out) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = a[i] + b[i];
}

void ewise_sub(std::size_t n, const double* a, const double* b, double* out) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = a[i] - b[i];
}

void ewise_mul(std::size_t n, const double* a, const double* b, double* out) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = a[i] * b[i];
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] += alpha * x[i];
}

void scale(std::size_t n, double alpha, double* x) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) x[i] *= alpha;
}

double reduce_sum(std::size_t n, const double* x) {
    const std::size_t nb = num_blocks(n);
    std::vector<double> partials(nb);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        partials[b] = block_sum(x, lo, std::min(n, lo + kReduceBlock));
    }
    return combine_blocks(partials);
}

double reduce_sumsq(std::size_t n, const double* x) {
    const std::size_t nb = num_blocks(n);
    std::vector<double> partials(nb);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        partials[b] = block_sumsq(x, lo, std::min(n, lo + kReduceBlock));
    }
    return combine_blocks(partials);
}

double reduce_dot(std::size_t n, const double* x, const double* y) {
    const std::size_t nb = num_blocks(n);
    std::vector<double> partials(nb);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        partials[b] = block_dot(x, y, lo, std::min(n, lo + kReduceBlock));
    }
    return combine_blocks(partials);
}

bool all_finite(std::size_t n, const double* x) {
    int ok = 1;
#pragma omp parallel for schedule(static) reduction(&& : ok)
    for (long long i = 0; i < static_cast<long long>(n); ++i) ok = ok && std::isfinite(x[i]);
    return ok != 0;
}

void softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(rows); ++i)
        softmax_row(cols, logits + static_cast<std::size_t>(i) * cols,
                    out + static_cast<std::size_t>(i) * cols);
}

void log_softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(rows); ++i)
        log_softmax_row(cols, logits + static_cast<std::size_t>(i) * cols,
                        out + static_cast<std::size_t>(i) * cols);
}

} // namespace openmp

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

namespace {
inline bool go_parallel(std::size_t work) {
#ifdef _OPENMP
    return parallel_enabled() && work >= kParallelCutoff && omp_get_max_threads() > 1;
#else
    (void)work;
    return false;
#endif
}
} // namespace

void matmul_nn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c) {
    if (go_parallel(m * k * n)) openmp::matmul_nn(m, k, n, a, b, c);
    else serial::matmul_nn(m, k, n, a, b, c);
}

void matmul_tn(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c) {
    if (go_parallel(m * k * n)) openmp::matmul_tn(m, k, n, a, b, c);
    else serial::matmul_tn(m, k, n, a, b, c);
}

void matmul_nt(std::size_t m, std::size_t k, std::size_t n,
               const double* a, const double* b, double* c) {
    if (go_parallel(m * k * n)) openmp::matmul_nt(m, k, n, a, b, c);
    else serial::matmul_nt(m, k, n, a, b, c);
}

void add_row_vector(std::size_t rows, std::size_t cols, double* mat, const double* vec) {
    if (go_parallel(rows * cols)) openmp::add_row_vector(rows, cols, mat, vec);
    else serial::add_row_vector(rows, cols, mat, vec);
}

void col_sum(std::size_t rows, std::size_t cols, const double* mat, double* out) {
    if (go_parallel(rows * cols)) openmp::col_sum(rows, cols, mat, out);
    else serial::col_sum(rows, cols, mat, out);
}

void ewise_add(std::size_t n, const double* a, const double* b, double* out) {
    if (go_parallel(n)) openmp::ewise_add(n, a, b, out);
    else serial::ewise_add(n, a, b, out);
}

void ewise_sub(std::size_t n, const double* a, const double* b, double* out) {
    if (go_parallel(n)) openmp::ewise_sub(n, a, b, out);
    else serial::ewise_sub(n, a, b, out);
}

void ewise_mul(std::size_t n, const double* a, const double* b, double* out) {
    if (go_parallel(n)) openmp::ewise_mul(n, a, b, out);
    else serial::ewise_mul(n, a, b, out);
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
    if (go_parallel(n)) openmp::axpy(n, alpha, x, y);
    else serial::axpy(n, alpha, x, y);
}

void scale(std::size_t n, double alpha, double* x) {
    if (go_parallel(n)) openmp::scale(n, alpha, x);
    else serial::scale(n, alpha, x);
}

double reduce_sum(std::size_t n, const double* x) {
    return go_parallel(n) ? openmp::reduce_sum(n, x) : serial::reduce_sum(n, x);
}

double reduce_sumsq(std::size_t n, const double* x) {
    return go_parallel(n) ? openmp::reduce_sumsq(n, x) : serial::reduce_sumsq(n, x);
}

double reduce_dot(std::size_t n, const double* x, const double* y) {
    return go_parallel(n) ? openmp::reduce_dot(n, x, y) : serial::reduce_dot(n, x, y);
}

bool all_finite(std::size_t n, const double* x) {
    return go_parallel(n) ? openmp::all_finite(n, x) : serial::all_finite(n, x);
}

void softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out) {
    if (go_parallel(rows * cols)) openmp::softmax_rows(rows, cols, logits, out);
    else serial::softmax_rows(rows, cols, logits, out);
}

void log_softmax_rows(std::size_t rows, std::size_t cols, const double* logits, double* out) {
    if (go_parallel(rows * cols)) openmp::log_softmax_rows(rows, cols, logits, out);
    else serial::log_softmax_rows(rows, cols, logits, out);
}

} // namespace hermite::kernels
