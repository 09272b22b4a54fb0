#include "fewb/kernels.hpp"

#include <omp.h>

namespace fewb::kernels {

namespace {
thread_local bool g_parallel = true;

// Below this many output elements the OpenMP fork costs more than it saves.
constexpr std::size_t kParallelCutoff = 16 * 1024;
}  // namespace

void set_parallel(bool enabled) { g_parallel = enabled; }
bool parallel_enabled() { return g_parallel; }

// Loop order is k-outer so each W row streams once and stays hot across the
// whole batch. Accumulation over k happens in ascending order for every
// element, in both builds.
void matmul_serial(const real* a, const real* w, real* c,
                   std::size_t b, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < b * n; ++i) c[i] = 0;
    for (std::size_t kk = 0; kk < k; ++kk) {
        const real* wrow = w + kk * n;
        for (std::size_t bb = 0; bb < b; ++bb) {
            const real av = a[bb * k + kk];
            real* crow = c + bb * n;
            for (std::size_t nn = 0; nn < n; ++nn) crow[nn] += av * wrow[nn];
        }
    }
}

// Threads own disjoint column blocks; per-element accumulation order over k
// is unchanged, so the result is bit-identical to the serial build.
void matmul_omp(const real* a, const real* w, real* c,
                std::size_t b, std::size_t k, std::size_t n) {
    const int threads = omp_get_max_threads();
#pragma omp parallel num_threads(threads)
    {
        const int tid = omp_get_thread_num();
        const int nt = omp_get_num_threads();
        const std::size_t chunk = (n + nt - 1) / nt;
        const std::size_t lo = std::min(n, chunk * tid);
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo < hi) {
            for (std::size_t bb = 0; bb < b; ++bb)
                for (std::size_t nn = lo; nn < hi; ++nn) c[bb * n + nn] = 0;
            for (std::size_t kk = 0; kk < k; ++kk) {
                const real* wrow = w + kk * n;
                for (std::size_t bb = 0; bb < b; ++bb) {
                    const real av = a[bb * k + kk];
                    real* crow = c + bb * n;
                    for (std::size_t nn = lo; nn < hi; ++nn) crow[nn] += av * wrow[nn];
                }
            }
        }
    }
}

void matmul(const real* a, const real* w, real* c,
            std::size_t b, std::size_t k, std::size_t n) {
    if (g_parallel && b * n >= kParallelCutoff)
        matmul_omp(a, w, c, b, k, n);
    else
        matmul_serial(a, w, c, b, k, n);
}

// c[bb,kk] += dot(a[bb,:], w[kk,:]); both rows are contiguous.
void matmul_nt_acc_serial(const real* a, const real* w, real* c,
                          std::size_t b, std::size_t n, std::size_t k) {
    for (std::size_t kk = 0; kk < k; ++kk) {
        const real* wrow = w + kk * n;
        for (std::size_t bb = 0; bb < b; ++bb) {
            const real* arow = a + bb * n;
            real acc = 0;
            for (std::size_t nn = 0; nn < n; ++nn) acc += arow[nn] * wrow[nn];
            c[bb * k + kk] += acc;
        }
    }
}

void matmul_nt_acc_omp(const real* a, const real* w, real* c,
                       std::size_t b, std::size_t n, std::size_t k) {
#pragma omp parallel for schedule(static)
    for (std::size_t kk = 0; kk < k; ++kk) {
        const real* wrow = w + kk * n;
        for (std::size_t bb = 0; bb < b; ++bb) {
            const real* arow = a + bb * n;
            real acc = 0;
            for (std::size_t nn = 0; nn < n; ++nn) acc += arow[nn] * wrow[nn];
            c[bb * k + kk] += acc;
        }
    }
}

void matmul_nt_acc(const real* a, const real* w, real* c,
                   std::size_t b, std::size_t n, std::size_t k) {
    if (g_parallel && b * k >= kParallelCutoff)
        matmul_nt_acc_omp(a, w, c, b, n, k);
    else
        matmul_nt_acc_serial(a, w, c, b, n, k);
}

// c[kk,:] += sum_b a[bb,kk] * d[bb,:]; the dW row stays in registers/L1
// while the batch streams.
void matmul_tn_acc_serial(const real* a, const real* d, real* c,
                          std::size_t b, std::size_t k, std::size_t n) {
    for (std::size_t kk = 0; kk < k; ++kk) {
        real* crow = c + kk * n;
        for (std::size_t bb = 0; bb < b; ++bb) {
            const real av = a[bb * k + kk];
            const real* drow = d + bb * n;
            for (std::size_t nn = 0; nn < n; ++nn) crow[nn] += av * drow[nn];
        }
    }
}

void matmul_tn_acc_omp(const real* a, const real* d, real* c,
                       std::size_t b, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::size_t kk = 0; kk < k; ++kk) {
        real* crow = c + kk * n;
        for (std::size_t bb = 0; bb < b; ++bb) {
            const real av = a[bb * k + kk];
            const real* drow = d + bb * n;
            for (std::size_t nn = 0; nn < n; ++nn) crow[nn] += av * drow[nn];
        }
    }
}

void matmul_tn_acc(const real* a, const real* d, real* c,
                   std::size_t b, std::size_t k, std::size_t n) {
    if (g_parallel && k * n >= kParallelCutoff)
        matmul_tn_acc_omp(a, d, c, b, k, n);
    else
        matmul_tn_acc_serial(a, d, c, b, k, n);
}

void add_bias(real* y, const real* bias, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        real* row = y + r * cols;
        for (std::size_t cidx = 0; cidx < cols; ++cidx) row[cidx] += bias[cidx];
    }
}

void bias_grad_acc(const real* dy, real* db, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const real* row = dy + r * cols;
        for (std::size_t cidx = 0; cidx < cols; ++cidx) db[cidx] += row[cidx];
    }
}

}  // namespace fewb::kernels
