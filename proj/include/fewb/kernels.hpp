#pragma once

#include <cstddef>

#include "fewb/common.hpp"

namespace fewb::kernels {

/// The dense inner loops of the project. Every kernel comes in two builds:
/// a serial reference (`*_serial`) and an OpenMP version (`*_omp`). The
/// OpenMP versions split work so that the accumulation order of every output
/// element is identical to the serial reference, so results are bit-exact
/// regardless of thread count. The unsuffixed entry points dispatch on the
/// per-thread parallel flag.

/// Enable/disable OpenMP dispatch for the calling thread. Training loops that
/// already run one run per hardware thread switch this off to avoid
/// oversubscription.
void set_parallel(bool enabled);
bool parallel_enabled();

// C(BxN) = A(BxK) * W(KxN), row-major.
void matmul(const real* a, const real* w, real* c,
            std::size_t b, std::size_t k, std::size_t n);
void matmul_serial(const real* a, const real* w, real* c,
                   std::size_t b, std::size_t k, std::size_t n);
void matmul_omp(const real* a, const real* w, real* c,
                std::size_t b, std::size_t k, std::size_t n);

// C(BxK) += A(BxN) * W(KxN)^T. Backward pass for the input of an affine op.
void matmul_nt_acc(const real* a, const real* w, real* c,
                   std::size_t b, std::size_t n, std::size_t k);
void matmul_nt_acc_serial(const real* a, const real* w, real* c,
                          std::size_t b, std::size_t n, std::size_t k);
void matmul_nt_acc_omp(const real* a, const real* w, real* c,
                       std::size_t b, std::size_t n, std::size_t k);

// C(KxN) += A(BxK)^T * D(BxN). Backward pass for the weights of an affine op.
void matmul_tn_acc(const real* a, const real* d, real* c,
                   std::size_t b, std::size_t k, std::size_t n);
void matmul_tn_acc_serial(const real* a, const real* d, real* c,
                          std::size_t b, std::size_t k, std::size_t n);
void matmul_tn_acc_omp(const real* a, const real* d, real* c,
                       std::size_t b, std::size_t k, std::size_t n);

// y(rows x cols) += bias(cols) broadcast over rows.
void add_bias(real* y, const real* bias, std::size_t rows, std::size_t cols);

// db(cols) += column sums of dy(rows x cols).
void bias_grad_acc(const real* dy, real* db, std::size_t rows, std::size_t cols);

}  // namespace fewb::kernels
