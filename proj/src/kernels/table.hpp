#pragma once

#include <cstddef>
#include <cstdint>

// Internal kernel dispatch table. Each entry operates on a contiguous range
// of output rows so the front end can shard rows across threads. Every
// backend must accumulate each output element in the same left-to-right
// order as the scalar reference; backends are interchangeable bit-for-bit.

namespace gic::kernels::detail {

struct KernelTable {
  // out(rows x n) = CSR * d; nonzeros of each row accumulate in index order.
  void (*spmm_rows)(const std::size_t* offsets, const std::uint32_t* cols,
                    const double* vals, const double* d, std::size_t n,
                    double* out, std::size_t r0, std::size_t r1);

  // C(m x n) = A(m x k) * B(k x n); C rows in [r0, r1).
  void (*matmul_nn_rows)(const double* a, const double* b, double* c,
                         std::size_t k, std::size_t n, std::size_t r0,
                         std::size_t r1);

  // C(m x n) = A(kk x m)^T * B(kk x n); C rows in [r0, r1); kk is outermost
  // so each C element still accumulates in ascending-k order.
  void (*matmul_tn_rows)(const double* a, const double* b, double* c,
                         std::size_t kk, std::size_t m, std::size_t n,
                         std::size_t r0, std::size_t r1);

  // C(m x n) = A(m x k) * B(n x k)^T; C rows in [r0, r1).
  void (*matmul_nt_rows)(const double* a, const double* b, double* c,
                         std::size_t k, std::size_t n, std::size_t r0,
                         std::size_t r1);

  void (*prelu_fwd)(const double* x, double slope, double* y, std::size_t n);
  void (*prelu_dx)(const double* x, double slope, const double* dy,
                   double* dx, std::size_t n);
  void (*sigmoid_bwd)(const double* y, const double* dy, double* dx,
                      std::size_t n);
};

extern const KernelTable scalar_table;

#if defined(__x86_64__) || defined(_M_X64)
#define GIC_HAVE_AVX2_BACKEND 1
extern const KernelTable avx2_table;
#else
#define GIC_HAVE_AVX2_BACKEND 0
#endif

}  // namespace gic::kernels::detail
