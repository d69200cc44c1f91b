#include "table.hpp"

// Reference kernels. These define the numeric contract: per output element,
// terms accumulate strictly left to right. Multiplications by an exactly
// zero left-hand factor are skipped where noted; with finite inputs and a
// +0.0 accumulator this never changes a bit of the result (x + ±0.0 == x,
// and a running sum of finite addends cannot reach -0.0).

namespace gic::kernels::detail {
namespace {

void spmm_rows_scalar(const std::size_t* offsets, const std::uint32_t* cols,
                      const double* vals, const double* d, std::size_t n,
                      double* out, std::size_t r0, std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double* orow = out + i * n;
    for (std::size_t j = 0; j < n; ++j) orow[j] = 0.0;
    for (std::size_t idx = offsets[i]; idx < offsets[i + 1]; ++idx) {
      const double a = vals[idx];
      const double* drow = d + static_cast<std::size_t>(cols[idx]) * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += a * drow[j];
    }
  }
}

void matmul_nn_rows_scalar(const double* a, const double* b, double* c,
                           std::size_t k, std::size_t n, std::size_t r0,
                           std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    const double* arow = a + i * k;
    for (std::size_t kx = 0; kx < k; ++kx) {
      const double av = arow[kx];
      if (av == 0.0) continue;
      const double* brow = b + kx * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_tn_rows_scalar(const double* a, const double* b, double* c,
                           std::size_t kk, std::size_t m, std::size_t n,
                           std::size_t r0, std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
  }
  for (std::size_t kx = 0; kx < kk; ++kx) {
    const double* arow = a + kx * m;
    const double* brow = b + kx * n;
    for (std::size_t i = r0; i < r1; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt_rows_scalar(const double* a, const double* b, double* c,
                           std::size_t k, std::size_t n, std::size_t r0,
                           std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t kx = 0; kx < k; ++kx) acc += arow[kx] * brow[kx];
      crow[j] = acc;
    }
  }
}

void prelu_fwd_scalar(const double* x, double slope, double* y,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
  }
}

void prelu_dx_scalar(const double* x, double slope, const double* dy,
                     double* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dx[i] = x[i] > 0.0 ? dy[i] : slope * dy[i];
  }
}

void sigmoid_bwd_scalar(const double* y, const double* dy, double* dx,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dx[i] = dy[i] * (y[i] * (1.0 - y[i]));
  }
}

}  // namespace

const KernelTable scalar_table = {
    spmm_rows_scalar,      matmul_nn_rows_scalar, matmul_tn_rows_scalar,
    matmul_nt_rows_scalar, prelu_fwd_scalar,      prelu_dx_scalar,
    sigmoid_bwd_scalar,
};

}  // namespace gic::kernels::detail
