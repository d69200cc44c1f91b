#include "table.hpp"

#if GIC_HAVE_AVX2_BACKEND

#include <immintrin.h>

// AVX2 variants. Bitwise equivalence with the scalar reference is a hard
// requirement, so vectorization is only across independent output lanes:
// the reduction index (k / nonzero position) always advances one step at a
// time and every lane keeps its own scalar-order accumulator chain. Plain
// mul+add is used instead of FMA so each rounding matches the scalar code
// (the build also disables FP contraction).

namespace gic::kernels::detail {
namespace {

// orow[j..j+15] += av * brow[j..j+15] as four register accumulators held
// across the whole reduction; tails fall back to width 4, then scalar.
struct RowBlock16 {
  __m256d acc[4];
  void zero() {
    for (auto& a : acc) a = _mm256_setzero_pd();
  }
  void add(double av, const double* brow) {
    const __m256d v = _mm256_set1_pd(av);
    acc[0] = _mm256_add_pd(acc[0], _mm256_mul_pd(v, _mm256_loadu_pd(brow)));
    acc[1] =
        _mm256_add_pd(acc[1], _mm256_mul_pd(v, _mm256_loadu_pd(brow + 4)));
    acc[2] =
        _mm256_add_pd(acc[2], _mm256_mul_pd(v, _mm256_loadu_pd(brow + 8)));
    acc[3] =
        _mm256_add_pd(acc[3], _mm256_mul_pd(v, _mm256_loadu_pd(brow + 12)));
  }
  void store(double* orow) const {
    _mm256_storeu_pd(orow, acc[0]);
    _mm256_storeu_pd(orow + 4, acc[1]);
    _mm256_storeu_pd(orow + 8, acc[2]);
    _mm256_storeu_pd(orow + 12, acc[3]);
  }
};

void spmm_rows_avx2(const std::size_t* offsets, const std::uint32_t* cols,
                    const double* vals, const double* d, std::size_t n,
                    double* out, std::size_t r0, std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double* orow = out + i * n;
    const std::size_t begin = offsets[i];
    const std::size_t end = offsets[i + 1];
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      RowBlock16 blk;
      blk.zero();
      for (std::size_t idx = begin; idx < end; ++idx) {
        blk.add(vals[idx],
                d + static_cast<std::size_t>(cols[idx]) * n + j);
      }
      blk.store(orow + j);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t idx = begin; idx < end; ++idx) {
        const __m256d v = _mm256_set1_pd(vals[idx]);
        const double* src = d + static_cast<std::size_t>(cols[idx]) * n + j;
        acc = _mm256_add_pd(acc, _mm256_mul_pd(v, _mm256_loadu_pd(src)));
      }
      _mm256_storeu_pd(orow + j, acc);
    }
    for (; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t idx = begin; idx < end; ++idx) {
        acc += vals[idx] * d[static_cast<std::size_t>(cols[idx]) * n + j];
      }
      orow[j] = acc;
    }
  }
}

void matmul_nn_rows_avx2(const double* a, const double* b, double* c,
                         std::size_t k, std::size_t n, std::size_t r0,
                         std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      RowBlock16 blk;
      blk.zero();
      for (std::size_t kx = 0; kx < k; ++kx) {
        const double av = arow[kx];
        if (av == 0.0) continue;
        blk.add(av, b + kx * n + j);
      }
      blk.store(crow + j);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t kx = 0; kx < k; ++kx) {
        const double av = arow[kx];
        if (av == 0.0) continue;
        acc = _mm256_add_pd(
            acc, _mm256_mul_pd(_mm256_set1_pd(av),
                               _mm256_loadu_pd(b + kx * n + j)));
      }
      _mm256_storeu_pd(crow + j, acc);
    }
    for (; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t kx = 0; kx < k; ++kx) {
        const double av = arow[kx];
        if (av == 0.0) continue;
        acc += av * b[kx * n + j];
      }
      crow[j] = acc;
    }
  }
}

void matmul_tn_rows_avx2(const double* a, const double* b, double* c,
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
      const __m256d v = _mm256_set1_pd(av);
      double* crow = c + i * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        const __m256d cv = _mm256_loadu_pd(crow + j);
        _mm256_storeu_pd(
            crow + j,
            _mm256_add_pd(cv, _mm256_mul_pd(v, _mm256_loadu_pd(brow + j))));
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt_rows_avx2(const double* a, const double* b, double* c,
                         std::size_t k, std::size_t n, std::size_t r0,
                         std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    std::size_t j = 0;
    // Four output columns at once; each lane is an independent dot product
    // walked in ascending k, identical to the scalar chain.
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b + (j + 1) * k;
      const double* b2 = b + (j + 2) * k;
      const double* b3 = b + (j + 3) * k;
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t kx = 0; kx < k; ++kx) {
        const __m256d av = _mm256_set1_pd(arow[kx]);
        const __m256d bv = _mm256_set_pd(b3[kx], b2[kx], b1[kx], b0[kx]);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(av, bv));
      }
      _mm256_storeu_pd(crow + j, acc);
    }
    for (; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t kx = 0; kx < k; ++kx) acc += arow[kx] * brow[kx];
      crow[j] = acc;
    }
  }
}

void prelu_fwd_avx2(const double* x, double slope, double* y, std::size_t n) {
  const __m256d s = _mm256_set1_pd(slope);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d mask = _mm256_cmp_pd(xv, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(y + i,
                     _mm256_blendv_pd(_mm256_mul_pd(s, xv), xv, mask));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void prelu_dx_avx2(const double* x, double slope, const double* dy,
                   double* dx, std::size_t n) {
  const __m256d s = _mm256_set1_pd(slope);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d dv = _mm256_loadu_pd(dy + i);
    const __m256d mask = _mm256_cmp_pd(xv, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dx + i,
                     _mm256_blendv_pd(_mm256_mul_pd(s, dv), dv, mask));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : slope * dy[i];
}

void sigmoid_bwd_avx2(const double* y, const double* dy, double* dx,
                      std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    const __m256d dv = _mm256_loadu_pd(dy + i);
    const __m256d g = _mm256_mul_pd(yv, _mm256_sub_pd(one, yv));
    _mm256_storeu_pd(dx + i, _mm256_mul_pd(dv, g));
  }
  for (; i < n; ++i) dx[i] = dy[i] * (y[i] * (1.0 - y[i]));
}

}  // namespace

const KernelTable avx2_table = {
    spmm_rows_avx2,      matmul_nn_rows_avx2, matmul_tn_rows_avx2,
    matmul_nt_rows_avx2, prelu_fwd_avx2,      prelu_dx_avx2,
    sigmoid_bwd_avx2,
};

}  // namespace gic::kernels::detail

#endif  // GIC_HAVE_AVX2_BACKEND
