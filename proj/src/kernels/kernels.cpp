#include "gic/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "gic/error.hpp"
#include "table.hpp"

namespace gic::kernels {
namespace {

bool cpu_has_avx2() {
#if GIC_HAVE_AVX2_BACKEND
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Backend detect_backend() {
  if (const char* env = std::getenv("GIC_KERNEL_BACKEND")) {
    const std::string want(env);
    if (want == "scalar") return Backend::scalar;
    if (want == "avx2") {
      if (cpu_has_avx2()) return Backend::avx2;
      throw_config("GIC_KERNEL_BACKEND=avx2 but the CPU lacks AVX2");
    }
    throw_config("unknown GIC_KERNEL_BACKEND value: " + want);
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

// Lazy so a bad GIC_KERNEL_BACKEND value surfaces as a catchable error on
// first use rather than aborting static initialization.
std::atomic<Backend>& backend_state() {
  static std::atomic<Backend> b{detect_backend()};
  return b;
}

std::atomic<unsigned> g_threads{1};

const detail::KernelTable& table() {
#if GIC_HAVE_AVX2_BACKEND
  if (backend_state().load(std::memory_order_relaxed) == Backend::avx2)
    return detail::avx2_table;
#endif
  return detail::scalar_table;
}

// Shards [0, rows) into contiguous chunks. Each row's result is independent
// of the sharding, so any thread count gives identical output.
template <class Fn>
void parallel_rows(std::size_t rows, std::size_t work_per_row, Fn&& fn) {
  const unsigned want = g_threads.load(std::memory_order_relaxed);
  if (want <= 1 || rows < 2 * want || rows * work_per_row < (1u << 14)) {
    fn(std::size_t{0}, rows);
    return;
  }
  const unsigned nthreads =
      static_cast<unsigned>(std::min<std::size_t>(want, rows));
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  const std::size_t chunk = (rows + nthreads - 1) / nthreads;
  for (unsigned t = 0; t < nthreads; ++t) {
    const std::size_t r0 = t * chunk;
    const std::size_t r1 = std::min(rows, r0 + chunk);
    if (r0 >= r1) break;
    pool.emplace_back([&fn, r0, r1] { fn(r0, r1); });
  }
  for (auto& th : pool) th.join();
}

void ensure_finite(const DenseMatrix& m, const char* op) {
  if (!m.all_finite())
    throw_numeric(std::string(op) + ": non-finite value in result");
}

}  // namespace

Backend active_backend() {
  return backend_state().load(std::memory_order_relaxed);
}

bool backend_supported(Backend b) {
  return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

void set_backend(Backend b) {
  if (!backend_supported(b))
    throw_config("kernel backend not supported on this CPU");
  backend_state().store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

void set_num_threads(unsigned n) { g_threads.store(n == 0 ? 1 : n); }
unsigned num_threads() { return g_threads.load(); }

DenseMatrix spmm(const SparseMatrixCsr& s, const DenseMatrix& d) {
  if (s.cols != d.rows())
    throw_config("spmm: dimension mismatch (" + std::to_string(s.cols) +
                 " vs " + std::to_string(d.rows()) + ")");
  DenseMatrix out(s.rows, d.cols());
  const auto& t = table();
  const std::size_t per_row =
      d.cols() * (s.nnz() / std::max<std::size_t>(1, s.rows) + 1);
  parallel_rows(s.rows, per_row, [&](std::size_t r0, std::size_t r1) {
    t.spmm_rows(s.row_offsets.data(), s.col_indices.data(), s.values.data(),
                d.data(), d.cols(), out.data(), r0, r1);
  });
  ensure_finite(out, "spmm");
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b,
                   bool transpose_a, bool transpose_b) {
  const std::size_t m = transpose_a ? a.cols() : a.rows();
  const std::size_t ka = transpose_a ? a.rows() : a.cols();
  const std::size_t kb = transpose_b ? b.cols() : b.rows();
  const std::size_t n = transpose_b ? b.rows() : b.cols();
  if (ka != kb)
    throw_config("matmul: inner dimension mismatch (" + std::to_string(ka) +
                 " vs " + std::to_string(kb) + ")");
  DenseMatrix out(m, n);
  const auto& t = table();
  if (!transpose_a && !transpose_b) {
    parallel_rows(m, ka * n, [&](std::size_t r0, std::size_t r1) {
      t.matmul_nn_rows(a.data(), b.data(), out.data(), ka, n, r0, r1);
    });
  } else if (transpose_a && !transpose_b) {
    parallel_rows(m, ka * n, [&](std::size_t r0, std::size_t r1) {
      t.matmul_tn_rows(a.data(), b.data(), out.data(), ka, m, n, r0, r1);
    });
  } else if (!transpose_a && transpose_b) {
    parallel_rows(m, ka * n, [&](std::size_t r0, std::size_t r1) {
      t.matmul_nt_rows(a.data(), b.data(), out.data(), ka, n, r0, r1);
    });
  } else {
    // Double-transpose has no fast path; it is not used on any hot path.
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t kx = 0; kx < ka; ++kx)
          acc += a(kx, i) * b(j, kx);
        out(i, j) = acc;
      }
    }
  }
  ensure_finite(out, "matmul");
  return out;
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DenseMatrix sigmoid(const DenseMatrix& x) {
  DenseMatrix y(x.rows(), x.cols());
  const double* src = x.data();
  double* dst = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = sigmoid_scalar(src[i]);
  ensure_finite(y, "sigmoid");
  return y;
}

DenseMatrix sigmoid_backward(const DenseMatrix& y, const DenseMatrix& dy) {
  if (!y.same_shape(dy)) throw_config("sigmoid_backward: shape mismatch");
  DenseMatrix dx(y.rows(), y.cols());
  table().sigmoid_bwd(y.data(), dy.data(), dx.data(), y.size());
  ensure_finite(dx, "sigmoid_backward");
  return dx;
}

DenseMatrix prelu(const DenseMatrix& x, double slope) {
  DenseMatrix y(x.rows(), x.cols());
  table().prelu_fwd(x.data(), slope, y.data(), x.size());
  ensure_finite(y, "prelu");
  return y;
}

PreluGrad prelu_backward(const DenseMatrix& x, double slope,
                         const DenseMatrix& dy) {
  if (!x.same_shape(dy)) throw_config("prelu_backward: shape mismatch");
  PreluGrad g;
  g.dx = DenseMatrix(x.rows(), x.cols());
  table().prelu_dx(x.data(), slope, dy.data(), g.dx.data(), x.size());
  // The slope gradient is a single reduction; it stays scalar in every
  // backend so its accumulation order is fixed.
  const double* xs = x.data();
  const double* ds = dy.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (xs[i] <= 0.0) acc += ds[i] * xs[i];
  }
  g.dslope = acc;
  ensure_finite(g.dx, "prelu_backward");
  if (!std::isfinite(g.dslope))
    throw_numeric("prelu_backward: non-finite slope gradient");
  return g;
}

DenseMatrix cosine_rows(const DenseMatrix& h, const DenseMatrix& m) {
  if (h.cols() != m.cols()) throw_config("cosine_rows: dimension mismatch");
  const std::size_t d = h.cols();
  std::vector<double> hn(h.rows()), mn(m.rows());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    double acc = 0.0;
    const double* row = h.data() + i * d;
    for (std::size_t f = 0; f < d; ++f) acc += row[f] * row[f];
    hn[i] = std::sqrt(acc);
  }
  for (std::size_t k = 0; k < m.rows(); ++k) {
    double acc = 0.0;
    const double* row = m.data() + k * d;
    for (std::size_t f = 0; f < d; ++f) acc += row[f] * row[f];
    mn[k] = std::sqrt(acc);
  }
  DenseMatrix out(h.rows(), m.rows());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const double* hrow = h.data() + i * d;
    for (std::size_t k = 0; k < m.rows(); ++k) {
      if (hn[i] == 0.0 || mn[k] == 0.0) {
        out(i, k) = 0.0;
        continue;
      }
      const double* mrow = m.data() + k * d;
      double dot = 0.0;
      for (std::size_t f = 0; f < d; ++f) dot += hrow[f] * mrow[f];
      out(i, k) = dot / (hn[i] * mn[k]);
    }
  }
  ensure_finite(out, "cosine_rows");
  return out;
}

DenseMatrix row_l2_normalize(const DenseMatrix& h) {
  DenseMatrix out(h.rows(), h.cols());
  const std::size_t d = h.cols();
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const double* src = h.data() + i * d;
    double* dst = out.data() + i * d;
    double acc = 0.0;
    for (std::size_t f = 0; f < d; ++f) acc += src[f] * src[f];
    const double norm = std::sqrt(acc);
    if (norm == 0.0) {
      for (std::size_t f = 0; f < d; ++f) dst[f] = src[f];
    } else {
      const double inv = 1.0 / norm;
      for (std::size_t f = 0; f < d; ++f) dst[f] = src[f] * inv;
    }
  }
  ensure_finite(out, "row_l2_normalize");
  return out;
}

}  // namespace gic::kernels
