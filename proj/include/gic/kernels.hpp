#pragma once

#include "gic/matrix.hpp"

namespace gic::kernels {

// Kernel backends. "scalar" is the reference implementation that defines the
// contract; "avx2" is bitwise-equivalent by construction (it vectorizes only
// across independent output lanes and keeps every per-element accumulation
// in the same left-to-right order). The backend is chosen once at startup
// from CPU capabilities and can be overridden for testing.
enum class Backend { scalar, avx2 };

Backend active_backend();
bool backend_supported(Backend b);
void set_backend(Backend b);  // throws if unsupported on this CPU
const char* backend_name(Backend b);

// Row-parallelism for the large kernels. Results are identical for any
// thread count: threads own disjoint output rows and each row is computed
// in the fixed order. Default is 1.
void set_num_threads(unsigned n);
unsigned num_threads();

// out = s * d. Per output element, nonzeros accumulate in index order.
DenseMatrix spmm(const SparseMatrixCsr& s, const DenseMatrix& d);

// out = op(a) * op(b) with optional transposes; accumulation over the inner
// dimension is in ascending order for every output element.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b,
                   bool transpose_a = false, bool transpose_b = false);

double sigmoid_scalar(double x);
DenseMatrix sigmoid(const DenseMatrix& x);
// dx = dy .* y .* (1 - y), with y = sigmoid(x).
DenseMatrix sigmoid_backward(const DenseMatrix& y, const DenseMatrix& dy);

DenseMatrix prelu(const DenseMatrix& x, double slope);
struct PreluGrad {
  DenseMatrix dx;
  double dslope = 0.0;  // sum over x <= 0 of dy * x
};
PreluGrad prelu_backward(const DenseMatrix& x, double slope,
                         const DenseMatrix& dy);

// out[i][k] = cos(h_i, m_k); 0 when either row has zero norm.
DenseMatrix cosine_rows(const DenseMatrix& h, const DenseMatrix& m);

// Rows scaled to unit L2 norm; zero rows left unchanged.
DenseMatrix row_l2_normalize(const DenseMatrix& h);

}  // namespace gic::kernels
