// The contract behind runtime dispatch: every backend produces the same
// bits. Shapes cover the vector widths and their remainders.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <functional>

#include "gic/kernels.hpp"
#include "helpers.hpp"

using gic::DenseMatrix;
using gic::Rng;
using gic::SparseMatrixCsr;
namespace k = gic::kernels;
using test_util::random_matrix;

namespace {

bool bits_equal(const DenseMatrix& a, const DenseMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

DenseMatrix run_with(k::Backend backend,
                     const std::function<DenseMatrix()>& fn) {
  const k::Backend saved = k::active_backend();
  k::set_backend(backend);
  DenseMatrix out = fn();
  k::set_backend(saved);
  return out;
}

SparseMatrixCsr random_csr(std::size_t rows, std::size_t cols, double density,
                           Rng& rng) {
  SparseMatrixCsr s;
  s.rows = rows;
  s.cols = cols;
  s.row_offsets.assign(rows + 1, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      if (rng.uniform() < density) {
        s.col_indices.push_back(j);
        s.values.push_back(rng.uniform(-2.0, 2.0));
      }
    }
    s.row_offsets[i + 1] = s.col_indices.size();
  }
  return s;
}

const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 31, 33};

}  // namespace

TEST_CASE("avx2 backend matches scalar bit for bit") {
  if (!k::backend_supported(k::Backend::avx2)) {
    MESSAGE("AVX2 not available on this CPU; nothing to compare");
    return;
  }
  Rng rng(101);
  for (const std::size_t n : kSizes) {
    const std::size_t m = 1 + rng.below(24);
    const std::size_t kk = 1 + rng.below(24);

    const auto a = random_matrix(m, kk, rng);
    const auto b = random_matrix(kk, n, rng);
    const auto at = random_matrix(kk, m, rng);
    const auto bt = random_matrix(n, kk, rng);
    const auto s = random_csr(m, kk, 0.4, rng);
    const auto x = random_matrix(m, n, rng);
    const auto dy = random_matrix(m, n, rng);

    auto compare = [&](const std::function<DenseMatrix()>& fn) {
      CHECK(bits_equal(run_with(k::Backend::scalar, fn),
                       run_with(k::Backend::avx2, fn)));
    };
    compare([&] { return k::matmul(a, b); });
    compare([&] { return k::matmul(at, b, true, false); });
    compare([&] { return k::matmul(a, bt, false, true); });
    compare([&] { return k::spmm(s, b); });
    compare([&] { return k::prelu(x, 0.25); });
    compare([&] { return k::prelu_backward(x, 0.25, dy).dx; });
    compare([&] { return k::sigmoid_backward(k::sigmoid(x), dy); });
  }
}

TEST_CASE("avx2 prelu slope gradient matches scalar exactly") {
  if (!k::backend_supported(k::Backend::avx2)) return;
  Rng rng(103);
  const auto x = random_matrix(9, 13, rng);
  const auto dy = random_matrix(9, 13, rng);
  const auto fn = [&] {
    return k::prelu_backward(x, 0.25, dy).dslope;
  };
  const k::Backend saved = k::active_backend();
  k::set_backend(k::Backend::scalar);
  const double scalar = fn();
  k::set_backend(k::Backend::avx2);
  const double avx2 = fn();
  k::set_backend(saved);
  CHECK(scalar == avx2);
}

TEST_CASE("sparse inputs with exact zeros keep backends aligned") {
  if (!k::backend_supported(k::Backend::avx2)) return;
  Rng rng(107);
  // Mimics bag-of-words features: mostly exact zeros.
  DenseMatrix a = random_matrix(19, 37, rng);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (rng.uniform() < 0.9) a.data()[i] = 0.0;
  }
  const auto b = random_matrix(37, 17, rng);
  const auto c = random_matrix(19, 11, rng);
  auto compare = [&](const std::function<DenseMatrix()>& fn) {
    CHECK(bits_equal(run_with(k::Backend::scalar, fn),
                     run_with(k::Backend::avx2, fn)));
  };
  compare([&] { return k::matmul(a, b); });
  compare([&] { return k::matmul(a, c, true, false); });
}
