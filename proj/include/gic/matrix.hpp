#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gic {

// Row-major dense matrix of 64-bit floats. Every kernel that produces one is
// required to leave all entries finite.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// CSR sparse matrix of 64-bit floats. Column indices are strictly increasing
// within each row; offsets are nondecreasing with offsets[rows] == nnz.
struct SparseMatrixCsr {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets;  // size rows + 1
  std::vector<std::uint32_t> col_indices;
  std::vector<double> values;

  std::size_t nnz() const { return col_indices.size(); }

  static SparseMatrixCsr identity(std::size_t n);

  // Checks structural invariants; throws on violation.
  void validate() const;

  DenseMatrix to_dense() const;

  bool operator==(const SparseMatrixCsr& other) const = default;
};

// CSV with 17 significant digits per entry; the embedding-export format.
void write_csv(const std::string& path, const DenseMatrix& m);
DenseMatrix read_csv(const std::string& path);

std::string format_g17(double v);

}  // namespace gic
