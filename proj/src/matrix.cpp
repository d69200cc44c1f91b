#include "gic/matrix.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gic/error.hpp"

namespace gic {

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  DenseMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw_config("from_rows: ragged initializer");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

SparseMatrixCsr SparseMatrixCsr::identity(std::size_t n) {
  SparseMatrixCsr s;
  s.rows = s.cols = n;
  s.row_offsets.resize(n + 1);
  s.col_indices.resize(n);
  s.values.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    s.row_offsets[i] = i;
    s.col_indices[i] = static_cast<std::uint32_t>(i);
  }
  s.row_offsets[n] = n;
  return s;
}

void SparseMatrixCsr::validate() const {
  if (row_offsets.size() != rows + 1)
    throw_data("CSR: row_offsets size mismatch");
  if (row_offsets.front() != 0 || row_offsets.back() != col_indices.size())
    throw_data("CSR: offsets do not span the index array");
  if (col_indices.size() != values.size())
    throw_data("CSR: indices/values length mismatch");
  for (std::size_t i = 0; i < rows; ++i) {
    if (row_offsets[i] > row_offsets[i + 1])
      throw_data("CSR: decreasing row offsets");
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      if (col_indices[k] >= cols) throw_data("CSR: column index out of range");
      if (k > row_offsets[i] && col_indices[k - 1] >= col_indices[k])
        throw_data("CSR: column indices not strictly increasing");
    }
  }
}

DenseMatrix SparseMatrixCsr::to_dense() const {
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      m(i, col_indices[k]) = values[k];
    }
  }
  return m;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw_data("cannot open for writing: " + path);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_g17(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw_data("write failed: " + path);
}

DenseMatrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_data("cannot open: " + path);
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw_data(path + ":" + std::to_string(lineno) +
                   ": non-numeric entry");
      }
      data.push_back(v);
      ++count;
      p = next;
      if (p < end) {
        if (*p != ',')
          throw_data(path + ":" + std::to_string(lineno) +
                     ": expected ',' separator");
        ++p;
      }
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw_data(path + ":" + std::to_string(lineno) +
                 ": inconsistent column count");
    }
    ++rows;
  }
  DenseMatrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

}  // namespace gic
