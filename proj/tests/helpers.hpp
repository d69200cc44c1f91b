#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gic/graph.hpp"
#include "gic/matrix.hpp"
#include "gic/rng.hpp"

namespace test_util {

inline gic::DenseMatrix random_matrix(std::size_t rows, std::size_t cols,
                                      gic::Rng& rng, double lo = -1.0,
                                      double hi = 1.0) {
  gic::DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = rng.uniform(lo, hi);
  return m;
}

// Erdos-Renyi graph with uniform features (and optional random labels).
inline gic::AttributedGraph random_graph(std::size_t n, double edge_prob,
                                         std::size_t num_features,
                                         gic::Rng& rng,
                                         std::size_t num_classes = 0) {
  gic::EdgeList edges;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < edge_prob) edges.emplace_back(i, j);
    }
  }
  std::vector<std::int32_t> labels;
  if (num_classes > 0) {
    labels.resize(n);
    for (auto& l : labels)
      l = static_cast<std::int32_t>(rng.below(num_classes));
  }
  return gic::make_graph(n, edges, random_matrix(n, num_features, rng),
                         std::move(labels), num_classes);
}

// Stochastic block model whose features carry the block signal: feature
// vectors are noisy copies of a per-block center.
inline gic::AttributedGraph sbm_graph(const std::vector<std::size_t>& blocks,
                                      double p_in, double p_out,
                                      std::size_t num_features, double noise,
                                      gic::Rng& rng) {
  std::vector<std::int32_t> labels;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    labels.insert(labels.end(), blocks[b], static_cast<std::int32_t>(b));
  }
  const std::size_t n = labels.size();
  gic::EdgeList edges;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? p_in : p_out;
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  gic::DenseMatrix centers =
      random_matrix(blocks.size(), num_features, rng, -1.0, 1.0);
  gic::DenseMatrix features(n, num_features);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < num_features; ++f) {
      features(i, f) = centers(static_cast<std::size_t>(labels[i]), f) +
                       noise * rng.uniform(-1.0, 1.0);
    }
  }
  return gic::make_graph(n, edges, std::move(features), std::move(labels),
                         blocks.size());
}

// Relative error with an absolute floor: tiny true gradients below the
// floor are compared absolutely (central differences cannot resolve them
// more finely anyway).
inline double rel_err(double got, double want, double floor = 1e-4) {
  const double scale = std::max({std::abs(got), std::abs(want), floor});
  return std::abs(got - want) / scale;
}

inline double max_abs_diff(const gic::DenseMatrix& a,
                           const gic::DenseMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

inline double max_rel_err(const gic::DenseMatrix& a,
                          const gic::DenseMatrix& b, double floor = 1e-9) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, rel_err(a.data()[i], b.data()[i], floor));
  return worst;
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("gic_test_" + tag + "_" + std::to_string(++counter) +
                    "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test_util
