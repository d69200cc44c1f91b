#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gic/matrix.hpp"
#include "gic/rng.hpp"

namespace gic {

// G = (A, X) with optional node labels. The adjacency is symmetric binary
// CSR with no stored self-loops; self-loops appear only inside
// normalize_adjacency.
struct AttributedGraph {
  std::size_t num_nodes = 0;
  SparseMatrixCsr adjacency;
  DenseMatrix features;              // N x F
  std::vector<std::int32_t> labels;  // empty when unlabeled
  std::size_t num_classes = 0;

  std::size_t num_features() const { return features.cols(); }
  std::size_t undirected_edge_count() const { return adjacency.nnz() / 2; }
  bool labeled() const { return !labels.empty(); }

  void validate() const;
};

// D^{-1/2} (A + I) D^{-1/2} over the self-looped degrees. Entry (i, j) is
// 1/sqrt(dhat_i * dhat_j), computed from the integer degrees with the same
// expression on both sides of the diagonal, so the matrix equals its
// transpose exactly.
struct NormalizedAdjacency {
  SparseMatrixCsr matrix;
};

struct LccResult {
  AttributedGraph graph;
  // old node id -> new id, or npos for nodes outside the component.
  static constexpr std::uint32_t npos = 0xffffffffu;
  std::vector<std::uint32_t> old_to_new;
  std::vector<std::uint32_t> new_to_old;
};

enum class SplitMode { balanced, imbalanced };

struct ClassificationSplit {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> val;
  std::vector<std::uint32_t> test;
  SplitMode mode = SplitMode::balanced;
};

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

struct LinkSplit {
  AttributedGraph train_graph;  // held-out edges removed, still symmetric
  EdgeList val_pos, val_neg;
  EdgeList test_pos, test_neg;
};

// Dataset directory layout: meta.json {"num_nodes","num_features",
// "num_classes"}, edges.csv ("src,dst" per line, 0-indexed, direction
// ignored), features.csv (N x F decimals), labels.csv (N integers,
// optional). Edges are symmetrized and deduplicated on load; self-loop
// lines are dropped.
AttributedGraph load_graph(const std::filesystem::path& dataset_dir);
void save_graph(const std::filesystem::path& dataset_dir,
                const AttributedGraph& g);

// Builds a graph in one step from an undirected edge list (test helper and
// loader back end). Symmetrizes, deduplicates, drops self-loops.
AttributedGraph make_graph(std::size_t num_nodes, const EdgeList& edges,
                           DenseMatrix features,
                           std::vector<std::int32_t> labels = {},
                           std::size_t num_classes = 0);

// Largest connected component, nodes renumbered 0..N'-1 preserving the old
// order. Size ties go to the component containing the smallest node id.
LccResult extract_lcc(const AttributedGraph& g);

NormalizedAdjacency normalize_adjacency(const AttributedGraph& g);

// 20*C train / 30*C val / rest test. Balanced mode draws exactly 20 (30)
// per class and requires every class to have at least 50 nodes.
ClassificationSplit sample_classification_split(const AttributedGraph& g,
                                                SplitMode mode, Rng& rng);

// 10% of undirected edges to test, 5% to val (both floored), equal-sized
// negative sets sampled by rejection against the original edge set. Val and
// test negatives are kept disjoint.
LinkSplit make_link_split(const AttributedGraph& g, Rng& rng);

// Fake input: features row-shuffled with a uniform permutation, adjacency
// unchanged. Row i of the result is row perm[i] of the input.
std::vector<std::uint32_t> corruption_permutation(std::size_t n, Rng& rng);
DenseMatrix permute_rows(const DenseMatrix& x,
                         const std::vector<std::uint32_t>& perm);
AttributedGraph corrupt(const AttributedGraph& g, Rng& rng);

// Split serialization for exact replay.
std::string classification_split_to_json(const ClassificationSplit& s);
ClassificationSplit classification_split_from_json(const std::string& text);
std::string link_split_to_json(const LinkSplit& s);
LinkSplit link_split_from_json(const std::string& text,
                               const AttributedGraph& original);

}  // namespace gic
