#include "gic/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gic/error.hpp"

namespace gic {
namespace {

using json = nlohmann::json;

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

SparseMatrixCsr adjacency_from_edges(std::size_t n, const EdgeList& edges) {
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& [a, b] : edges) {
    if (a == b) continue;  // self-loops are never stored
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  SparseMatrixCsr csr;
  csr.rows = csr.cols = n;
  csr.row_offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& nbrs = adj[i];
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    csr.row_offsets[i + 1] = csr.row_offsets[i] + nbrs.size();
    csr.col_indices.insert(csr.col_indices.end(), nbrs.begin(), nbrs.end());
  }
  csr.values.assign(csr.col_indices.size(), 1.0);
  return csr;
}

std::string loc(const std::filesystem::path& file, std::size_t line) {
  return file.string() + ":" + std::to_string(line);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_data("missing file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw_data(path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

void AttributedGraph::validate() const {
  adjacency.validate();
  if (adjacency.rows != num_nodes || adjacency.cols != num_nodes)
    throw_data("graph: adjacency shape does not match num_nodes");
  if (features.rows() != num_nodes)
    throw_data("graph: feature row count does not match num_nodes");
  if (!labels.empty()) {
    if (labels.size() != num_nodes)
      throw_data("graph: label count does not match num_nodes");
    for (std::int32_t c : labels) {
      if (c < 0 || static_cast<std::size_t>(c) >= num_classes)
        throw_data("graph: label out of range");
    }
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    for (std::size_t k = adjacency.row_offsets[i];
         k < adjacency.row_offsets[i + 1]; ++k) {
      const std::uint32_t j = adjacency.col_indices[k];
      if (j == i) throw_data("graph: stored self-loop");
      // symmetry: (j, i) must exist
      const auto begin =
          adjacency.col_indices.begin() + adjacency.row_offsets[j];
      const auto end =
          adjacency.col_indices.begin() + adjacency.row_offsets[j + 1];
      if (!std::binary_search(begin, end, static_cast<std::uint32_t>(i)))
        throw_data("graph: adjacency not symmetric");
    }
  }
}

AttributedGraph make_graph(std::size_t num_nodes, const EdgeList& edges,
                           DenseMatrix features,
                           std::vector<std::int32_t> labels,
                           std::size_t num_classes) {
  AttributedGraph g;
  g.num_nodes = num_nodes;
  g.adjacency = adjacency_from_edges(num_nodes, edges);
  g.features = std::move(features);
  g.labels = std::move(labels);
  g.num_classes = num_classes;
  g.validate();
  return g;
}

AttributedGraph load_graph(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  const json meta = read_json_file(meta_path);
  for (const char* key : {"num_nodes", "num_features", "num_classes"}) {
    if (!meta.contains(key))
      throw_data(meta_path.string() + ": missing key \"" + key + "\"");
  }
  const auto n = meta["num_nodes"].get<std::size_t>();
  const auto f = meta["num_features"].get<std::size_t>();
  const auto c = meta["num_classes"].get<std::size_t>();

  const auto edges_path = dir / "edges.csv";
  std::ifstream edges_in(edges_path);
  if (!edges_in) throw_data("missing file: " + edges_path.string());
  EdgeList edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(edges_in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::uint32_t a = 0, b = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    auto r1 = std::from_chars(p, end, a);
    if (r1.ec != std::errc() || r1.ptr >= end || *r1.ptr != ',')
      throw_data(loc(edges_path, lineno) + ": expected \"src,dst\"");
    auto r2 = std::from_chars(r1.ptr + 1, end, b);
    if (r2.ec != std::errc() || r2.ptr != end)
      throw_data(loc(edges_path, lineno) + ": expected \"src,dst\"");
    if (a >= n || b >= n)
      throw_data(loc(edges_path, lineno) + ": node index out of range");
    edges.emplace_back(a, b);
  }

  const auto features_path = dir / "features.csv";
  DenseMatrix features = read_csv(features_path.string());
  if (features.rows() != n)
    throw_data(features_path.string() + ": expected " + std::to_string(n) +
               " rows, found " + std::to_string(features.rows()));
  if (n > 0 && features.cols() != f)
    throw_data(features_path.string() + ": expected " + std::to_string(f) +
               " columns, found " + std::to_string(features.cols()));
  if (n == 0) features = DenseMatrix(0, f);

  std::vector<std::int32_t> labels;
  const auto labels_path = dir / "labels.csv";
  if (std::filesystem::exists(labels_path)) {
    std::ifstream labels_in(labels_path);
    if (!labels_in) throw_data("missing file: " + labels_path.string());
    lineno = 0;
    while (std::getline(labels_in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::int32_t v = 0;
      auto r = std::from_chars(line.data(), line.data() + line.size(), v);
      if (r.ec != std::errc() || r.ptr != line.data() + line.size())
        throw_data(loc(labels_path, lineno) + ": expected one integer");
      if (v < 0 || static_cast<std::size_t>(v) >= c)
        throw_data(loc(labels_path, lineno) + ": label out of range");
      labels.push_back(v);
    }
    if (labels.size() != n)
      throw_data(labels_path.string() + ": expected " + std::to_string(n) +
                 " labels, found " + std::to_string(labels.size()));
  } else if (c > 0) {
    throw_data("missing file: " + labels_path.string() +
               " (meta.json declares num_classes=" + std::to_string(c) + ")");
  }

  const std::size_t effective_classes = labels.empty() ? 0 : c;
  return make_graph(n, edges, std::move(features), std::move(labels),
                    effective_classes);
}

void save_graph(const std::filesystem::path& dir, const AttributedGraph& g) {
  std::filesystem::create_directories(dir);
  {
    json meta = {{"num_nodes", g.num_nodes},
                 {"num_features", g.num_features()},
                 {"num_classes", g.num_classes}};
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "edges.csv");
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
      for (std::size_t k = g.adjacency.row_offsets[i];
           k < g.adjacency.row_offsets[i + 1]; ++k) {
        const std::uint32_t j = g.adjacency.col_indices[k];
        if (j > i) out << i << ',' << j << '\n';
      }
    }
  }
  write_csv((dir / "features.csv").string(), g.features);
  if (g.labeled()) {
    std::ofstream out(dir / "labels.csv");
    for (std::int32_t v : g.labels) out << v << '\n';
  }
}

LccResult extract_lcc(const AttributedGraph& g) {
  const std::size_t n = g.num_nodes;
  std::vector<std::uint32_t> component(n, LccResult::npos);
  std::uint32_t best_component = 0;
  std::size_t best_size = 0;
  std::uint32_t num_components = 0;
  std::deque<std::uint32_t> queue;
  for (std::uint32_t start = 0; start < n; ++start) {
    if (component[start] != LccResult::npos) continue;
    const std::uint32_t id = num_components++;
    std::size_t size = 0;
    component[start] = id;
    queue.push_back(start);
    while (!queue.empty()) {
      const std::uint32_t u = queue.front();
      queue.pop_front();
      ++size;
      for (std::size_t k = g.adjacency.row_offsets[u];
           k < g.adjacency.row_offsets[u + 1]; ++k) {
        const std::uint32_t v = g.adjacency.col_indices[k];
        if (component[v] == LccResult::npos) {
          component[v] = id;
          queue.push_back(v);
        }
      }
    }
    // Strictly-greater keeps the earliest (smallest contained node id)
    // component on ties.
    if (size > best_size) {
      best_size = size;
      best_component = id;
    }
  }

  LccResult result;
  result.old_to_new.assign(n, LccResult::npos);
  result.new_to_old.reserve(best_size);
  for (std::uint32_t old = 0; old < n; ++old) {
    if (component[old] == best_component) {
      result.old_to_new[old] =
          static_cast<std::uint32_t>(result.new_to_old.size());
      result.new_to_old.push_back(old);
    }
  }

  const std::size_t m = result.new_to_old.size();
  EdgeList edges;
  for (std::uint32_t ni = 0; ni < m; ++ni) {
    const std::uint32_t old = result.new_to_old[ni];
    for (std::size_t k = g.adjacency.row_offsets[old];
         k < g.adjacency.row_offsets[old + 1]; ++k) {
      const std::uint32_t nj = result.old_to_new[g.adjacency.col_indices[k]];
      if (nj != LccResult::npos && nj > ni) edges.emplace_back(ni, nj);
    }
  }
  DenseMatrix features(m, g.num_features());
  std::vector<std::int32_t> labels;
  if (g.labeled()) labels.resize(m);
  for (std::uint32_t ni = 0; ni < m; ++ni) {
    const std::uint32_t old = result.new_to_old[ni];
    std::copy_n(g.features.data() + old * g.num_features(),
                g.num_features(), features.data() + ni * g.num_features());
    if (g.labeled()) labels[ni] = g.labels[old];
  }
  result.graph = make_graph(m, edges, std::move(features), std::move(labels),
                            g.labeled() ? g.num_classes : 0);
  return result;
}

NormalizedAdjacency normalize_adjacency(const AttributedGraph& g) {
  const std::size_t n = g.num_nodes;
  std::vector<double> dhat(n);
  for (std::size_t i = 0; i < n; ++i) {
    dhat[i] = static_cast<double>(g.adjacency.row_offsets[i + 1] -
                                  g.adjacency.row_offsets[i] + 1);
  }
  SparseMatrixCsr out;
  out.rows = out.cols = n;
  out.row_offsets.assign(n + 1, 0);
  out.col_indices.reserve(g.adjacency.nnz() + n);
  out.values.reserve(g.adjacency.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    bool diag_done = false;
    auto push = [&](std::uint32_t j) {
      out.col_indices.push_back(j);
      out.values.push_back(1.0 / std::sqrt(dhat[i] * dhat[j]));
    };
    for (std::size_t k = g.adjacency.row_offsets[i];
         k < g.adjacency.row_offsets[i + 1]; ++k) {
      const std::uint32_t j = g.adjacency.col_indices[k];
      if (!diag_done && j > i) {
        push(static_cast<std::uint32_t>(i));
        diag_done = true;
      }
      push(j);
    }
    if (!diag_done) push(static_cast<std::uint32_t>(i));
    out.row_offsets[i + 1] = out.col_indices.size();
  }
  return NormalizedAdjacency{std::move(out)};
}

ClassificationSplit sample_classification_split(const AttributedGraph& g,
                                                SplitMode mode, Rng& rng) {
  if (!g.labeled()) throw_data("classification split: graph has no labels");
  const std::size_t c = g.num_classes;
  const std::size_t train_size = 20 * c;
  const std::size_t val_size = 30 * c;
  if (train_size + val_size > g.num_nodes)
    throw_data("classification split: graph too small");

  ClassificationSplit split;
  split.mode = mode;
  std::vector<bool> taken(g.num_nodes, false);
  if (mode == SplitMode::balanced) {
    std::vector<std::vector<std::uint32_t>> by_class(c);
    for (std::uint32_t i = 0; i < g.num_nodes; ++i)
      by_class[static_cast<std::size_t>(g.labels[i])].push_back(i);
    for (std::size_t cls = 0; cls < c; ++cls) {
      auto& nodes = by_class[cls];
      if (nodes.size() < 50)
        throw_data("classification split: class " + std::to_string(cls) +
                   " has " + std::to_string(nodes.size()) +
                   " nodes, need >= 50 for a balanced draw");
      rng.shuffle(nodes);
      for (std::size_t k = 0; k < 20; ++k) split.train.push_back(nodes[k]);
      for (std::size_t k = 20; k < 50; ++k) split.val.push_back(nodes[k]);
      for (std::size_t k = 0; k < 50; ++k) taken[nodes[k]] = true;
    }
  } else {
    const auto order = rng.permutation(static_cast<std::uint32_t>(g.num_nodes));
    for (std::size_t k = 0; k < train_size; ++k) split.train.push_back(order[k]);
    for (std::size_t k = train_size; k < train_size + val_size; ++k)
      split.val.push_back(order[k]);
    for (std::size_t k = 0; k < train_size + val_size; ++k) taken[order[k]] = true;
  }
  for (std::uint32_t i = 0; i < g.num_nodes; ++i) {
    if (!taken[i]) split.test.push_back(i);
  }
  return split;
}

LinkSplit make_link_split(const AttributedGraph& g, Rng& rng) {
  EdgeList edges;
  std::unordered_set<std::uint64_t> edge_set;
  for (std::uint32_t i = 0; i < g.num_nodes; ++i) {
    for (std::size_t k = g.adjacency.row_offsets[i];
         k < g.adjacency.row_offsets[i + 1]; ++k) {
      const std::uint32_t j = g.adjacency.col_indices[k];
      if (j > i) {
        edges.emplace_back(i, j);
        edge_set.insert(edge_key(i, j));
      }
    }
  }
  if (edges.size() < 20)
    throw_data("link split: need at least 20 undirected edges, have " +
               std::to_string(edges.size()));

  const std::size_t n_test = edges.size() / 10;        // floor(0.10 E)
  const std::size_t n_val = edges.size() / 20;         // floor(0.05 E)
  rng.shuffle(edges);

  LinkSplit split;
  split.test_pos.assign(edges.begin(), edges.begin() + n_test);
  split.val_pos.assign(edges.begin() + n_test,
                       edges.begin() + n_test + n_val);
  EdgeList train_edges(edges.begin() + n_test + n_val, edges.end());

  split.train_graph = make_graph(g.num_nodes, train_edges, g.features,
                                 g.labels, g.num_classes);

  const std::size_t want = n_test + n_val;
  const std::size_t max_attempts = 1000 * std::max<std::size_t>(want, 1);
  std::unordered_set<std::uint64_t> used;
  EdgeList negatives;
  std::size_t attempts = 0;
  while (negatives.size() < want) {
    if (++attempts > max_attempts)
      throw_data("link split: could not sample " + std::to_string(want) +
                 " negative pairs in " + std::to_string(max_attempts) +
                 " attempts (graph too dense)");
    const auto a = static_cast<std::uint32_t>(rng.below(g.num_nodes));
    const auto b = static_cast<std::uint32_t>(rng.below(g.num_nodes));
    if (a == b) continue;
    const std::uint64_t key = edge_key(a, b);
    if (edge_set.count(key) || used.count(key)) continue;
    used.insert(key);
    negatives.emplace_back(std::min(a, b), std::max(a, b));
  }
  split.test_neg.assign(negatives.begin(), negatives.begin() + n_test);
  split.val_neg.assign(negatives.begin() + n_test, negatives.end());
  return split;
}

std::vector<std::uint32_t> corruption_permutation(std::size_t n, Rng& rng) {
  return rng.permutation(static_cast<std::uint32_t>(n));
}

DenseMatrix permute_rows(const DenseMatrix& x,
                         const std::vector<std::uint32_t>& perm) {
  if (perm.size() != x.rows()) throw_config("permute_rows: size mismatch");
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::copy_n(x.data() + static_cast<std::size_t>(perm[i]) * x.cols(),
                x.cols(), out.data() + i * x.cols());
  }
  return out;
}

AttributedGraph corrupt(const AttributedGraph& g, Rng& rng) {
  AttributedGraph fake = g;  // adjacency and labels carried over unchanged
  const auto perm = corruption_permutation(g.num_nodes, rng);
  fake.features = permute_rows(g.features, perm);
  return fake;
}

std::string classification_split_to_json(const ClassificationSplit& s) {
  json j = {{"mode", s.mode == SplitMode::balanced ? "balanced" : "imbalanced"},
            {"train", s.train},
            {"val", s.val},
            {"test", s.test}};
  return j.dump();
}

ClassificationSplit classification_split_from_json(const std::string& text) {
  const json j = json::parse(text);
  ClassificationSplit s;
  s.mode = j.at("mode").get<std::string>() == "balanced"
               ? SplitMode::balanced
               : SplitMode::imbalanced;
  s.train = j.at("train").get<std::vector<std::uint32_t>>();
  s.val = j.at("val").get<std::vector<std::uint32_t>>();
  s.test = j.at("test").get<std::vector<std::uint32_t>>();
  return s;
}

namespace {

json edges_to_json(const EdgeList& e) {
  json out = json::array();
  for (const auto& [a, b] : e) out.push_back({a, b});
  return out;
}

EdgeList edges_from_json(const json& j) {
  EdgeList out;
  for (const auto& pair : j)
    out.emplace_back(pair.at(0).get<std::uint32_t>(),
                     pair.at(1).get<std::uint32_t>());
  return out;
}

}  // namespace

std::string link_split_to_json(const LinkSplit& s) {
  json j = {{"val_pos", edges_to_json(s.val_pos)},
            {"val_neg", edges_to_json(s.val_neg)},
            {"test_pos", edges_to_json(s.test_pos)},
            {"test_neg", edges_to_json(s.test_neg)}};
  return j.dump();
}

LinkSplit link_split_from_json(const std::string& text,
                               const AttributedGraph& original) {
  const json j = json::parse(text);
  LinkSplit s;
  s.val_pos = edges_from_json(j.at("val_pos"));
  s.val_neg = edges_from_json(j.at("val_neg"));
  s.test_pos = edges_from_json(j.at("test_pos"));
  s.test_neg = edges_from_json(j.at("test_neg"));
  std::unordered_set<std::uint64_t> held_out;
  for (const auto* list : {&s.val_pos, &s.test_pos}) {
    for (const auto& [a, b] : *list) held_out.insert(edge_key(a, b));
  }
  EdgeList train_edges;
  for (std::uint32_t i = 0; i < original.num_nodes; ++i) {
    for (std::size_t k = original.adjacency.row_offsets[i];
         k < original.adjacency.row_offsets[i + 1]; ++k) {
      const std::uint32_t jj = original.adjacency.col_indices[k];
      if (jj > i && !held_out.count(edge_key(i, jj)))
        train_edges.emplace_back(i, jj);
    }
  }
  s.train_graph = make_graph(original.num_nodes, train_edges,
                             original.features, original.labels,
                             original.num_classes);
  return s;
}

}  // namespace gic
