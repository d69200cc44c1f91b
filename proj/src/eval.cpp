#include "gic/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gic/error.hpp"
#include "gic/kernels.hpp"

namespace gic {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot_rows(const DenseMatrix& h, std::size_t i, std::size_t j) {
  const double* a = h.data() + i * h.cols();
  const double* b = h.data() + j * h.cols();
  double acc = 0.0;
  for (std::size_t f = 0; f < h.cols(); ++f) acc += a[f] * b[f];
  return acc;
}

double sq_dist(const double* a, const double* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t f = 0; f < d; ++f) {
    const double diff = a[f] - b[f];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

double classify_nodes(const DenseMatrix& h,
                      std::span<const std::uint32_t> train_ids,
                      std::span<const std::uint32_t> eval_ids,
                      const std::vector<std::int32_t>& labels,
                      std::size_t num_classes, Rng& rng, std::size_t epochs,
                      double lr) {
  if (labels.size() != h.rows())
    throw_config("classify_nodes: label/embedding mismatch");
  if (num_classes == 0) throw_config("classify_nodes: no classes");
  const std::size_t d = h.cols();
  const std::size_t c = num_classes;

  std::vector<std::size_t> train_count(c, 0);
  for (const std::uint32_t id : train_ids)
    ++train_count[static_cast<std::size_t>(labels[id])];
  for (std::size_t cls = 0; cls < c; ++cls) {
    if (train_count[cls] == 0)
      throw_data("classify_nodes: class " + std::to_string(cls) +
                 " absent from train set");
  }

  LogRegParams reg;
  reg.weight = DenseMatrix(c, d);
  reg.bias.assign(c, 0.0);
  {
    const double limit = std::sqrt(6.0 / static_cast<double>(c + d));
    double* p = reg.weight.data();
    for (std::size_t i = 0; i < reg.weight.size(); ++i)
      p[i] = rng.uniform(-limit, limit);
  }

  DenseMatrix m_w(c, d), v_w(c, d);
  std::vector<double> m_b(c, 0.0), v_b(c, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double inv_train = 1.0 / static_cast<double>(train_ids.size());

  std::vector<double> logits(c), probs(c);
  DenseMatrix g_w(c, d);
  std::vector<double> g_b(c);

  for (std::size_t step = 1; step <= epochs; ++step) {
    std::fill(g_w.data(), g_w.data() + g_w.size(), 0.0);
    std::fill(g_b.begin(), g_b.end(), 0.0);
    for (const std::uint32_t id : train_ids) {
      const double* x = h.data() + static_cast<std::size_t>(id) * d;
      double maxv = -kInf;
      for (std::size_t k = 0; k < c; ++k) {
        const double* w = reg.weight.data() + k * d;
        double acc = reg.bias[k];
        for (std::size_t f = 0; f < d; ++f) acc += w[f] * x[f];
        logits[k] = acc;
        maxv = std::max(maxv, acc);
      }
      double denom = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        probs[k] = std::exp(logits[k] - maxv);
        denom += probs[k];
      }
      const auto y = static_cast<std::size_t>(labels[id]);
      for (std::size_t k = 0; k < c; ++k) {
        const double residual = probs[k] / denom - (k == y ? 1.0 : 0.0);
        g_b[k] += residual;
        double* gw = g_w.data() + k * d;
        for (std::size_t f = 0; f < d; ++f) gw[f] += residual * x[f];
      }
    }
    const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < g_w.size(); ++i) {
      const double g = g_w.data()[i] * inv_train;
      double& m = m_w.data()[i];
      double& v = v_w.data()[i];
      m = beta1 * m + (1.0 - beta1) * g;
      v = beta2 * v + (1.0 - beta2) * g * g;
      reg.weight.data()[i] -= lr * (m / corr1) / (std::sqrt(v / corr2) + eps);
    }
    for (std::size_t k = 0; k < c; ++k) {
      const double g = g_b[k] * inv_train;
      m_b[k] = beta1 * m_b[k] + (1.0 - beta1) * g;
      v_b[k] = beta2 * v_b[k] + (1.0 - beta2) * g * g;
      reg.bias[k] -= lr * (m_b[k] / corr1) / (std::sqrt(v_b[k] / corr2) + eps);
    }
  }

  std::size_t correct = 0;
  for (const std::uint32_t id : eval_ids) {
    const double* x = h.data() + static_cast<std::size_t>(id) * d;
    std::size_t best = 0;
    double best_score = -kInf;
    for (std::size_t k = 0; k < c; ++k) {
      const double* w = reg.weight.data() + k * d;
      double acc = reg.bias[k];
      for (std::size_t f = 0; f < d; ++f) acc += w[f] * x[f];
      if (acc > best_score) {
        best_score = acc;
        best = k;
      }
    }
    if (static_cast<std::int32_t>(best) == labels[id]) ++correct;
  }
  if (eval_ids.empty()) throw_config("classify_nodes: empty eval set");
  return static_cast<double>(correct) / static_cast<double>(eval_ids.size());
}

double classify_nodes(const DenseMatrix& h, const ClassificationSplit& split,
                      const std::vector<std::int32_t>& labels,
                      std::size_t num_classes, Rng& rng) {
  return classify_nodes(h, split.train, split.test, labels, num_classes, rng);
}

std::vector<double> link_scores(const DenseMatrix& h, const EdgeList& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (i >= h.rows() || j >= h.rows())
      throw_data("link_scores: node index out of range");
    out.push_back(kernels::sigmoid_scalar(dot_rows(h, i, j)));
  }
  return out;
}

double auc(std::span<const double> pos_scores,
           std::span<const double> neg_scores) {
  if (pos_scores.empty() || neg_scores.empty())
    throw_config("auc: empty score list");
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(pos_scores.size() + neg_scores.size());
  for (double s : pos_scores) items.push_back({s, true});
  for (double s : neg_scores) items.push_back({s, false});
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score < b.score; });
  // Average ranks across ties, then the Mann-Whitney U statistic.
  double rank_sum_pos = 0.0;
  std::size_t idx = 0;
  while (idx < items.size()) {
    std::size_t end = idx;
    while (end < items.size() && items[end].score == items[idx].score) ++end;
    const double avg_rank = 0.5 * static_cast<double>(idx + 1 + end);
    for (std::size_t k = idx; k < end; ++k) {
      if (items[k].positive) rank_sum_pos += avg_rank;
    }
    idx = end;
  }
  const double np = static_cast<double>(pos_scores.size());
  const double nn = static_cast<double>(neg_scores.size());
  const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

double average_precision(std::span<const double> pos_scores,
                         std::span<const double> neg_scores) {
  if (pos_scores.empty() || neg_scores.empty())
    throw_config("average_precision: empty score list");
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(pos_scores.size() + neg_scores.size());
  for (double s : pos_scores) items.push_back({s, true});
  for (double s : neg_scores) items.push_back({s, false});
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return !a.positive && b.positive;  // negatives first
                   });
  double ap = 0.0;
  std::size_t tp = 0, fp = 0;
  for (const Item& item : items) {
    if (item.positive) {
      ++tp;
      ap += static_cast<double>(tp) / static_cast<double>(tp + fp);
    } else {
      ++fp;
    }
  }
  return ap / static_cast<double>(pos_scores.size());
}

std::vector<std::int32_t> kmeans_cluster(const DenseMatrix& h, std::size_t k,
                                         Rng& rng, std::size_t restarts,
                                         std::size_t max_iterations) {
  const std::size_t n = h.rows();
  const std::size_t d = h.cols();
  if (k == 0 || k > n) throw_config("kmeans: k must lie in [1, N]");

  std::vector<std::int32_t> best_labels;
  double best_sse = kInf;
  for (std::size_t restart = 0; restart < restarts; ++restart) {
    const auto seeds = rng.sample_without_replacement(
        static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(k));
    DenseMatrix centroids(k, d);
    for (std::size_t c = 0; c < k; ++c) {
      std::copy_n(h.data() + static_cast<std::size_t>(seeds[c]) * d, d,
                  centroids.data() + c * d);
    }
    std::vector<std::int32_t> assign(n, -1);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        const double* x = h.data() + i * d;
        std::int32_t best_c = 0;
        double best_d = kInf;
        for (std::size_t c = 0; c < k; ++c) {
          const double dist = sq_dist(x, centroids.data() + c * d, d);
          if (dist < best_d) {  // strict: ties keep the lowest index
            best_d = dist;
            best_c = static_cast<std::int32_t>(c);
          }
        }
        if (assign[i] != best_c) {
          assign[i] = best_c;
          changed = true;
        }
      }
      if (!changed) break;
      std::vector<std::size_t> counts(k, 0);
      DenseMatrix sums(k, d);
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(assign[i]);
        ++counts[c];
        const double* x = h.data() + i * d;
        double* s = sums.data() + c * d;
        for (std::size_t f = 0; f < d; ++f) s[f] += x[f];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;  // empty cluster keeps its centroid
        const double inv = 1.0 / static_cast<double>(counts[c]);
        double* cc = centroids.data() + c * d;
        const double* s = sums.data() + c * d;
        for (std::size_t f = 0; f < d; ++f) cc[f] = s[f] * inv;
      }
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sse += sq_dist(h.data() + i * d,
                     centroids.data() +
                         static_cast<std::size_t>(assign[i]) * d,
                     d);
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_labels = assign;
    }
  }
  return best_labels;
}

std::vector<std::size_t> hungarian_max(const DenseMatrix& scores) {
  const std::size_t rows = scores.rows();
  const std::size_t cols = scores.cols();
  const std::size_t n = std::max(rows, cols);
  double max_score = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    max_score = std::max(max_score, scores.data()[i]);
  // Pad to square and convert to a min-cost problem.
  DenseMatrix cost(n, n, max_score);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j)
      cost(i, j) = max_score - scores(i, j);
  }

  // Assignment with potentials (O(n^3)), 1-based internally.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  constexpr auto npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> result(rows, npos);
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = match[j];
    if (i >= 1 && i <= rows && j <= cols) result[i - 1] = j - 1;
  }
  return result;
}

ClusteringScores clustering_metrics(const std::vector<std::int32_t>& pred,
                                    const std::vector<std::int32_t>& truth) {
  if (pred.size() != truth.size())
    throw_config("clustering_metrics: length mismatch");
  if (pred.empty()) throw_config("clustering_metrics: empty labeling");
  const auto relabel = [](const std::vector<std::int32_t>& v,
                          std::vector<std::size_t>& out) {
    std::vector<std::int32_t> uniq(v);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = static_cast<std::size_t>(
          std::lower_bound(uniq.begin(), uniq.end(), v[i]) - uniq.begin());
    }
    return uniq.size();
  };
  std::vector<std::size_t> p, t;
  const std::size_t np = relabel(pred, p);
  const std::size_t nt = relabel(truth, t);
  const std::size_t n = pred.size();

  DenseMatrix contingency(np, nt);
  for (std::size_t i = 0; i < n; ++i) contingency(p[i], t[i]) += 1.0;
  std::vector<double> a(np, 0.0), b(nt, 0.0);
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < nt; ++j) a[i] += contingency(i, j);
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t i = 0; i < np; ++i) b[j] += contingency(i, j);

  ClusteringScores scores;

  // Accuracy under the best one-to-one cluster/class matching.
  const auto match = hungarian_max(contingency);
  double matched = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    if (match[i] != static_cast<std::size_t>(-1))
      matched += contingency(i, match[i]);
  }
  scores.acc = matched / static_cast<double>(n);

  // NMI, arithmetic-mean normalization.
  const double dn = static_cast<double>(n);
  double mi = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const double nij = contingency(i, j);
      if (nij > 0.0) mi += (nij / dn) * std::log((dn * nij) / (a[i] * b[j]));
    }
  }
  double hu = 0.0, hv = 0.0;
  for (double ai : a)
    if (ai > 0.0) hu -= (ai / dn) * std::log(ai / dn);
  for (double bj : b)
    if (bj > 0.0) hv -= (bj / dn) * std::log(bj / dn);
  if (hu == 0.0 && hv == 0.0) {
    scores.nmi = 1.0;  // both partitions trivial and identical
  } else if (hu == 0.0 || hv == 0.0) {
    scores.nmi = 0.0;
  } else {
    scores.nmi = mi / (0.5 * (hu + hv));
  }

  // ARI with the permutation-model expectation correction.
  const auto choose2 = [](double x) { return 0.5 * x * (x - 1.0); };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < nt; ++j) sum_ij += choose2(contingency(i, j));
  for (double ai : a) sum_a += choose2(ai);
  for (double bj : b) sum_b += choose2(bj);
  const double pairs = choose2(dn);
  if (pairs == 0.0) {
    scores.ari = 1.0;
  } else {
    const double expected = sum_a * sum_b / pairs;
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    scores.ari = denom == 0.0 ? 1.0 : (sum_ij - expected) / denom;
  }
  return scores;
}

double silhouette(const DenseMatrix& h,
                  const std::vector<std::int32_t>& labels) {
  const std::size_t n = h.rows();
  if (labels.size() != n) throw_config("silhouette: label count mismatch");
  std::vector<std::int32_t> uniq(labels);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < 2) throw_data("silhouette: need at least two labels");
  const std::size_t c = uniq.size();
  std::vector<std::size_t> label_ix(n);
  std::vector<std::size_t> counts(c, 0);
  for (std::size_t i = 0; i < n; ++i) {
    label_ix[i] = static_cast<std::size_t>(
        std::lower_bound(uniq.begin(), uniq.end(), labels[i]) - uniq.begin());
    ++counts[label_ix[i]];
  }

  double total = 0.0;
  std::vector<double> dist_sum(c);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[label_ix[i]] == 1) continue;  // singleton scores 0
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    const double* xi = h.data() + i * h.cols();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist_sum[label_ix[j]] +=
          std::sqrt(sq_dist(xi, h.data() + j * h.cols(), h.cols()));
    }
    const std::size_t own = label_ix[i];
    const double a = dist_sum[own] / static_cast<double>(counts[own] - 1);
    double b = kInf;
    for (std::size_t k = 0; k < c; ++k) {
      if (k == own || counts[k] == 0) continue;
      b = std::min(b, dist_sum[k] / static_cast<double>(counts[k]));
    }
    const double denom = std::max(a, b);
    total += denom == 0.0 ? 0.0 : (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

}  // namespace gic
