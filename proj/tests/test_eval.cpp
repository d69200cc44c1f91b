#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gic/error.hpp"
#include "gic/eval.hpp"
#include "gic/kernels.hpp"
#include "helpers.hpp"

using namespace gic;
using test_util::random_matrix;
namespace k = gic::kernels;

namespace {

// Exhaustive pair count.
double auc_oracle(const std::vector<double>& pos,
                  const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) {
      if (p > n)
        wins += 1.0;
      else if (p == n)
        wins += 0.5;
    }
  }
  return wins / (static_cast<double>(pos.size()) * neg.size());
}

// Precision/recall sweep over every ranked prefix (same pessimistic tie
// order, different walk than the implementation's per-positive sum).
double ap_oracle(const std::vector<double>& pos,
                 const std::vector<double>& neg) {
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  for (double s : pos) items.push_back({s, true});
  for (double s : neg) items.push_back({s, false});
  std::stable_sort(items.begin(), items.end(), [](auto& a, auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return !a.positive && b.positive;
  });
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].positive) ++tp;
    const double recall = static_cast<double>(tp) / pos.size();
    const double precision = static_cast<double>(tp) / (i + 1);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

// ARI via the 2x2 pair-agreement table.
double ari_oracle(const std::vector<std::int32_t>& a,
                  const std::vector<std::int32_t>& b) {
  double n11 = 0.0, n00 = 0.0, n10 = 0.0, n01 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool same_a = a[i] == a[j];
      const bool same_b = b[i] == b[j];
      if (same_a && same_b)
        n11 += 1.0;
      else if (!same_a && !same_b)
        n00 += 1.0;
      else if (same_a)
        n10 += 1.0;
      else
        n01 += 1.0;
    }
  }
  const double denom =
      (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
  if (denom == 0.0) return 1.0;
  return 2.0 * (n11 * n00 - n10 * n01) / denom;
}

double nmi_oracle(const std::vector<std::int32_t>& a,
                  const std::vector<std::int32_t>& b) {
  const double n = static_cast<double>(a.size());
  auto classes = [](const std::vector<std::int32_t>& v) {
    std::vector<std::int32_t> u(v);
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
  };
  const auto ca = classes(a);
  const auto cb = classes(b);
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (const auto va : ca) {
    const double pa =
        std::count(a.begin(), a.end(), va) / n;
    ha -= pa * std::log(pa);
    for (const auto vb : cb) {
      double joint = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] == va && b[i] == vb) joint += 1.0;
      const double pb = std::count(b.begin(), b.end(), vb) / n;
      if (joint > 0.0)
        mi += (joint / n) * std::log((joint / n) / (pa * pb));
    }
  }
  if (ha == 0.0 && hb == 0.0) return 1.0;
  if (ha == 0.0 || hb == 0.0) return 0.0;
  return mi / (0.5 * (ha + hb));
}

// Best accuracy over all one-to-one cluster relabelings (brute force).
double acc_oracle(const std::vector<std::int32_t>& pred,
                  const std::vector<std::int32_t>& truth) {
  auto classes = [](const std::vector<std::int32_t>& v) {
    std::vector<std::int32_t> u(v);
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
  };
  const auto cp = classes(pred);
  const auto ct = classes(truth);
  const std::size_t m = std::max(cp.size(), ct.size());
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double hits = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const auto pi = static_cast<std::size_t>(
          std::lower_bound(cp.begin(), cp.end(), pred[i]) - cp.begin());
      const std::size_t mapped = perm[pi];
      if (mapped < ct.size() && truth[i] == ct[mapped]) hits += 1.0;
    }
    best = std::max(best, hits / pred.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double silhouette_oracle(const DenseMatrix& h,
                         const std::vector<std::int32_t>& labels) {
  const std::size_t n = h.rows();
  auto dist = [&](std::size_t i, std::size_t j) {
    double acc = 0.0;
    for (std::size_t f = 0; f < h.cols(); ++f) {
      const double d = h(i, f) - h(j, f);
      acc += d * d;
    }
    return std::sqrt(acc);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t own_count = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && labels[j] == labels[i]) ++own_count;
    if (own_count == 0) continue;
    double a = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && labels[j] == labels[i]) a += dist(i, j);
    a /= own_count;
    double b = std::numeric_limits<double>::infinity();
    std::vector<std::int32_t> other(labels);
    std::sort(other.begin(), other.end());
    other.erase(std::unique(other.begin(), other.end()), other.end());
    for (const auto lab : other) {
      if (lab == labels[i]) continue;
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[j] == lab) {
          sum += dist(i, j);
          ++count;
        }
      }
      if (count > 0) b = std::min(b, sum / count);
    }
    const double m = std::max(a, b);
    total += m == 0.0 ? 0.0 : (b - a) / m;
  }
  return total / n;
}

}  // namespace

TEST_CASE("classify_nodes reaches 1.0 on separable embeddings") {
  Rng rng(3);
  const std::size_t n = 120;
  DenseMatrix h(n, 4);
  std::vector<std::int32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<std::int32_t>(i % 3);
    h(i, static_cast<std::size_t>(labels[i])) = 1.0;
    h(i, 3) = rng.uniform(-0.1, 0.1);
  }
  const auto hn = k::row_l2_normalize(h);
  std::vector<std::uint32_t> train, eval;
  for (std::uint32_t i = 0; i < n; ++i)
    (i % 2 == 0 ? train : eval).push_back(i);
  Rng lr_rng(5);
  CHECK(classify_nodes(hn, train, eval, labels, 3, lr_rng) == 1.0);
}

TEST_CASE("constant embeddings predict the majority class") {
  const std::size_t n = 200;
  DenseMatrix h(n, 3, 1.0);
  std::vector<std::int32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i < 150 ? 0 : 1;
  std::vector<std::uint32_t> train, eval;
  for (std::uint32_t i = 0; i < n; i += 2) train.push_back(i);
  for (std::uint32_t i = 1; i < n; i += 2) eval.push_back(i);
  Rng rng(7);
  const double acc = classify_nodes(h, train, eval, labels, 2, rng);
  CHECK(acc == doctest::Approx(0.75).margin(0.02));
}

TEST_CASE("classify_nodes requires every class in the train set") {
  DenseMatrix h(10, 2, 1.0);
  std::vector<std::int32_t> labels(10, 0);
  labels[9] = 1;
  std::vector<std::uint32_t> train = {0, 1, 2};
  std::vector<std::uint32_t> eval = {9};
  Rng rng(9);
  CHECK_THROWS_WITH_AS((void)classify_nodes(h, train, eval, labels, 2, rng),
                       doctest::Contains("absent"), Error);
}

TEST_CASE("classification accuracy survives a global rotation") {
  // Rotate the raw embeddings, then re-normalize: separability (and the
  // resulting accuracy on a cleanly separable instance) is preserved.
  Rng rng(11);
  const std::size_t n = 90;
  DenseMatrix h(n, 2);
  std::vector<std::int32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<std::int32_t>(i % 2);
    h(i, 0) = (labels[i] == 0 ? 2.0 : -2.0) + rng.uniform(-0.2, 0.2);
    h(i, 1) = rng.uniform(-0.2, 0.2);
  }
  const double angle = 0.7;
  DenseMatrix q = DenseMatrix::from_rows(
      {{std::cos(angle), -std::sin(angle)},
       {std::sin(angle), std::cos(angle)}});
  const auto rotated = k::matmul(h, q);
  std::vector<std::uint32_t> train, eval;
  for (std::uint32_t i = 0; i < n; ++i)
    (i % 3 == 0 ? train : eval).push_back(i);
  Rng r1(13), r2(13);
  const double base =
      classify_nodes(k::row_l2_normalize(h), train, eval, labels, 2, r1);
  const double rot =
      classify_nodes(k::row_l2_normalize(rotated), train, eval, labels, 2, r2);
  CHECK(base == 1.0);
  CHECK(rot == 1.0);
}

TEST_CASE("link_scores values and symmetry") {
  DenseMatrix h = DenseMatrix::from_rows(
      {{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  const auto same = link_scores(h, {{0, 1}});
  CHECK(same[0] == doctest::Approx(k::sigmoid_scalar(1.0)).epsilon(1e-15));
  const auto ortho = link_scores(h, {{0, 2}});
  CHECK(ortho[0] == 0.5);

  Rng rng(17);
  const auto hr = k::row_l2_normalize(random_matrix(8, 5, rng));
  EdgeList pairs = {{0, 3}, {2, 7}, {5, 6}};
  EdgeList flipped = {{3, 0}, {7, 2}, {6, 5}};
  const auto fwd = link_scores(hr, pairs);
  const auto rev = link_scores(hr, flipped);
  for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
    CHECK(fwd[idx] == rev[idx]);
    double dot = 0.0;
    for (std::size_t f = 0; f < 5; ++f)
      dot += hr(pairs[idx].first, f) * hr(pairs[idx].second, f);
    CHECK(fwd[idx] == doctest::Approx(k::sigmoid_scalar(dot)).epsilon(1e-15));
  }

  CHECK_THROWS_AS((void)link_scores(hr, {{0, 12}}), Error);
}

TEST_CASE("auc basics") {
  CHECK(auc(std::vector<double>{0.9, 0.8}, std::vector<double>{0.1, 0.2}) ==
        1.0);
  CHECK(auc(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}) ==
        0.5);
  CHECK_THROWS_AS((void)auc(std::vector<double>{}, std::vector<double>{0.5}),
                  Error);
}

TEST_CASE("auc and average precision match brute force on random instances") {
  Rng rng(19);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t np = 1 + rng.below(15);
    const std::size_t nn = 1 + rng.below(15);
    std::vector<double> pos(np), neg(nn);
    // Coarse grid scores force plenty of ties.
    for (auto& s : pos) s = static_cast<double>(rng.below(8)) / 8.0;
    for (auto& s : neg) s = static_cast<double>(rng.below(8)) / 8.0;
    CHECK(std::abs(auc(pos, neg) - auc_oracle(pos, neg)) < 1e-10);
    CHECK(std::abs(average_precision(pos, neg) - ap_oracle(pos, neg)) <
          1e-10);
  }
}

TEST_CASE("average precision closed forms") {
  CHECK(average_precision(std::vector<double>{0.9}, std::vector<double>{0.1,
                                                                        0.2,
                                                                        0.3}) ==
        1.0);
  // Single positive ranked last among m+1 items.
  const std::vector<double> neg = {0.9, 0.8, 0.7, 0.6};
  CHECK(average_precision(std::vector<double>{0.1}, neg) ==
        doctest::Approx(1.0 / 5.0).epsilon(1e-15));
}

TEST_CASE("kmeans recovers well-separated blobs") {
  Rng rng(23);
  const std::size_t per = 15;
  DenseMatrix h(2 * per, 3);
  for (std::size_t i = 0; i < 2 * per; ++i) {
    const double base = i < per ? 5.0 : -5.0;
    for (std::size_t f = 0; f < 3; ++f)
      h(i, f) = base + rng.uniform(-0.3, 0.3);
  }
  Rng km_rng(29);
  const auto labels = kmeans_cluster(h, 2, km_rng);
  for (std::size_t i = 1; i < per; ++i) CHECK(labels[i] == labels[0]);
  for (std::size_t i = per + 1; i < 2 * per; ++i)
    CHECK(labels[i] == labels[per]);
  CHECK(labels[0] != labels[per]);
}

TEST_CASE("kmeans K=N and duplicate handling") {
  Rng rng(31);
  const auto h = random_matrix(6, 2, rng);
  Rng km_rng(37);
  const auto labels = kmeans_cluster(h, 6, km_rng);
  std::vector<std::int32_t> sorted(labels);
  std::sort(sorted.begin(), sorted.end());
  for (std::int32_t c = 0; c < 6; ++c) CHECK(sorted[c] == c);  // SSE 0

  // Duplicates land in the same cluster, deterministically.
  DenseMatrix dup(4, 2);
  dup(0, 0) = dup(1, 0) = 1.0;
  dup(2, 0) = dup(3, 0) = -1.0;
  Rng km2(41);
  const auto dl = kmeans_cluster(dup, 2, km2);
  CHECK(dl[0] == dl[1]);
  CHECK(dl[2] == dl[3]);
  CHECK(dl[0] != dl[2]);
  Rng km3(41);
  CHECK(kmeans_cluster(dup, 2, km3) == dl);

  Rng km4(43);
  CHECK_THROWS_AS((void)kmeans_cluster(dup, 5, km4), Error);
}

TEST_CASE("clustering metrics on exact and degenerate labelings") {
  // A permuted relabeling scores perfectly on all three metrics.
  const std::vector<std::int32_t> truth = {0, 0, 1, 1, 2, 2, 2, 0};
  const std::vector<std::int32_t> pred = {2, 2, 0, 0, 1, 1, 1, 2};
  const auto s = clustering_metrics(pred, truth);
  CHECK(s.acc == 1.0);
  CHECK(s.nmi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.ari == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<std::int32_t> single(8, 0);
  const auto d = clustering_metrics(single, truth);
  CHECK(d.nmi == 0.0);
  CHECK(d.ari == doctest::Approx(0.0).margin(1e-12));
}

TEST_CASE("clustering metrics match brute-force oracles") {
  Rng rng(43);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 5 + rng.below(26);
    const std::size_t kp = 1 + rng.below(4);
    const std::size_t kt = 1 + rng.below(4);
    std::vector<std::int32_t> pred(n), truth(n);
    for (auto& v : pred) v = static_cast<std::int32_t>(rng.below(kp));
    for (auto& v : truth) v = static_cast<std::int32_t>(rng.below(kt));
    const auto s = clustering_metrics(pred, truth);
    CHECK(std::abs(s.ari - ari_oracle(pred, truth)) < 1e-10);
    CHECK(std::abs(s.nmi - nmi_oracle(pred, truth)) < 1e-10);
    CHECK(std::abs(s.acc - acc_oracle(pred, truth)) < 1e-10);
  }
}

TEST_CASE("clustering metrics invariances") {
  Rng rng(47);
  std::vector<std::int32_t> pred(30), truth(30);
  for (auto& v : pred) v = static_cast<std::int32_t>(rng.below(4));
  for (auto& v : truth) v = static_cast<std::int32_t>(rng.below(3));
  const auto s = clustering_metrics(pred, truth);
  const auto swapped = clustering_metrics(truth, pred);
  CHECK(s.nmi == doctest::Approx(swapped.nmi).epsilon(1e-12));
  CHECK(s.ari == doctest::Approx(swapped.ari).epsilon(1e-12));

  // Accuracy is invariant under any relabeling permutation of pred.
  std::vector<std::int32_t> relabeled(pred);
  for (auto& v : relabeled) v = (v + 2) % 4;
  CHECK(clustering_metrics(relabeled, truth).acc == s.acc);
}

TEST_CASE("hungarian matches brute force on random score matrices") {
  Rng rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(5);
    const auto scores = random_matrix(n, n, rng, 0.0, 10.0);
    const auto match = hungarian_max(scores);
    double got = 0.0;
    for (std::size_t i = 0; i < n; ++i) got += scores(i, match[i]);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    do {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += scores(i, perm[i]);
      best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("silhouette conventions and hand example") {
  // Two tight, far-apart clusters score near 1.
  Rng rng(59);
  DenseMatrix tight(10, 2);
  std::vector<std::int32_t> labels(10);
  for (std::size_t i = 0; i < 10; ++i) {
    labels[i] = i < 5 ? 0 : 1;
    tight(i, 0) = (i < 5 ? 100.0 : -100.0) + rng.uniform(-0.01, 0.01);
    tight(i, 1) = rng.uniform(-0.01, 0.01);
  }
  CHECK(silhouette(tight, labels) >= 0.99);

  // All points identical across two labels: a = b = 0 scores 0.
  DenseMatrix same(6, 2, 3.0);
  std::vector<std::int32_t> two = {0, 0, 0, 1, 1, 1};
  CHECK(silhouette(same, two) == 0.0);

  // Six-point hand-checkable instance against the brute-force oracle.
  const auto pts = DenseMatrix::from_rows({{0.0, 0.0},
                                           {0.0, 1.0},
                                           {1.0, 0.0},
                                           {5.0, 5.0},
                                           {5.0, 6.0},
                                           {9.0, 9.0}});
  const std::vector<std::int32_t> lab = {0, 0, 0, 1, 1, 2};
  CHECK(silhouette(pts, lab) ==
        doctest::Approx(silhouette_oracle(pts, lab)).epsilon(1e-12));

  CHECK_THROWS_AS((void)silhouette(same, std::vector<std::int32_t>(6, 1)),
                  Error);
}

TEST_CASE("silhouette matches the oracle on random instances") {
  Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.below(27);
    const std::size_t c = 2 + rng.below(3);
    const auto h = random_matrix(n, 3, rng);
    std::vector<std::int32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = static_cast<std::int32_t>(rng.below(c));
    // Need at least two distinct labels for the metric to be defined.
    labels[0] = 0;
    labels[1] = 1;
    CHECK(std::abs(silhouette(h, labels) - silhouette_oracle(h, labels)) <
          1e-10);
  }
}
