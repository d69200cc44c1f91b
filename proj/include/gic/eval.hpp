#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gic/graph.hpp"
#include "gic/matrix.hpp"
#include "gic/rng.hpp"

namespace gic {

// Softmax regression used as the downstream node classifier.
struct LogRegParams {
  DenseMatrix weight;         // C x F'
  std::vector<double> bias;   // C
};

// Trains softmax regression (full-batch Adam, lr 0.01, 1000 epochs, Glorot
// init, no regularization) on train_ids and returns the fraction of
// eval_ids classified correctly. Embeddings are expected row-normalized.
double classify_nodes(const DenseMatrix& h, std::span<const std::uint32_t> train_ids,
                      std::span<const std::uint32_t> eval_ids,
                      const std::vector<std::int32_t>& labels,
                      std::size_t num_classes, Rng& rng,
                      std::size_t epochs = 1000, double lr = 0.01);

double classify_nodes(const DenseMatrix& h, const ClassificationSplit& split,
                      const std::vector<std::int32_t>& labels,
                      std::size_t num_classes, Rng& rng);

// p(i, j) = sigmoid(h_i . h_j); callers pass row-normalized embeddings.
std::vector<double> link_scores(const DenseMatrix& h, const EdgeList& pairs);

// Mann-Whitney AUC: fraction of (pos, neg) pairs ranked correctly, ties
// counted one half.
double auc(std::span<const double> pos_scores,
           std::span<const double> neg_scores);

// Step-interpolated average precision over the descending-score ranking;
// ties are broken pessimistically (negatives first).
double average_precision(std::span<const double> pos_scores,
                         std::span<const double> neg_scores);

// Lloyd's K-means (hard assignments, Euclidean), `restarts` inits keeping
// the lowest within-cluster SSE, at most `max_iterations` sweeps each.
// Assignment ties go to the lowest centroid index.
std::vector<std::int32_t> kmeans_cluster(const DenseMatrix& h, std::size_t k,
                                         Rng& rng, std::size_t restarts = 10,
                                         std::size_t max_iterations = 300);

struct ClusteringScores {
  double acc = 0.0;  // optimal one-to-one label matching (Hungarian)
  double nmi = 0.0;  // arithmetic-mean normalization
  double ari = 0.0;  // permutation-model expectation correction
};

ClusteringScores clustering_metrics(const std::vector<std::int32_t>& pred,
                                    const std::vector<std::int32_t>& truth);

// Mean silhouette coefficient with Euclidean distance in the given space;
// singleton-cluster points score 0.
double silhouette(const DenseMatrix& h,
                  const std::vector<std::int32_t>& labels);

// Maximum-weight one-to-one assignment on a nonnegative score matrix;
// returns the matched column for each row (or npos when rows > cols).
std::vector<std::size_t> hungarian_max(const DenseMatrix& scores);

}  // namespace gic
