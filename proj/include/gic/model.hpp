#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gic/cluster.hpp"
#include "gic/graph.hpp"
#include "gic/matrix.hpp"
#include "gic/rng.hpp"

namespace gic {

// Everything the optimizer updates: GCN weight, shared PReLU slope, and the
// bilinear discriminator weight.
struct ModelParams {
  DenseMatrix theta;       // F x F'
  double prelu_slope = 0.25;
  DenseMatrix bilinear_w;  // F' x F'

  static ModelParams glorot(std::size_t num_features, std::size_t embed_dim,
                            Rng& rng);
  std::size_t num_features() const { return theta.rows(); }
  std::size_t embed_dim() const { return theta.cols(); }
};

struct Gradients {
  DenseMatrix theta;
  double prelu_slope = 0.0;
  DenseMatrix bilinear_w;
};

// Forward-pass hyperparameters. alpha == 1 disables the cluster branch
// entirely (no cluster randomness is consumed), which recovers the
// graph-summary-only objective.
struct GicConfig {
  double alpha = 0.5;
  double beta = 100.0;
  std::size_t num_clusters = 32;
  AssignSign sign = AssignSign::plus;
  std::size_t cluster_iterations = 10;
};

// Probabilities are clamped into [kProbEps, 1 - kProbEps] before any log.
inline constexpr double kProbEps = 1e-7;

struct ForwardCache {
  std::vector<std::uint32_t> perm;  // corruption permutation of this pass

  DenseMatrix pre_act;       // A_norm X Theta
  DenseMatrix pre_act_fake;
  DenseMatrix emb;           // H
  DenseMatrix emb_fake;      // H~

  DenseMatrix summary_mean;  // 1 x F', mean of H rows (pre-sigmoid)
  DenseMatrix summary;       // s = sigmoid(summary_mean)

  bool has_cluster = false;
  ClusterState cluster;
  DenseMatrix cluster_summaries;  // z = sigmoid(r mu), N x F'

  // Raw discriminator outputs for the four sample families.
  std::vector<double> p_global_real, p_global_fake;
  std::vector<double> p_cluster_real, p_cluster_fake;
};

// H = PReLU(A_norm X Theta).
DenseMatrix encode(const ModelParams& params, const NormalizedAdjacency& adj,
                   const DenseMatrix& x);

// s = sigmoid(column means of h); 1 x F'.
DenseMatrix global_summary(const DenseMatrix& h);

// z = sigmoid(r mu) rowwise; always built from the real graph's r and mu.
DenseMatrix node_cluster_summaries(const DenseMatrix& r,
                                   const DenseMatrix& mu);

// sigmoid(h^T W s) and sigmoid(h^T z) for a single pair.
double disc_global(std::span<const double> h, const DenseMatrix& w,
                   std::span<const double> s);
double disc_cluster(std::span<const double> h, std::span<const double> z);

// Full pass: encoder on real and corrupted inputs, summaries, clustering
// (unless alpha == 1, drawn from cluster_rng), discriminators.
ForwardCache forward(const ModelParams& params, const NormalizedAdjacency& adj,
                     const DenseMatrix& x,
                     std::vector<std::uint32_t> perm, const GicConfig& config,
                     Rng& cluster_rng);

// Recomputes a cache from new parameters under the last-iteration-unroll
// convention: the corruption permutation and the frozen penultimate
// centroids are taken from `base`. With identical parameters this
// reproduces `base` exactly; it is the function whose finite differences
// `backward` matches.
ForwardCache forward_resume(const ModelParams& params,
                            const NormalizedAdjacency& adj,
                            const DenseMatrix& x, const ForwardCache& base);

// Minimization form: -(alpha * L1 + (1 - alpha) * LK), per-node means.
double loss_total(const ForwardCache& cache, double alpha);

// Exact gradient of loss_total composed with forward_resume.
Gradients backward(const ForwardCache& cache, const ModelParams& params,
                   const NormalizedAdjacency& adj, const DenseMatrix& x,
                   double alpha);

// Checkpoint: JSON envelope plus CSV blocks in a directory.
struct CheckpointMeta {
  double alpha = 0.5;
  double beta = 100.0;
  std::size_t num_clusters = 32;
  std::uint64_t seed = 1;
  AssignSign sign = AssignSign::plus;
};
void save_checkpoint(const std::filesystem::path& dir,
                     const ModelParams& params, const CheckpointMeta& meta);
struct Checkpoint {
  ModelParams params;
  CheckpointMeta meta;
};
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace gic
