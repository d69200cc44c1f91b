#pragma once

#include <cstdint>
#include <vector>

#include "gic/matrix.hpp"
#include "gic/rng.hpp"

namespace gic {

// Sign of the similarity inside the assignment softmax. The printed update
// uses exp(-beta*sim), which with a cosine *similarity* would attract nodes
// to their least-similar centroid; `plus` keeps K-means semantics and is
// the default, `minus` reproduces the printed form.
enum class AssignSign { plus, minus };

inline double assign_sign_factor(AssignSign s) {
  return s == AssignSign::plus ? 1.0 : -1.0;
}

// Final state of the iterative soft K-means layer. prev_centroids holds the
// penultimate centroids: the gradient convention differentiates only the
// last assign/update pair, treating everything before it as constant.
struct ClusterState {
  DenseMatrix centroids;       // K x F'
  DenseMatrix assignments;     // N x K, rows sum to 1
  DenseMatrix prev_centroids;  // K x F'
  std::vector<std::uint32_t> init_nodes;
  double beta = 10.0;
  AssignSign sign = AssignSign::plus;
  std::size_t iterations = 10;
};

// Mass below which a cluster is considered empty; its centroid is then kept
// at the previous value (and carries no gradient).
inline constexpr double kEmptyClusterMass = 1e-12;

// K distinct uniformly chosen rows of h.
DenseMatrix init_centroids(const DenseMatrix& h, std::size_t k, Rng& rng,
                           std::vector<std::uint32_t>* chosen = nullptr);

// r[i][k] = softmax_k(sign * beta * cos(h_i, mu_k)).
DenseMatrix soft_assign(const DenseMatrix& h, const DenseMatrix& centroids,
                        double beta, AssignSign sign = AssignSign::plus);

// mu_k = sum_i r[i][k] h_i / sum_i r[i][k]; empty clusters keep
// prev_centroids.
DenseMatrix update_centroids(const DenseMatrix& h, const DenseMatrix& r,
                             const DenseMatrix& prev_centroids);

// `iterations` rounds of assign/update starting from random centroids.
ClusterState run_clustering(const DenseMatrix& h, std::size_t k, double beta,
                            Rng& rng, AssignSign sign = AssignSign::plus,
                            std::size_t iterations = 10);

// Recomputes the final assign/update pair of `state` from (possibly new)
// embeddings, keeping prev_centroids frozen. With unchanged h this
// reproduces the state run_clustering returned, bit for bit.
void resume_final_pair(const DenseMatrix& h, ClusterState& state);

// dL/dH for the unrolled pair followed by z = sigmoid(r * mu), given
// dz = dL/dz. prev_centroids are constants; frozen (empty) clusters
// contribute only through the direct r path.
DenseMatrix clustering_backward(const DenseMatrix& h,
                                const ClusterState& state,
                                const DenseMatrix& dz);

// Column sums of the assignment matrix (cluster masses).
std::vector<double> cluster_masses(const DenseMatrix& r);

}  // namespace gic
