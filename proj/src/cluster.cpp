#include "gic/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gic/error.hpp"
#include "gic/kernels.hpp"

namespace gic {

DenseMatrix init_centroids(const DenseMatrix& h, std::size_t k, Rng& rng,
                           std::vector<std::uint32_t>* chosen) {
  if (k == 0) throw_config("init_centroids: k must be positive");
  if (k > h.rows())
    throw_config("init_centroids: k=" + std::to_string(k) + " exceeds " +
                 std::to_string(h.rows()) + " nodes");
  const auto picks = rng.sample_without_replacement(
      static_cast<std::uint32_t>(h.rows()), static_cast<std::uint32_t>(k));
  DenseMatrix mu(k, h.cols());
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(h.data() + static_cast<std::size_t>(picks[c]) * h.cols(),
                h.cols(), mu.data() + c * h.cols());
  }
  if (chosen) *chosen = picks;
  return mu;
}

DenseMatrix soft_assign(const DenseMatrix& h, const DenseMatrix& centroids,
                        double beta, AssignSign sign) {
  if (beta < 0.0) throw_config("soft_assign: beta must be nonnegative");
  const double scale = assign_sign_factor(sign) * beta;
  DenseMatrix logits = kernels::cosine_rows(h, centroids);
  const std::size_t k = centroids.rows();
  DenseMatrix r(h.rows(), k);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    double maxv = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      logits(i, c) *= scale;
      maxv = std::max(maxv, logits(i, c));
    }
    double denom = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      r(i, c) = std::exp(logits(i, c) - maxv);
      denom += r(i, c);
    }
    const double inv = 1.0 / denom;
    for (std::size_t c = 0; c < k; ++c) r(i, c) *= inv;
  }
  return r;
}

std::vector<double> cluster_masses(const DenseMatrix& r) {
  std::vector<double> mass(r.cols(), 0.0);
  for (std::size_t i = 0; i < r.rows(); ++i) {
    for (std::size_t c = 0; c < r.cols(); ++c) mass[c] += r(i, c);
  }
  return mass;
}

DenseMatrix update_centroids(const DenseMatrix& h, const DenseMatrix& r,
                             const DenseMatrix& prev_centroids) {
  if (r.rows() != h.rows() || prev_centroids.cols() != h.cols() ||
      prev_centroids.rows() != r.cols())
    throw_config("update_centroids: shape mismatch");
  DenseMatrix weighted = kernels::matmul(r, h, /*transpose_a=*/true);
  const auto mass = cluster_masses(r);
  for (std::size_t c = 0; c < r.cols(); ++c) {
    if (mass[c] < kEmptyClusterMass) {
      std::copy_n(prev_centroids.data() + c * h.cols(), h.cols(),
                  weighted.data() + c * h.cols());
    } else {
      for (std::size_t f = 0; f < h.cols(); ++f)
        weighted(c, f) /= mass[c];
    }
  }
  return weighted;
}

ClusterState run_clustering(const DenseMatrix& h, std::size_t k, double beta,
                            Rng& rng, AssignSign sign,
                            std::size_t iterations) {
  if (iterations == 0) throw_config("run_clustering: need >= 1 iteration");
  ClusterState state;
  state.beta = beta;
  state.sign = sign;
  state.iterations = iterations;
  DenseMatrix mu = init_centroids(h, k, rng, &state.init_nodes);
  DenseMatrix r;
  DenseMatrix prev;
  for (std::size_t t = 0; t < iterations; ++t) {
    prev = mu;
    r = soft_assign(h, mu, beta, sign);
    mu = update_centroids(h, r, prev);
  }
  state.prev_centroids = std::move(prev);
  state.assignments = std::move(r);
  state.centroids = std::move(mu);
  return state;
}

void resume_final_pair(const DenseMatrix& h, ClusterState& state) {
  state.assignments =
      soft_assign(h, state.prev_centroids, state.beta, state.sign);
  state.centroids =
      update_centroids(h, state.assignments, state.prev_centroids);
}

DenseMatrix clustering_backward(const DenseMatrix& h,
                                const ClusterState& state,
                                const DenseMatrix& dz) {
  const std::size_t n = h.rows();
  const std::size_t d = h.cols();
  const std::size_t k = state.centroids.rows();
  const DenseMatrix& r = state.assignments;
  const DenseMatrix& mu = state.centroids;
  const DenseMatrix& prev = state.prev_centroids;

  // z = sigmoid(r * mu); dz -> d(r*mu)
  const DenseMatrix z = kernels::sigmoid(kernels::matmul(r, mu));
  const DenseMatrix g = kernels::sigmoid_backward(z, dz);

  const auto mass = cluster_masses(r);
  std::vector<char> frozen(k, 0);
  for (std::size_t c = 0; c < k; ++c)
    frozen[c] = mass[c] < kEmptyClusterMass;

  // Centroid path: mu_c = sum_i r[i][c] h_i / mass_c.
  DenseMatrix dmu = kernels::matmul(r, g, /*transpose_a=*/true);  // K x F'
  for (std::size_t c = 0; c < k; ++c) {
    if (frozen[c]) {
      for (std::size_t f = 0; f < d; ++f) dmu(c, f) = 0.0;
    }
  }
  DenseMatrix r_scaled(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      r_scaled(i, c) = frozen[c] ? 0.0 : r(i, c) / mass[c];
    }
  }
  DenseMatrix dh = kernels::matmul(r_scaled, dmu);  // N x F'

  // Assignment path: direct term from r*mu plus the term through mu's
  // dependence on r.
  DenseMatrix dr = kernels::matmul(g, mu, false, /*transpose_b=*/true);
  const DenseMatrix hd = kernels::matmul(h, dmu, false, true);  // N x K
  std::vector<double> centroid_dot(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    double acc = 0.0;
    for (std::size_t f = 0; f < d; ++f) acc += dmu(c, f) * mu(c, f);
    centroid_dot[c] = acc;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      if (!frozen[c]) dr(i, c) += (hd(i, c) - centroid_dot[c]) / mass[c];
    }
  }

  // Softmax backward, then through sign*beta*cos(h_i, prev_c) with prev
  // held constant.
  const double scale = assign_sign_factor(state.sign) * state.beta;
  const DenseMatrix cos_sim = kernels::cosine_rows(h, prev);
  std::vector<double> hnorm(n, 0.0), pnorm(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t f = 0; f < d; ++f) acc += h(i, f) * h(i, f);
    hnorm[i] = std::sqrt(acc);
  }
  for (std::size_t c = 0; c < k; ++c) {
    double acc = 0.0;
    for (std::size_t f = 0; f < d; ++f) acc += prev(c, f) * prev(c, f);
    pnorm[c] = std::sqrt(acc);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (std::size_t c = 0; c < k; ++c) dot += r(i, c) * dr(i, c);
    if (hnorm[i] == 0.0) continue;  // cosine is constant 0 there
    double crossdot = 0.0;  // sum_c dcos_ic * cos_ic
    double* dhrow = dh.data() + i * d;
    const double* hrow = h.data() + i * d;
    for (std::size_t c = 0; c < k; ++c) {
      const double dlogit = r(i, c) * (dr(i, c) - dot);
      const double dcos = scale * dlogit;
      if (pnorm[c] == 0.0 || dcos == 0.0) continue;
      const double w = dcos / (hnorm[i] * pnorm[c]);
      const double* prow = prev.data() + c * d;
      for (std::size_t f = 0; f < d; ++f) dhrow[f] += w * prow[f];
      crossdot += dcos * cos_sim(i, c);
    }
    if (crossdot != 0.0) {
      const double w = crossdot / (hnorm[i] * hnorm[i]);
      for (std::size_t f = 0; f < d; ++f) dhrow[f] -= w * hrow[f];
    }
  }
  return dh;
}

}  // namespace gic
