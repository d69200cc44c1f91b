#include "gic/model.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gic/error.hpp"
#include "gic/kernels.hpp"

namespace gic {
namespace {

using json = nlohmann::json;

void fill_glorot(DenseMatrix& m, std::size_t fan_in, std::size_t fan_out,
                 Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = rng.uniform(-limit, limit);
}

double clamp_prob(double p) {
  return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

bool in_clamp_range(double p) { return p > kProbEps && p < 1.0 - kProbEps; }

// sigmoid(rows of h dotted with t); t is F'.
std::vector<double> bilinear_scores(const DenseMatrix& h,
                                    const std::vector<double>& t) {
  std::vector<double> out(h.rows());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const double* row = h.data() + i * h.cols();
    double acc = 0.0;
    for (std::size_t f = 0; f < h.cols(); ++f) acc += row[f] * t[f];
    out[i] = kernels::sigmoid_scalar(acc);
  }
  return out;
}

std::vector<double> pairwise_scores(const DenseMatrix& h,
                                    const DenseMatrix& z) {
  std::vector<double> out(h.rows());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const double* hrow = h.data() + i * h.cols();
    const double* zrow = z.data() + i * z.cols();
    double acc = 0.0;
    for (std::size_t f = 0; f < h.cols(); ++f) acc += hrow[f] * zrow[f];
    out[i] = kernels::sigmoid_scalar(acc);
  }
  return out;
}

std::vector<double> w_times_s(const DenseMatrix& w, const DenseMatrix& s) {
  std::vector<double> t(w.rows(), 0.0);
  for (std::size_t p = 0; p < w.rows(); ++p) {
    double acc = 0.0;
    for (std::size_t q = 0; q < w.cols(); ++q) acc += w(p, q) * s(0, q);
    t[p] = acc;
  }
  return t;
}

double mean_log_clamped(const std::vector<double>& probs, bool positive) {
  double acc = 0.0;
  for (double p : probs) {
    acc += std::log(positive ? clamp_prob(p) : 1.0 - clamp_prob(p));
  }
  return acc / static_cast<double>(probs.size());
}

// Completes a cache whose embeddings (and cluster assignments, when
// present) are already in place: summaries and discriminator outputs.
void finish_cache(ForwardCache& cache, const ModelParams& params) {
  cache.summary_mean = DenseMatrix(1, cache.emb.cols());
  const std::size_t n = cache.emb.rows();
  const std::size_t d = cache.emb.cols();
  for (std::size_t f = 0; f < d; ++f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += cache.emb(i, f);
    cache.summary_mean(0, f) = acc / static_cast<double>(n);
  }
  cache.summary = kernels::sigmoid(cache.summary_mean);

  const auto t = w_times_s(params.bilinear_w, cache.summary);
  cache.p_global_real = bilinear_scores(cache.emb, t);
  cache.p_global_fake = bilinear_scores(cache.emb_fake, t);

  if (cache.has_cluster) {
    cache.cluster_summaries = node_cluster_summaries(
        cache.cluster.assignments, cache.cluster.centroids);
    cache.p_cluster_real = pairwise_scores(cache.emb, cache.cluster_summaries);
    cache.p_cluster_fake =
        pairwise_scores(cache.emb_fake, cache.cluster_summaries);
  }
}

void encode_into(ForwardCache& cache, const ModelParams& params,
                 const NormalizedAdjacency& adj, const DenseMatrix& x) {
  // The corrupted input is a row permutation of X, so X~ Theta is the same
  // row permutation of X Theta; each row's arithmetic is untouched.
  const DenseMatrix xt = kernels::matmul(x, params.theta);
  cache.pre_act = kernels::spmm(adj.matrix, xt);
  cache.pre_act_fake =
      kernels::spmm(adj.matrix, permute_rows(xt, cache.perm));
  cache.emb = kernels::prelu(cache.pre_act, params.prelu_slope);
  cache.emb_fake = kernels::prelu(cache.pre_act_fake, params.prelu_slope);
}

}  // namespace

ModelParams ModelParams::glorot(std::size_t num_features,
                                std::size_t embed_dim, Rng& rng) {
  ModelParams p;
  p.theta = DenseMatrix(num_features, embed_dim);
  p.bilinear_w = DenseMatrix(embed_dim, embed_dim);
  p.prelu_slope = 0.25;
  fill_glorot(p.theta, num_features, embed_dim, rng);
  fill_glorot(p.bilinear_w, embed_dim, embed_dim, rng);
  return p;
}

DenseMatrix encode(const ModelParams& params, const NormalizedAdjacency& adj,
                   const DenseMatrix& x) {
  if (x.cols() != params.theta.rows())
    throw_config("encode: feature dimension mismatch (" +
                 std::to_string(x.cols()) + " vs " +
                 std::to_string(params.theta.rows()) + ")");
  if (adj.matrix.cols != x.rows())
    throw_config("encode: adjacency/features mismatch");
  return kernels::prelu(
      kernels::spmm(adj.matrix, kernels::matmul(x, params.theta)),
      params.prelu_slope);
}

DenseMatrix global_summary(const DenseMatrix& h) {
  if (h.rows() == 0) throw_config("global_summary: empty embedding matrix");
  DenseMatrix mean(1, h.cols());
  for (std::size_t f = 0; f < h.cols(); ++f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < h.rows(); ++i) acc += h(i, f);
    mean(0, f) = acc / static_cast<double>(h.rows());
  }
  return kernels::sigmoid(mean);
}

DenseMatrix node_cluster_summaries(const DenseMatrix& r,
                                   const DenseMatrix& mu) {
  if (r.cols() != mu.rows())
    throw_config("node_cluster_summaries: shape mismatch");
  return kernels::sigmoid(kernels::matmul(r, mu));
}

double disc_global(std::span<const double> h, const DenseMatrix& w,
                   std::span<const double> s) {
  if (h.size() != w.rows() || s.size() != w.cols())
    throw_config("disc_global: shape mismatch");
  double u = 0.0;
  for (std::size_t p = 0; p < h.size(); ++p) {
    double acc = 0.0;
    for (std::size_t q = 0; q < s.size(); ++q) acc += w(p, q) * s[q];
    u += h[p] * acc;
  }
  return kernels::sigmoid_scalar(u);
}

double disc_cluster(std::span<const double> h, std::span<const double> z) {
  if (h.size() != z.size()) throw_config("disc_cluster: length mismatch");
  double u = 0.0;
  for (std::size_t f = 0; f < h.size(); ++f) u += h[f] * z[f];
  return kernels::sigmoid_scalar(u);
}

ForwardCache forward(const ModelParams& params, const NormalizedAdjacency& adj,
                     const DenseMatrix& x, std::vector<std::uint32_t> perm,
                     const GicConfig& config, Rng& cluster_rng) {
  if (config.alpha < 0.0 || config.alpha > 1.0)
    throw_config("forward: alpha must lie in [0, 1]");
  ForwardCache cache;
  cache.perm = std::move(perm);
  if (cache.perm.size() != x.rows())
    throw_config("forward: permutation size mismatch");
  encode_into(cache, params, adj, x);
  if (config.alpha != 1.0) {
    cache.has_cluster = true;
    cache.cluster =
        run_clustering(cache.emb, config.num_clusters, config.beta,
                       cluster_rng, config.sign, config.cluster_iterations);
  }
  finish_cache(cache, params);
  return cache;
}

ForwardCache forward_resume(const ModelParams& params,
                            const NormalizedAdjacency& adj,
                            const DenseMatrix& x, const ForwardCache& base) {
  ForwardCache cache;
  cache.perm = base.perm;
  encode_into(cache, params, adj, x);
  if (base.has_cluster) {
    cache.has_cluster = true;
    cache.cluster.beta = base.cluster.beta;
    cache.cluster.sign = base.cluster.sign;
    cache.cluster.iterations = base.cluster.iterations;
    cache.cluster.init_nodes = base.cluster.init_nodes;
    cache.cluster.prev_centroids = base.cluster.prev_centroids;
    resume_final_pair(cache.emb, cache.cluster);
  }
  finish_cache(cache, params);
  return cache;
}

double loss_total(const ForwardCache& cache, double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw_config("loss_total: alpha must lie in [0, 1]");
  const double l1 = mean_log_clamped(cache.p_global_real, true) +
                    mean_log_clamped(cache.p_global_fake, false);
  double lk = 0.0;
  if (cache.has_cluster) {
    lk = mean_log_clamped(cache.p_cluster_real, true) +
         mean_log_clamped(cache.p_cluster_fake, false);
  } else if (alpha != 1.0) {
    throw_config("loss_total: alpha < 1 requires cluster state");
  }
  const double loss = -(alpha * l1 + (1.0 - alpha) * lk);
  if (!std::isfinite(loss)) throw_numeric("loss_total: non-finite loss");
  return loss;
}

Gradients backward(const ForwardCache& cache, const ModelParams& params,
                   const NormalizedAdjacency& adj, const DenseMatrix& x,
                   double alpha) {
  const std::size_t n = cache.emb.rows();
  const std::size_t d = cache.emb.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  Gradients grads;
  grads.theta = DenseMatrix(params.theta.rows(), params.theta.cols());
  grads.bilinear_w = DenseMatrix(d, d);

  DenseMatrix dh(n, d);
  DenseMatrix dh_fake(n, d);

  // Graph-summary discriminator: u_i = h_i^T W s with s = sigmoid(mean H).
  if (alpha > 0.0) {
    std::vector<double> gu(n), gu_fake(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = cache.p_global_real[i];
      gu[i] = in_clamp_range(p) ? -alpha * inv_n * (1.0 - p) : 0.0;
      const double pf = cache.p_global_fake[i];
      gu_fake[i] = in_clamp_range(pf) ? alpha * inv_n * pf : 0.0;
    }
    const auto t = w_times_s(params.bilinear_w, cache.summary);
    // dW = (sum_i gu_i h_i + sum_i gu~_i h~_i) s^T
    std::vector<double> a1(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* hrow = cache.emb.data() + i * d;
      const double g = gu[i];
      if (g != 0.0)
        for (std::size_t f = 0; f < d; ++f) a1[f] += g * hrow[f];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double* hrow = cache.emb_fake.data() + i * d;
      const double g = gu_fake[i];
      if (g != 0.0)
        for (std::size_t f = 0; f < d; ++f) a1[f] += g * hrow[f];
    }
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = 0; q < d; ++q) {
        grads.bilinear_w(p, q) = a1[p] * cache.summary(0, q);
      }
    }
    // Direct h paths.
    for (std::size_t i = 0; i < n; ++i) {
      if (gu[i] != 0.0) {
        double* row = dh.data() + i * d;
        for (std::size_t f = 0; f < d; ++f) row[f] += gu[i] * t[f];
      }
      if (gu_fake[i] != 0.0) {
        double* row = dh_fake.data() + i * d;
        for (std::size_t f = 0; f < d; ++f) row[f] += gu_fake[i] * t[f];
      }
    }
    // Summary path: ds = W^T a1, then through sigmoid and the row mean.
    DenseMatrix dmean(1, d);
    for (std::size_t q = 0; q < d; ++q) {
      double acc = 0.0;
      for (std::size_t p = 0; p < d; ++p)
        acc += params.bilinear_w(p, q) * a1[p];
      const double s = cache.summary(0, q);
      dmean(0, q) = acc * s * (1.0 - s) * inv_n;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double* row = dh.data() + i * d;
      for (std::size_t f = 0; f < d; ++f) row[f] += dmean(0, f);
    }
  }

  // Cluster discriminator: v_i = h_i^T z_i.
  if (cache.has_cluster && alpha < 1.0) {
    const double w = (1.0 - alpha) * inv_n;
    std::vector<double> gv(n), gv_fake(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = cache.p_cluster_real[i];
      gv[i] = in_clamp_range(p) ? -w * (1.0 - p) : 0.0;
      const double pf = cache.p_cluster_fake[i];
      gv_fake[i] = in_clamp_range(pf) ? w * pf : 0.0;
    }
    DenseMatrix dz(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      const double* zrow = cache.cluster_summaries.data() + i * d;
      const double* hrow = cache.emb.data() + i * d;
      const double* hfrow = cache.emb_fake.data() + i * d;
      double* dhrow = dh.data() + i * d;
      double* dhfrow = dh_fake.data() + i * d;
      double* dzrow = dz.data() + i * d;
      for (std::size_t f = 0; f < d; ++f) {
        dhrow[f] += gv[i] * zrow[f];
        dhfrow[f] += gv_fake[i] * zrow[f];
        dzrow[f] = gv[i] * hrow[f] + gv_fake[i] * hfrow[f];
      }
    }
    const DenseMatrix dh_cluster =
        clustering_backward(cache.emb, cache.cluster, dz);
    for (std::size_t i = 0; i < dh.size(); ++i)
      dh.data()[i] += dh_cluster.data()[i];
  }

  // Through the activation and the propagation back to Theta. The fake
  // branch reaches Theta through the permuted features: X~^T M~ equals
  // X^T scatter(M~), so one transposed product covers both passes.
  const auto real_grad =
      kernels::prelu_backward(cache.pre_act, params.prelu_slope, dh);
  const auto fake_grad =
      kernels::prelu_backward(cache.pre_act_fake, params.prelu_slope, dh_fake);
  grads.prelu_slope = real_grad.dslope + fake_grad.dslope;

  DenseMatrix combined = kernels::spmm(adj.matrix, real_grad.dx);
  const DenseMatrix fake_prop = kernels::spmm(adj.matrix, fake_grad.dx);
  for (std::size_t i = 0; i < n; ++i) {
    double* dst = combined.data() + static_cast<std::size_t>(cache.perm[i]) * d;
    const double* src = fake_prop.data() + i * d;
    for (std::size_t f = 0; f < d; ++f) dst[f] += src[f];
  }
  grads.theta = kernels::matmul(x, combined, /*transpose_a=*/true);

  if (!grads.theta.all_finite() || !grads.bilinear_w.all_finite() ||
      !std::isfinite(grads.prelu_slope))
    throw_numeric("backward: non-finite gradient");
  return grads;
}

void save_checkpoint(const std::filesystem::path& dir,
                     const ModelParams& params, const CheckpointMeta& meta) {
  std::filesystem::create_directories(dir);
  json j = {{"format", "gic-checkpoint-v1"},
            {"num_features", params.num_features()},
            {"embed_dim", params.embed_dim()},
            {"alpha", meta.alpha},
            {"beta", meta.beta},
            {"num_clusters", meta.num_clusters},
            {"seed", meta.seed},
            {"assign_sign", meta.sign == AssignSign::plus ? "plus" : "minus"},
            {"files",
             {{"theta", "theta.csv"},
              {"bilinear_w", "bilinear_w.csv"},
              {"prelu_slope", "prelu_slope.csv"}}}};
  std::ofstream out(dir / "checkpoint.json");
  if (!out) throw_data("cannot write checkpoint: " + dir.string());
  out << j.dump(2) << '\n';
  write_csv((dir / "theta.csv").string(), params.theta);
  write_csv((dir / "bilinear_w.csv").string(), params.bilinear_w);
  DenseMatrix slope(1, 1);
  slope(0, 0) = params.prelu_slope;
  write_csv((dir / "prelu_slope.csv").string(), slope);
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const auto envelope = dir / "checkpoint.json";
  std::ifstream in(envelope);
  if (!in) throw_data("missing checkpoint: " + envelope.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw_data(envelope.string() + ": " + e.what());
  }
  if (j.value("format", "") != "gic-checkpoint-v1")
    throw_data(envelope.string() + ": unknown checkpoint format");
  Checkpoint ckpt;
  ckpt.meta.alpha = j.at("alpha").get<double>();
  ckpt.meta.beta = j.at("beta").get<double>();
  ckpt.meta.num_clusters = j.at("num_clusters").get<std::size_t>();
  ckpt.meta.seed = j.at("seed").get<std::uint64_t>();
  ckpt.meta.sign = j.at("assign_sign").get<std::string>() == "minus"
                       ? AssignSign::minus
                       : AssignSign::plus;
  const auto& files = j.at("files");
  ckpt.params.theta =
      read_csv((dir / files.at("theta").get<std::string>()).string());
  ckpt.params.bilinear_w =
      read_csv((dir / files.at("bilinear_w").get<std::string>()).string());
  const DenseMatrix slope =
      read_csv((dir / files.at("prelu_slope").get<std::string>()).string());
  if (slope.rows() != 1 || slope.cols() != 1)
    throw_data(dir.string() + ": malformed prelu_slope.csv");
  ckpt.params.prelu_slope = slope(0, 0);
  const auto f = j.at("num_features").get<std::size_t>();
  const auto fp = j.at("embed_dim").get<std::size_t>();
  if (ckpt.params.theta.rows() != f || ckpt.params.theta.cols() != fp ||
      ckpt.params.bilinear_w.rows() != fp ||
      ckpt.params.bilinear_w.cols() != fp)
    throw_data(dir.string() + ": checkpoint matrices disagree with envelope");
  return ckpt;
}

}  // namespace gic
