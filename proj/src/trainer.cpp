#include "gic/trainer.hpp"

#include <cmath>
#include <limits>

#include "gic/error.hpp"
#include "gic/eval.hpp"
#include "gic/kernels.hpp"

namespace gic {
namespace {

void adam_update_buffer(double* param, const double* grad, double* m,
                        double* v, std::size_t n, double lr, double corr1,
                        double corr2, const AdamState& s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
    param[i] -= lr * (m[i] / corr1) / (std::sqrt(v[i] / corr2) + s.epsilon);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (alpha < 0.0 || alpha > 1.0)
    throw_config("config: alpha must lie in [0, 1]");
  if (beta <= 0.0) throw_config("config: beta must be positive");
  if (num_clusters == 0) throw_config("config: num_clusters must be >= 1");
  if (embed_dim == 0) throw_config("config: embed_dim must be >= 1");
  if (learning_rate <= 0.0)
    throw_config("config: learning_rate must be positive");
  if (max_epochs == 0) throw_config("config: max_epochs must be >= 1");
  if (patience == 0) throw_config("config: patience must be >= 1");
  if (cluster_iterations == 0)
    throw_config("config: cluster_iterations must be >= 1");
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               double lr) {
  if (!grads.theta.all_finite() || !grads.bilinear_w.all_finite() ||
      !std::isfinite(grads.prelu_slope))
    throw_numeric("adam_step: non-finite gradient at step " +
                  std::to_string(state.step + 1));
  ++state.step;
  const double corr1 =
      1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double corr2 =
      1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  adam_update_buffer(params.theta.data(), grads.theta.data(),
                     state.m_theta.data(), state.v_theta.data(),
                     params.theta.size(), lr, corr1, corr2, state);
  adam_update_buffer(params.bilinear_w.data(), grads.bilinear_w.data(),
                     state.m_w.data(), state.v_w.data(),
                     params.bilinear_w.size(), lr, corr1, corr2, state);
  adam_update_buffer(&params.prelu_slope, &grads.prelu_slope, &state.m_slope,
                     &state.v_slope, 1, lr, corr1, corr2, state);
}

TrainResult train(const AttributedGraph& g, const TrainConfig& config) {
  config.validate();
  if (g.num_nodes == 0) throw_data("train: empty graph");
  if (config.alpha != 1.0 && config.num_clusters > g.num_nodes)
    throw_config("train: num_clusters exceeds node count");

  const NormalizedAdjacency adj = normalize_adjacency(g);
  const DenseMatrix& x = g.features;

  const Rng master(config.seed);
  Rng init_rng = master.substream(stream::param_init);
  Rng corrupt_rng = master.substream(stream::corruption);
  Rng cluster_rng = master.substream(stream::cluster_init);

  ModelParams params =
      ModelParams::glorot(g.num_features(), config.embed_dim, init_rng);
  AdamState adam = AdamState::like(params);
  const GicConfig gic = config.gic_config();

  TrainResult result;
  result.params = params;
  EarlyStopper stopper(config.patience);

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    auto perm = corruption_permutation(g.num_nodes, corrupt_rng);
    ForwardCache cache;
    double loss = 0.0;
    try {
      cache = forward(params, adj, x, std::move(perm), gic, cluster_rng);
      loss = loss_total(cache, config.alpha);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::numeric)
        throw_numeric("train: epoch " + std::to_string(epoch) + ": " +
                      e.what());
      throw;
    }
    result.loss_history.push_back(loss);
    const bool stop = stopper.observe(loss);
    if (stopper.improved_last()) {
      result.params = params;
      result.best_epoch = epoch;
    }
    if (stop) break;
    const Gradients grads = backward(cache, params, adj, x, config.alpha);
    adam_step(params, grads, adam, config.learning_rate);
  }
  return result;
}

const char* task_name(Task t) {
  switch (t) {
    case Task::classify: return "classify";
    case Task::link: return "link";
    case Task::cluster: return "cluster";
  }
  return "unknown";
}

Task task_from_name(const std::string& name) {
  if (name == "classify") return Task::classify;
  if (name == "link") return Task::link;
  if (name == "cluster") return Task::cluster;
  throw_config("unknown task: " + name +
               " (expected classify | link | cluster)");
}

std::size_t default_embed_dim(Task t) {
  switch (t) {
    case Task::classify: return 64;
    case Task::link: return 16;
    case Task::cluster: return 32;
  }
  return 64;
}

SelectionOutcome select_model(const AttributedGraph& g, Task task,
                              const SelectionGrid& grid,
                              const TrainConfig& base, SplitMode mode) {
  if (grid.alpha.empty() || grid.beta.empty() || grid.num_clusters.empty())
    throw_config("select_model: empty grid");
  const Rng master(base.seed);
  Rng split_rng = master.substream(stream::splits);

  // One validation context shared by every triplet.
  ClassificationSplit cls_split;
  LinkSplit link_split;
  const AttributedGraph* train_graph = &g;
  if (task == Task::classify) {
    cls_split = sample_classification_split(g, mode, split_rng);
  } else if (task == Task::link) {
    link_split = make_link_split(g, split_rng);
    train_graph = &link_split.train_graph;
  } else {
    if (!g.labeled()) throw_data("select_model: clustering needs labels");
  }

  SelectionOutcome outcome;
  const NormalizedAdjacency adj = normalize_adjacency(*train_graph);
  double best_metric = -std::numeric_limits<double>::infinity();
  for (double alpha : grid.alpha) {
    for (double beta : grid.beta) {
      for (std::size_t k : grid.num_clusters) {
        TrainConfig cfg = base;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.num_clusters = k;
        TrainResult run = train(*train_graph, cfg);

        const DenseMatrix h = kernels::row_l2_normalize(
            encode(run.params, adj, train_graph->features));
        Rng eval_rng = master.substream(stream::eval);
        double metric = 0.0;
        if (task == Task::classify) {
          metric = classify_nodes(h, cls_split.train, cls_split.val, g.labels,
                                  g.num_classes, eval_rng);
        } else if (task == Task::link) {
          const auto pos = link_scores(h, link_split.val_pos);
          const auto neg = link_scores(h, link_split.val_neg);
          metric = auc(pos, neg);
        } else {
          const auto pred = kmeans_cluster(h, g.num_classes, eval_rng);
          metric = clustering_metrics(pred, g.labels).acc;
        }
        outcome.entries.push_back({alpha, beta, k, metric});
        if (metric > best_metric) {  // strict: ties keep grid order
          best_metric = metric;
          outcome.config = cfg;
          outcome.result = std::move(run);
        }
      }
    }
  }
  return outcome;
}

}  // namespace gic
