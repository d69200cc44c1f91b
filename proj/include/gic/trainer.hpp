#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gic/graph.hpp"
#include "gic/model.hpp"

namespace gic {

// One training run's full recipe. Defaults follow the published schedule:
// lr 0.001, at most 2000 epochs, patience 50, 10 cluster iterations.
struct TrainConfig {
  double alpha = 0.5;
  double beta = 100.0;
  std::size_t num_clusters = 32;
  std::size_t embed_dim = 64;
  double learning_rate = 0.001;
  std::size_t max_epochs = 2000;
  std::size_t patience = 50;
  std::uint64_t seed = 1;
  AssignSign assign_sign = AssignSign::plus;
  std::size_t cluster_iterations = 10;

  void validate() const;
  GicConfig gic_config() const {
    return {alpha, beta, num_clusters, assign_sign, cluster_iterations};
  }
};

struct AdamState {
  DenseMatrix m_theta, v_theta;
  DenseMatrix m_w, v_w;
  double m_slope = 0.0, v_slope = 0.0;
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState like(const ModelParams& p) {
    AdamState s;
    s.m_theta = DenseMatrix(p.theta.rows(), p.theta.cols());
    s.v_theta = DenseMatrix(p.theta.rows(), p.theta.cols());
    s.m_w = DenseMatrix(p.bilinear_w.rows(), p.bilinear_w.cols());
    s.v_w = DenseMatrix(p.bilinear_w.rows(), p.bilinear_w.cols());
    return s;
  }
};

// Standard Adam with bias correction. Aborts on non-finite gradients.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               double lr);

// Strict-improvement early stopping: stop after `patience` consecutive
// epochs without a new best loss.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  // Returns true when training should halt after recording this loss.
  bool observe(double loss) {
    if (loss < best_loss_) {
      best_loss_ = loss;
      best_epoch_ = epoch_;
      since_ = 0;
    } else {
      ++since_;
    }
    ++epoch_;
    return since_ >= patience_;
  }

  bool improved_last() const { return since_ == 0; }
  double best_loss() const { return best_loss_; }
  std::size_t best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t since_ = 0;
  std::size_t best_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

struct TrainResult {
  ModelParams params;  // snapshot with the lowest training loss
  std::vector<double> loss_history;
  std::size_t best_epoch = 0;  // index into loss_history
};

TrainResult train(const AttributedGraph& g, const TrainConfig& config);

// The published selection grid.
struct SelectionGrid {
  std::vector<double> alpha{0.25, 0.5, 0.75};
  std::vector<double> beta{10.0, 100.0};
  std::vector<std::size_t> num_clusters{32, 128};
};

enum class Task { classify, link, cluster };

const char* task_name(Task t);
Task task_from_name(const std::string& name);

// Embedding dimension used in the published protocol for each task.
std::size_t default_embed_dim(Task t);

struct SelectionEntry {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t num_clusters = 0;
  double val_metric = 0.0;
};

struct SelectionOutcome {
  TrainConfig config;   // base config with the winning triplet applied
  TrainResult result;   // the winning run (trained on the selection graph)
  std::vector<SelectionEntry> entries;  // one per triplet, grid order
};

// Trains one model per triplet and keeps the argmax of the task's
// validation metric (accuracy / AUC / clustering accuracy); ties go to the
// earlier triplet in grid order (alpha, then beta, then K).
SelectionOutcome select_model(const AttributedGraph& g, Task task,
                              const SelectionGrid& grid,
                              const TrainConfig& base, SplitMode mode);

}  // namespace gic
