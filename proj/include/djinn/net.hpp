#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "djinn/data.hpp"

namespace djinn {

/// Dense feed-forward network. `weights[l]` maps layer l to layer l + 1 and
/// has shape width(l + 1) x width(l); hidden layers use ReLU, the last layer
/// is affine (regression outputs or classification logits).
struct Network {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Task task = Task::regression;

  int n_inputs() const { return static_cast<int>(weights.front().cols()); }
  int n_outputs() const { return static_cast<int>(weights.back().rows()); }
  std::size_t n_layers() const { return weights.size(); }
  /// Input, hidden and output widths.
  std::vector<int> widths() const;
  std::vector<int> hidden_widths() const;
  /// Throws if the shape chain is broken or any parameter is non-finite.
  void validate() const;
};

enum class Loss { mse, softmax_xent };

Loss default_loss(Task task);

struct TrainingConfig {
  int epochs = 100;
  double learning_rate = 0.006;
  int batch_size = 32;
  Loss loss = Loss::mse;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t shuffle_seed = 0;

  void validate(Eigen::Index n_train) const;
};

struct CostHistory {
  std::vector<double> train;  ///< mean batch cost per epoch
  std::vector<double> test;   ///< end-of-epoch cost on the monitor set, if any
};

struct Gradients {
  double cost = 0.0;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Rows of `features` are samples; returns outputs or logits, one row per sample.
Matrix forward(const Network &net, const Matrix &features);

/// Mean cost over the batch and its gradient. For `softmax_xent` the targets
/// are a single column of class indices.
Gradients loss_and_gradient(const Network &net, const Matrix &features,
                            const Matrix &targets, Loss loss);

double loss_value(const Network &net, const Matrix &features,
                  const Matrix &targets, Loss loss);

/// Adam optimizer state for one network.
class Adam {
 public:
  Adam(const Network &net, double learning_rate, double beta1, double beta2,
       double epsilon);
  void step(Network &net, const Gradients &grad);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Matrix> mw_, vw_;
  std::vector<Vector> mb_, vb_;
};

struct Monitor {
  const Matrix *features = nullptr;
  const Matrix *targets = nullptr;
};

struct TrainResult {
  Network net;
  CostHistory history;
};

/// Mini-batch Adam. Rows are reshuffled every epoch; the last short batch is kept.
TrainResult train(Network net, const Matrix &features, const Matrix &targets,
                  const TrainingConfig &config, std::optional<Monitor> monitor = {});

/// Regression outputs, or row-wise softmax probabilities for classification.
Matrix predict(const Network &net, const Matrix &features);

Matrix softmax_rows(const Matrix &logits);

nlohmann::json network_to_json(const Network &net);
Network network_from_json(const nlohmann::json &j);

std::string cost_history_csv(const CostHistory &history);

}  // namespace djinn
