#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "djinn/baselines.hpp"
#include "djinn/mapping.hpp"
#include "djinn/metrics.hpp"
#include "djinn/net.hpp"
#include "djinn/tree.hpp"

namespace djinn {

enum class InitScheme { djinn, random_dense, random_sparse };

std::string to_string(InitScheme scheme);
InitScheme scheme_from_string(const std::string &name);

/// Derives an independent seed for a numbered stream of a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct EnsembleConfig {
  int n_trees = 10;
  TreeConfig tree;
  TrainingConfig training;
  InitScheme scheme = InitScheme::djinn;
  std::uint64_t base_seed = 0;
  /// Min-max scale regression targets to (0, 1) for training.
  bool scale_targets = true;
  /// Members trained concurrently; 1 keeps everything on the calling thread.
  int jobs = 1;
};

struct DjinnEnsemble {
  Task task = Task::regression;
  int n_classes = 0;
  InitScheme scheme = InitScheme::djinn;
  ScalingParams scaler;
  std::optional<ScalingParams> target_scaler;
  std::vector<Network> members;
  std::vector<std::uint64_t> member_seeds;
  std::vector<CostHistory> histories;
  /// Nonzero counts of each member's initial weights.
  std::vector<InitStats> init_stats;
  /// Hidden widths of each member as initialized.
  std::vector<std::vector<int>> architectures;
};

/// Fits a forest on the training rows, maps and prunes every tree, swaps in
/// the requested initialization and trains each member.
DjinnEnsemble build_and_train(const Dataset &train, const EnsembleConfig &config,
                              std::optional<Monitor> monitor = {});

/// Mean member output (regression, unscaled units) or mean class probabilities.
/// `members` limits the average to the first k members when positive.
Matrix predict_ensemble(const DjinnEnsemble &ensemble, const Matrix &features,
                        int members = 0);

/// Argmax of the averaged probabilities, as a single column.
Matrix ensemble_labels(const DjinnEnsemble &ensemble, const Matrix &features,
                       int members = 0);

/// Mean training cost per epoch across members.
std::vector<double> mean_cost_curve(const DjinnEnsemble &ensemble);

struct SweepRow {
  int n_trees = 0;
  MetricSummary normalized_mse;  ///< per-permutation MSE(n) / MSE(1)
};

/// Trains max(counts) members once per permutation and scores each prefix.
std::vector<SweepRow> sweep_tree_count(const Dataset &data, const std::vector<int> &counts,
                                       const EnsembleConfig &config, const SplitPlan &plan);

std::string sweep_csv(const std::vector<SweepRow> &rows);

nlohmann::json ensemble_to_json(const DjinnEnsemble &ensemble);
DjinnEnsemble ensemble_from_json(const nlohmann::json &j);

}  // namespace djinn
