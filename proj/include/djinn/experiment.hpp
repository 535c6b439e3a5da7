#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "djinn/bayesopt.hpp"
#include "djinn/ensemble.hpp"
#include "djinn/metrics.hpp"

namespace djinn {

/// Everything a run needs, checked up front so nothing trains on bad input.
struct RunConfig {
  std::filesystem::path data;
  std::vector<std::string> targets;
  Task task = Task::regression;
  int n_trees = 10;
  int max_depth = 5;
  int epochs = 100;
  double learning_rate = 0.001;
  int batch_size = 32;
  std::uint64_t seed = 0;
  InitScheme scheme = InitScheme::djinn;
  int permutations = 5;
  double test_fraction = 0.2;
  int jobs = 1;
  bool scale_targets = true;

  /// Throws on any out-of-range field or unreadable data path.
  void validate() const;
};

/// Fills dataset, task and Table I hyper-parameters from a named preset.
RunConfig preset_config(const std::string &preset, const std::filesystem::path &data_dir);

Dataset load_dataset(const RunConfig &config);

/// The ensemble settings for one permutation of a cross-validated run.
EnsembleConfig ensemble_config(const RunConfig &config, std::size_t permutation);

/// Test-fold predictions: regression targets or class indices.
Matrix ensemble_output(const DjinnEnsemble &ensemble, const Matrix &features);

struct SchemeRun {
  EvalReport report;
  /// Mean member training cost per epoch, one curve per permutation.
  std::vector<std::vector<double>> cost_curves;
};

/// Cross-validates one initialization scheme over every permutation of the plan.
SchemeRun run_scheme(const Dataset &data, const SplitPlan &plan, const RunConfig &config,
                     InitScheme scheme);

/// Averages per-permutation curves epoch by epoch.
std::vector<double> average_curves(const std::vector<std::vector<double>> &curves);

/// "epoch,cost" plus one column per permutation.
std::string cost_curves_csv(const std::vector<std::vector<double>> &curves);

struct BayesoptRun {
  EvalReport djinn;
  EvalReport searched;
  /// Search history of each permutation.
  std::vector<SearchResult> searches;
  int networks_trained = 0;
  /// Wall-clock seconds spent in searches and in DJINN builds.
  double search_seconds = 0.0;
  double djinn_seconds = 0.0;
};

/// Per permutation: builds the DJINN ensemble, searches dense widths over
/// [2, 2 * widest DJINN layer] and scores both on the same test fold.
BayesoptRun run_bayesopt(const Dataset &data, const SplitPlan &plan, const RunConfig &config,
                         int budget);

}  // namespace djinn
