#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "djinn/ensemble.hpp"

namespace djinn {

/// Hidden-layer width bounds; the layer count is fixed.
struct SearchSpace {
  std::vector<int> lower;
  std::vector<int> upper;

  std::size_t n_layers() const { return lower.size(); }
  /// Number of distinct width vectors (as a double to avoid overflow).
  double cardinality() const;
  bool contains(const std::vector<int> &widths) const;
  void validate() const;
};

struct Trial {
  int iteration = 0;
  std::vector<int> widths;
  double objective = 0.0;
  std::uint64_t seed = 0;
  bool proposed_by_surrogate = false;
};

struct SearchResult {
  Trial best;
  std::vector<Trial> trials;
  int surrogate_failures = 0;
};

/// Gaussian process with a squared-exponential kernel on inputs in [0,1]^d.
/// Targets are standardized internally; length scale and noise are picked by
/// maximizing the log marginal likelihood over a fixed grid.
class GaussianProcess {
 public:
  /// Returns false when no grid point gives a positive-definite kernel.
  bool fit(const Matrix &x, const Vector &y);
  /// Posterior mean and variance in the original target units.
  std::pair<double, double> predict(const Vector &x) const;
  double length_scale() const { return length_scale_; }
  double noise() const { return noise_; }

 private:
  double kernel(const Vector &a, const Vector &b) const;

  Matrix x_;
  Vector alpha_;
  Eigen::LLT<Matrix> llt_;
  double length_scale_ = 0.2;
  double noise_ = 1e-6;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
};

/// Expected improvement below `best` for a Gaussian posterior.
double expected_improvement(double mean, double variance, double best);

using Objective = std::function<double(const std::vector<int> &widths, std::uint64_t seed)>;

struct OptimizerConfig {
  int budget = 100;
  int initial_design = 10;
  int candidates = 1000;
  std::uint64_t seed = 0;
};

/// Minimizes `objective` over the search space with exactly `budget`
/// evaluations: a quasi-random initial design followed by GP/EI proposals.
SearchResult optimize(const Objective &objective, const SearchSpace &space,
                      const OptimizerConfig &config);

struct ArchitectureSearch {
  SearchResult result;
  /// Single-member ensemble holding the best trained network.
  DjinnEnsemble model;
  int networks_trained = 0;
};

/// Searches hidden widths for dense Xavier-initialized networks. Each
/// candidate trains on 80% of `train` and is scored by its loss on the rest.
ArchitectureSearch search_architecture(const Dataset &train, const SearchSpace &space,
                                       const TrainingConfig &training,
                                       const OptimizerConfig &config,
                                       bool scale_targets = true);

/// Width bounds [2, 2 * widest hidden layer] for `n_layers` layers.
SearchSpace default_search_space(const std::vector<std::vector<int>> &djinn_architectures);

std::string trials_csv(const std::vector<Trial> &trials);

}  // namespace djinn
