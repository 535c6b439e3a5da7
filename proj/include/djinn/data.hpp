#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace djinn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Task { regression, classification };

std::string to_string(Task task);
Task task_from_string(const std::string &name);

/// Tabular data set. Rows are samples.
///
/// For classification `targets` holds a single column of class indices stored
/// as doubles in [0, n_classes).
struct Dataset {
  Matrix features;
  Matrix targets;
  Task task = Task::regression;
  int n_classes = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_labels;

  Eigen::Index n_samples() const { return features.rows(); }
  Eigen::Index n_features() const { return features.cols(); }
  Eigen::Index n_targets() const { return targets.cols(); }
  /// Number of output neurons a network for this data needs.
  int n_outputs() const;

  Dataset subset(const std::vector<std::size_t> &rows) const;
  std::vector<int> class_indices() const;
};

Dataset load_csv(const std::filesystem::path &path,
                 const std::vector<std::string> &target_columns, Task task);

/// Per-column min/max of the training rows.
struct ScalingParams {
  Vector min;
  Vector max;
};

ScalingParams fit_scaler(const Matrix &train);
/// (x - min) / (max - min); constant columns map to 0. No clipping.
Matrix apply_scaler(const Matrix &x, const ScalingParams &params);
Matrix invert_scaler(const Matrix &scaled, const ScalingParams &params);

struct SplitPlan {
  struct Permutation {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
  };
  std::vector<Permutation> permutations;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
};

/// Independent seeded shuffles; permutation i uses seed + i.
SplitPlan make_splits(std::size_t n_samples, int n_permutations,
                      double test_fraction, std::uint64_t seed);

void to_json(nlohmann::json &j, const ScalingParams &p);
void from_json(const nlohmann::json &j, ScalingParams &p);
void to_json(nlohmann::json &j, const SplitPlan &plan);
void from_json(const nlohmann::json &j, SplitPlan &plan);

}  // namespace djinn
