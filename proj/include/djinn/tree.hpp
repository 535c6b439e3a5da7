#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "djinn/data.hpp"

namespace djinn {

struct TreeNode {
  enum class Kind { branch, leaf };
  Kind kind = Kind::leaf;
  int level = 0;
  // branch
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  // leaf: mean target vector (regression) or class frequencies (classification)
  std::vector<double> value;
  int label = -1;

  bool is_branch() const { return kind == Kind::branch; }
};

/// Binary CART tree stored as a flat node array in depth-first, left-first
/// order; node 0 is the root.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, int max_depth, int n_features,
               Task task, int n_outputs);

  const std::vector<TreeNode> &nodes() const { return nodes_; }
  const TreeNode &node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const TreeNode &root() const { return nodes_.front(); }
  int max_depth() const { return max_depth_; }
  int n_features() const { return n_features_; }
  /// Width of the leaf payload: target count or class count.
  int n_outputs() const { return n_outputs_; }
  Task task() const { return task_; }
  int branch_count() const;

 private:
  void validate() const;

  std::vector<TreeNode> nodes_;
  int max_depth_ = 0;
  int n_features_ = 0;
  Task task_ = Task::regression;
  int n_outputs_ = 1;
};

enum class FeatureSubsample {
  all,       ///< every feature at every split
  sqrt,      ///< ceil(sqrt(n_features)) features per split
  automatic  ///< all for regression, sqrt for classification
};

struct TreeConfig {
  int max_depth = 5;
  int min_leaf = 1;
  FeatureSubsample subsample = FeatureSubsample::automatic;
  bool bootstrap = true;
};

/// Greedy CART. `n_classes` is inferred from the targets when zero.
DecisionTree fit_tree(const Matrix &features, const Matrix &targets, Task task,
                      const TreeConfig &config, std::uint64_t seed,
                      int n_classes = 0);

struct Forest {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> seeds;
};

/// Tree i is fit on a bootstrap resample drawn with seed `seed + i`.
Forest fit_forest(const Matrix &features, const Matrix &targets, Task task,
                  int n_trees, const TreeConfig &config, std::uint64_t seed,
                  int n_classes = 0);

/// Leaf payload per row (rows x n_outputs). Rows go left when x <= threshold.
Matrix predict_tree(const DecisionTree &tree, const Matrix &features);
std::vector<int> predict_tree_classes(const DecisionTree &tree,
                                      const Matrix &features);

struct TreeTopology {
  int depth = 0;         ///< D_t: deepest branch level + 1
  int branch_depth = 0;  ///< D_b = D_t - 1
  std::vector<int> branches_per_level;          ///< N_b(l), l = 0 .. D_t
  std::vector<std::optional<int>> max_level;    ///< L_max per input; empty if never split

  int total_branches() const;
};

TreeTopology analyze_topology(const DecisionTree &tree);

nlohmann::json tree_to_json(const DecisionTree &tree);
DecisionTree tree_from_json(const nlohmann::json &j);
std::string tree_to_dot(const DecisionTree &tree,
                        const std::vector<std::string> &feature_names = {});

}  // namespace djinn
