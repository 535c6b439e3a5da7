#include "djinn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "djinn/error.hpp"

namespace djinn {

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, int max_depth,
                           int n_features, Task task, int n_outputs)
    : nodes_(std::move(nodes)),
      max_depth_(max_depth),
      n_features_(n_features),
      task_(task),
      n_outputs_(n_outputs) {
  validate();
}

void DecisionTree::validate() const {
  if (nodes_.empty()) throw Error("tree has no nodes");
  if (nodes_.front().level != 0) throw Error("tree root must be at level 0");
  const int n = static_cast<int>(nodes_.size());
  std::vector<int> parents(nodes_.size(), 0);
  for (const auto &node : nodes_) {
    if (!node.is_branch()) continue;
    if (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n)
      throw Error("branch child index out of range");
    if (node.feature < 0 || node.feature >= n_features_)
      throw Error("branch feature index out of range");
    if (node.level >= max_depth_)
      throw Error("branch found at or below the maximum depth");
    for (int c : {node.left, node.right}) {
      if (nodes_[static_cast<std::size_t>(c)].level != node.level + 1)
        throw Error("child level must be parent level + 1");
      ++parents[static_cast<std::size_t>(c)];
    }
  }
  for (std::size_t i = 1; i < parents.size(); ++i)
    if (parents[i] != 1) throw Error("every non-root node needs exactly one parent");
}

int DecisionTree::branch_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const TreeNode &n) { return n.is_branch(); }));
}

int TreeTopology::total_branches() const {
  return std::accumulate(branches_per_level.begin(), branches_per_level.end(), 0);
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
  std::size_t n_left = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix &x, const Matrix &y, Task task, int n_classes,
              const TreeConfig &config, std::uint64_t seed)
      : x_(x), y_(y), task_(task), n_classes_(n_classes), config_(config), rng_(seed) {
    const auto p = static_cast<int>(x.cols());
    FeatureSubsample rule = config.subsample;
    if (rule == FeatureSubsample::automatic)
      rule = task == Task::classification ? FeatureSubsample::sqrt : FeatureSubsample::all;
    features_per_split_ =
        rule == FeatureSubsample::sqrt
            ? std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p)))))
            : p;
  }

  int build(std::vector<std::size_t> rows, int level) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_.back().level = level;

    std::optional<Split> split;
    if (level < config_.max_depth &&
        rows.size() >= 2 * static_cast<std::size_t>(config_.min_leaf) && !pure(rows))
      split = best_split(rows);
    if (!split) {
      make_leaf(nodes_[static_cast<std::size_t>(id)], rows);
      return id;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows)
      (x_(static_cast<Eigen::Index>(r), split->feature) <= split->threshold ? left : right)
          .push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(std::move(left), level + 1);
    const int r = build(std::move(right), level + 1);
    auto &node = nodes_[static_cast<std::size_t>(id)];
    node.kind = TreeNode::Kind::branch;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  bool pure(const std::vector<std::size_t> &rows) const {
    const auto first = static_cast<Eigen::Index>(rows.front());
    for (auto r : rows)
      if (y_.row(static_cast<Eigen::Index>(r)) != y_.row(first)) return false;
    return true;
  }

  void make_leaf(TreeNode &node, const std::vector<std::size_t> &rows) const {
    node.kind = TreeNode::Kind::leaf;
    const double n = static_cast<double>(rows.size());
    if (task_ == Task::classification) {
      node.value.assign(static_cast<std::size_t>(n_classes_), 0.0);
      for (auto r : rows)
        node.value[static_cast<std::size_t>(y_(static_cast<Eigen::Index>(r), 0))] += 1.0;
      node.label = static_cast<int>(
          std::max_element(node.value.begin(), node.value.end()) - node.value.begin());
      for (auto &v : node.value) v /= n;
    } else {
      node.value.assign(static_cast<std::size_t>(y_.cols()), 0.0);
      for (auto r : rows)
        for (Eigen::Index k = 0; k < y_.cols(); ++k)
          node.value[static_cast<std::size_t>(k)] += y_(static_cast<Eigen::Index>(r), k);
      for (auto &v : node.value) v /= n;
    }
  }

  std::vector<int> candidate_features(const std::vector<std::size_t> &rows) {
    const auto p = static_cast<int>(x_.cols());
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    if (features_per_split_ < p) std::shuffle(order.begin(), order.end(), rng_);
    // Draw until enough non-constant features are found, then visit them in
    // index order so ties resolve to the lowest feature.
    std::vector<int> chosen;
    for (int f : order) {
      if (static_cast<int>(chosen.size()) == features_per_split_) break;
      const double v0 = x_(static_cast<Eigen::Index>(rows.front()), f);
      const bool varies = std::any_of(rows.begin(), rows.end(), [&](std::size_t r) {
        return x_(static_cast<Eigen::Index>(r), f) != v0;
      });
      if (varies) chosen.push_back(f);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  std::optional<Split> best_split(const std::vector<std::size_t> &rows) {
    const std::size_t n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(config_.min_leaf);
    const bool cls = task_ == Task::classification;
    const auto width = static_cast<std::size_t>(cls ? n_classes_ : y_.cols());

    std::optional<Split> best;
    double tolerance = 0.0;
    std::vector<std::size_t> sorted = rows;
    std::vector<double> left_sum(width), right_sum(width), left_sq(width), right_sq(width);
    std::vector<double> total_sum(width, 0.0), total_sq(width, 0.0);
    for (auto r : rows) {
      for (std::size_t k = 0; k < width; ++k) {
        const double v = target(r, k);
        total_sum[k] += v;
        total_sq[k] += v * v;
      }
    }
    const double node_impurity = impurity(total_sum, total_sq, static_cast<double>(n));
    tolerance = 1e-12 * std::max(1.0, std::abs(node_impurity));

    for (int f : candidate_features(rows)) {
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return x_(static_cast<Eigen::Index>(a), f) < x_(static_cast<Eigen::Index>(b), f);
      });
      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      std::fill(left_sq.begin(), left_sq.end(), 0.0);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t k = 0; k < width; ++k) {
          const double v = target(sorted[i], k);
          left_sum[k] += v;
          left_sq[k] += v * v;
        }
        const double xi = x_(static_cast<Eigen::Index>(sorted[i]), f);
        const double xn = x_(static_cast<Eigen::Index>(sorted[i + 1]), f);
        if (!(xi < xn)) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        for (std::size_t k = 0; k < width; ++k) {
          right_sum[k] = total_sum[k] - left_sum[k];
          right_sq[k] = total_sq[k] - left_sq[k];
        }
        const double imp = impurity(left_sum, left_sq, static_cast<double>(nl)) +
                           impurity(right_sum, right_sq, static_cast<double>(nr));
        if (!best || imp < best->impurity - tolerance) {
          double mid = 0.5 * (xi + xn);
          if (!(mid < xn)) mid = xi;
          best = Split{f, mid, imp, nl};
        }
      }
    }
    return best;
  }

  double target(std::size_t row, std::size_t k) const {
    const auto r = static_cast<Eigen::Index>(row);
    if (task_ == Task::classification)
      return static_cast<std::size_t>(y_(r, 0)) == k ? 1.0 : 0.0;
    return y_(r, static_cast<Eigen::Index>(k));
  }

  // Weighted impurity n * I(node): summed SSE for regression, n * Gini for
  // classification.
  double impurity(const std::vector<double> &sum, const std::vector<double> &sq,
                  double n) const {
    double out = 0.0;
    if (task_ == Task::classification) {
      double s = 0.0;
      for (double c : sum) s += c * c;
      out = n - s / n;
    } else {
      for (std::size_t k = 0; k < sum.size(); ++k)
        out += std::max(0.0, sq[k] - sum[k] * sum[k] / n);
    }
    return out;
  }

  const Matrix &x_;
  const Matrix &y_;
  Task task_;
  int n_classes_;
  TreeConfig config_;
  std::mt19937_64 rng_;
  int features_per_split_ = 1;
  std::vector<TreeNode> nodes_;
};

int infer_classes(const Matrix &targets, Task task, int n_classes) {
  if (task != Task::classification) return static_cast<int>(targets.cols());
  if (targets.cols() != 1) throw Error("classification targets need one column");
  const double top = targets.maxCoeff();
  if (targets.minCoeff() < 0.0) throw Error("negative class index");
  const int inferred = static_cast<int>(top) + 1;
  if (n_classes == 0) return inferred;
  if (inferred > n_classes) throw Error("class index exceeds class count");
  return n_classes;
}

DecisionTree fit_rows(const Matrix &features, const Matrix &targets, Task task,
                      const TreeConfig &config, std::uint64_t seed, int n_classes,
                      std::vector<std::size_t> rows) {
  TreeBuilder builder(features, targets, task, n_classes, config, seed);
  builder.build(std::move(rows), 0);
  return DecisionTree(builder.take(), config.max_depth,
                      static_cast<int>(features.cols()), task, n_classes);
}

void check_fit_args(const Matrix &features, const Matrix &targets,
                    const TreeConfig &config) {
  if (features.rows() == 0 || features.cols() == 0) throw Error("fit_tree: empty data");
  if (features.rows() != targets.rows())
    throw Error("fit_tree: feature and target row counts differ");
  if (config.max_depth < 1) throw Error("fit_tree: max_depth must be >= 1");
  if (config.min_leaf < 1) throw Error("fit_tree: min_leaf must be >= 1");
  if (features.rows() < 2 * config.min_leaf)
    throw Error("fit_tree: need at least 2 * min_leaf rows");
}

}  // namespace

DecisionTree fit_tree(const Matrix &features, const Matrix &targets, Task task,
                      const TreeConfig &config, std::uint64_t seed, int n_classes) {
  check_fit_args(features, targets, config);
  const int outputs = infer_classes(targets, task, n_classes);
  std::vector<std::size_t> rows(static_cast<std::size_t>(features.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return fit_rows(features, targets, task, config, seed, outputs, std::move(rows));
}

Forest fit_forest(const Matrix &features, const Matrix &targets, Task task,
                  int n_trees, const TreeConfig &config, std::uint64_t seed,
                  int n_classes) {
  if (n_trees < 1) throw Error("fit_forest: need at least one tree");
  check_fit_args(features, targets, config);
  const int outputs = infer_classes(targets, task, n_classes);
  const auto n = static_cast<std::size_t>(features.rows());
  Forest forest;
  for (int t = 0; t < n_trees; ++t) {
    const std::uint64_t tree_seed = seed + static_cast<std::uint64_t>(t);
    std::vector<std::size_t> rows(n);
    if (config.bootstrap) {
      std::mt19937_64 rng(tree_seed);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto &r : rows) r = pick(rng);
      // The split rng is offset so it does not replay the bootstrap draws.
      forest.trees.push_back(fit_rows(features, targets, task, config,
                                      tree_seed ^ 0x9e3779b97f4a7c15ULL, outputs,
                                      std::move(rows)));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
      forest.trees.push_back(
          fit_rows(features, targets, task, config, tree_seed, outputs, std::move(rows)));
    }
    forest.seeds.push_back(tree_seed);
  }
  return forest;
}

namespace {

int route(const DecisionTree &tree, const Matrix &features, Eigen::Index row) {
  int id = 0;
  while (tree.node(id).is_branch()) {
    const auto &n = tree.node(id);
    id = features(row, n.feature) <= n.threshold ? n.left : n.right;
  }
  return id;
}

}  // namespace

Matrix predict_tree(const DecisionTree &tree, const Matrix &features) {
  if (features.cols() != tree.n_features())
    throw Error("predict_tree: feature count mismatch");
  Matrix out(features.rows(), tree.n_outputs());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const auto &leaf = tree.node(route(tree, features, i));
    for (Eigen::Index k = 0; k < out.cols(); ++k)
      out(i, k) = leaf.value[static_cast<std::size_t>(k)];
  }
  return out;
}

std::vector<int> predict_tree_classes(const DecisionTree &tree, const Matrix &features) {
  if (tree.task() != Task::classification)
    throw Error("predict_tree_classes: tree is not a classifier");
  if (features.cols() != tree.n_features())
    throw Error("predict_tree: feature count mismatch");
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    out[static_cast<std::size_t>(i)] = tree.node(route(tree, features, i)).label;
  return out;
}

TreeTopology analyze_topology(const DecisionTree &tree) {
  int deepest = -1;
  for (const auto &n : tree.nodes())
    if (n.is_branch()) deepest = std::max(deepest, n.level);
  if (deepest < 0) throw Error("analyze_topology: tree is a single leaf");

  TreeTopology topo;
  topo.depth = deepest + 1;
  topo.branch_depth = deepest;
  topo.branches_per_level.assign(static_cast<std::size_t>(topo.depth) + 1, 0);
  topo.max_level.assign(static_cast<std::size_t>(tree.n_features()), std::nullopt);
  for (const auto &n : tree.nodes()) {
    if (!n.is_branch()) continue;
    ++topo.branches_per_level[static_cast<std::size_t>(n.level)];
    auto &lmax = topo.max_level[static_cast<std::size_t>(n.feature)];
    lmax = std::max(lmax.value_or(n.level), n.level);
  }
  return topo;
}

namespace {

nlohmann::json node_to_json(const DecisionTree &tree, int id) {
  const auto &n = tree.node(id);
  if (n.is_branch())
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"left", node_to_json(tree, n.left)},
            {"right", node_to_json(tree, n.right)}};
  nlohmann::json leaf = {{"value", n.value}};
  if (tree.task() == Task::classification) leaf["class"] = n.label;
  return leaf;
}

int node_from_json(const nlohmann::json &j, int level, Task task, int n_outputs,
                   std::vector<TreeNode> &nodes) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  nodes.back().level = level;
  if (j.contains("feature")) {
    const int feature = j.at("feature").get<int>();
    const double threshold = j.at("threshold").get<double>();
    const int l = node_from_json(j.at("left"), level + 1, task, n_outputs, nodes);
    const int r = node_from_json(j.at("right"), level + 1, task, n_outputs, nodes);
    auto &n = nodes[static_cast<std::size_t>(id)];
    n.kind = TreeNode::Kind::branch;
    n.feature = feature;
    n.threshold = threshold;
    n.left = l;
    n.right = r;
    return id;
  }
  auto &n = nodes[static_cast<std::size_t>(id)];
  if (task == Task::classification) {
    n.label = j.at("class").get<int>();
    if (n.label < 0 || n.label >= n_outputs) throw Error("leaf class out of range");
    n.value = j.value("value", std::vector<double>{});
    if (n.value.empty()) {
      n.value.assign(static_cast<std::size_t>(n_outputs), 0.0);
      n.value[static_cast<std::size_t>(n.label)] = 1.0;
    }
  } else {
    n.value = j.at("value").get<std::vector<double>>();
  }
  if (static_cast<int>(n.value.size()) != n_outputs)
    throw Error("leaf value has the wrong width");
  return id;
}

}  // namespace

nlohmann::json tree_to_json(const DecisionTree &tree) {
  return {{"max_depth", tree.max_depth()},
          {"n_features", tree.n_features()},
          {"n_outputs", tree.n_outputs()},
          {"task", to_string(tree.task())},
          {"root", node_to_json(tree, 0)}};
}

DecisionTree tree_from_json(const nlohmann::json &j) {
  const Task task = task_from_string(j.at("task").get<std::string>());
  const int n_outputs = j.at("n_outputs").get<int>();
  std::vector<TreeNode> nodes;
  node_from_json(j.at("root"), 0, task, n_outputs, nodes);
  return DecisionTree(std::move(nodes), j.at("max_depth").get<int>(),
                      j.at("n_features").get<int>(), task, n_outputs);
}

std::string tree_to_dot(const DecisionTree &tree,
                        const std::vector<std::string> &feature_names) {
  std::ostringstream os;
  os << "digraph tree {\n  node [shape=box, fontname=\"Helvetica\"];\n";
  for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
    const auto &n = tree.nodes()[id];
    os << "  n" << id << " [label=\"";
    if (n.is_branch()) {
      if (static_cast<std::size_t>(n.feature) < feature_names.size())
        os << feature_names[static_cast<std::size_t>(n.feature)];
      else
        os << 'x' << n.feature;
      os << " ≤ " << n.threshold << "\"];\n";
    } else if (tree.task() == Task::classification) {
      os << "class " << n.label << "\", style=rounded];\n";
    } else {
      for (std::size_t k = 0; k < n.value.size(); ++k)
        os << (k ? ", " : "") << n.value[k];
      os << "\", style=rounded];\n";
    }
  }
  for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
    const auto &n = tree.nodes()[id];
    if (!n.is_branch()) continue;
    os << "  n" << id << " -> n" << n.left << " [label=\"yes\"];\n";
    os << "  n" << id << " -> n" << n.right << " [label=\"no\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace djinn
