#include "djinn/mapping.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "djinn/error.hpp"

namespace djinn {

std::vector<int> Architecture::widths() const {
  std::vector<int> out{n_in};
  out.insert(out.end(), hidden.begin(), hidden.end());
  out.push_back(n_out);
  return out;
}

std::string to_string(NeuronRole role) {
  switch (role) {
    case NeuronRole::passthrough: return "passthrough";
    case NeuronRole::decision: return "decision";
    case NeuronRole::free: return "free";
  }
  return "unknown";
}

Architecture architecture_from_topology(const TreeTopology &topology, int n_in,
                                        int n_out) {
  if (n_out < 1) throw Error("architecture: need at least one output");
  if (topology.depth < 1 ||
      topology.branches_per_level.size() != static_cast<std::size_t>(topology.depth) + 1 ||
      topology.branch_depth != topology.depth - 1)
    throw Error("architecture: malformed topology");
  int split_on = 0;
  for (std::size_t i = 0; i < topology.max_level.size(); ++i) {
    if (!topology.max_level[i]) continue;
    if (static_cast<int>(i) >= n_in) throw Error("architecture: split feature beyond n_in");
    ++split_on;
  }
  if (n_in < split_on || n_in < 1) throw Error("architecture: n_in too small");

  Architecture arch{n_in, {}, n_out};
  if (topology.branch_depth == 0) {
    arch.hidden.push_back(n_in);
    return arch;
  }
  int width = n_in;
  for (int l = 1; l <= topology.branch_depth; ++l) {
    width += topology.branches_per_level[static_cast<std::size_t>(l)];
    arch.hidden.push_back(width);
  }
  return arch;
}

double xavier_sigma(int n_prev, int n_cur) {
  if (n_prev < 1 || n_cur < 1) throw Error("xavier_sigma: widths must be positive");
  return std::sqrt(3.0 / static_cast<double>(n_prev + n_cur));
}

InitializedNetwork map_tree(const DecisionTree &tree, const TreeTopology &topology,
                            int n_in, int n_out, std::uint64_t seed) {
  const TreeTopology actual = analyze_topology(tree);
  if (actual.depth != topology.depth ||
      actual.branches_per_level != topology.branches_per_level ||
      actual.max_level != topology.max_level)
    throw Error("map_tree: topology was not derived from this tree");
  if (tree.n_features() != n_in) throw Error("map_tree: n_in differs from tree features");
  if (tree.n_outputs() != n_out) throw Error("map_tree: n_out differs from tree outputs");

  InitializedNetwork out;
  out.arch = architecture_from_topology(topology, n_in, n_out);
  const std::vector<int> widths = out.arch.widths();
  const int hidden_layers = static_cast<int>(out.arch.hidden.size());
  const bool stump = topology.branch_depth == 0;

  auto &weights = out.net.weights;
  auto &biases = out.net.biases;
  out.net.task = tree.task();
  std::vector<double> sigma;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    weights.push_back(Matrix::Zero(widths[l + 1], widths[l]));
    sigma.push_back(xavier_sigma(widths[l], widths[l + 1]));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // W^layer maps layer - 1 onto layer; existing entries are never overwritten.
  auto connect = [&](int layer, int to, int from) {
    double &w = weights[static_cast<std::size_t>(layer - 1)](to, from);
    if (w == 0.0) w = sigma[static_cast<std::size_t>(layer - 1)] * normal(rng);
  };

  if (stump) {
    weights[0].diagonal().setOnes();
  } else {
    for (int i = 0; i < n_in; ++i) {
      const auto &lmax = topology.max_level[static_cast<std::size_t>(i)];
      if (!lmax) continue;
      for (int l = 1; l < *lmax; ++l) weights[static_cast<std::size_t>(l - 1)](i, i) = 1.0;
    }
  }

  std::vector<int> next_slot(widths.size(), 0);
  for (int l = 1; l <= hidden_layers; ++l)
    next_slot[static_cast<std::size_t>(l)] = widths[static_cast<std::size_t>(l - 1)];
  out.branch_neurons.assign(tree.nodes().size(), NeuronRef{});

  // Depth-first, left child first; `parent` indexes layer node.level - 1.
  std::function<void(int, int)> visit = [&](int id, int parent) {
    const TreeNode &node = tree.node(id);
    if (node.is_branch()) {
      int neuron = node.feature;
      if (node.level > 0) {
        neuron = next_slot[static_cast<std::size_t>(node.level)]++;
        connect(node.level, neuron, parent);
        connect(node.level, neuron, node.feature);
      }
      out.branch_neurons[static_cast<std::size_t>(id)] = {node.level, neuron};
      visit(node.left, neuron);
      visit(node.right, neuron);
      return;
    }
    for (int l = node.level; l <= hidden_layers; ++l) connect(l, parent, parent);
    if (tree.task() == Task::classification) {
      connect(hidden_layers + 1, node.label, parent);
    } else {
      for (int k = 0; k < n_out; ++k) connect(hidden_layers + 1, k, parent);
    }
  };
  visit(0, -1);
  for (int l = 1; l <= hidden_layers; ++l)
    if (next_slot[static_cast<std::size_t>(l)] != widths[static_cast<std::size_t>(l)])
      throw Error("map_tree: branch count does not match the architecture");

  for (std::size_t l = 0; l < weights.size(); ++l) {
    Vector b(widths[l + 1]);
    for (auto &v : b) v = sigma[l] * normal(rng);
    biases.push_back(std::move(b));
  }

  for (int l = 1; l <= hidden_layers; ++l) {
    const auto &w = weights[static_cast<std::size_t>(l - 1)];
    std::vector<NeuronRole> roles;
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
      if (j >= w.cols() && !stump)
        roles.push_back(NeuronRole::decision);
      else if ((w.row(j).array() != 0.0).any())
        roles.push_back(NeuronRole::passthrough);
      else
        roles.push_back(NeuronRole::free);
    }
    out.roles.push_back(std::move(roles));
  }
  return out;
}

InitializedNetwork prune_dead_neurons(InitializedNetwork net) {
  auto &weights = net.net.weights;
  auto &biases = net.net.biases;
  const std::size_t hidden = weights.size() - 1;
  for (std::size_t l = 0; l < hidden; ++l) {
    const Matrix &w = weights[l];
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < w.rows(); ++j)
      if ((w.row(j).array() != 0.0).any() || biases[l](j) >= 0.0) keep.push_back(j);
    if (keep.empty()) {
      std::ostringstream msg;
      msg << "pruning would empty hidden layer " << l + 1;
      throw Error(msg.str());
    }
    if (static_cast<Eigen::Index>(keep.size()) == w.rows()) continue;

    const auto k = static_cast<Eigen::Index>(keep.size());
    Matrix rows(k, w.cols());
    Vector bias(k);
    Matrix next(weights[l + 1].rows(), k);
    std::vector<NeuronRole> roles;
    std::vector<Eigen::Index> new_index(static_cast<std::size_t>(w.rows()), -1);
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::Index j = keep[static_cast<std::size_t>(i)];
      rows.row(i) = w.row(j);
      bias(i) = biases[l](j);
      next.col(i) = weights[l + 1].col(j);
      roles.push_back(net.roles[l][static_cast<std::size_t>(j)]);
      new_index[static_cast<std::size_t>(j)] = i;
    }
    net.pruned += static_cast<int>(w.rows() - k);
    weights[l] = std::move(rows);
    biases[l] = std::move(bias);
    weights[l + 1] = std::move(next);
    net.roles[l] = std::move(roles);
    net.arch.hidden[l] = static_cast<int>(k);
    for (auto &ref : net.branch_neurons) {
      if (ref.layer != static_cast<int>(l) + 1) continue;
      ref.index = static_cast<int>(new_index[static_cast<std::size_t>(ref.index)]);
      if (ref.index < 0) throw Error("pruning removed a decision neuron");
    }
  }
  return net;
}

InitStats init_stats(const Network &net, int pruned) {
  InitStats stats;
  stats.pruned = pruned;
  for (const auto &w : net.weights) {
    stats.nonzero.push_back(static_cast<int>((w.array() != 0.0).count()));
    stats.unity.push_back(static_cast<int>((w.array() == 1.0).count()));
  }
  return stats;
}

std::string network_to_dot(const Network &net) {
  const auto widths = net.widths();
  std::ostringstream os;
  os.precision(4);
  os << "digraph network {\n  rankdir=LR;\n  node [shape=circle, label=\"\"];\n";
  for (std::size_t l = 0; l < widths.size(); ++l) {
    os << "  subgraph cluster_" << l << " {\n    style=invis;\n";
    for (int j = 0; j < widths[l]; ++j) os << "    l" << l << "_" << j << ";\n";
    os << "  }\n";
  }
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Matrix &w = net.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (w(r, c) == 0.0) continue;
        os << "  l" << l << "_" << c << " -> l" << l + 1 << "_" << r;
        if (w(r, c) == 1.0)
          os << " [penwidth=2, color=red];\n";
        else
          os << " [label=\"" << w(r, c) << "\"];\n";
      }
    }
  }
  os << "}\n";
  return os.str();
}

nlohmann::json initialized_network_to_json(const InitializedNetwork &net) {
  nlohmann::json j = network_to_json(net.net);
  auto &roles = j["roles"] = nlohmann::json::array();
  for (const auto &layer : net.roles) {
    auto names = nlohmann::json::array();
    for (auto r : layer) names.push_back(to_string(r));
    roles.push_back(std::move(names));
  }
  j["pruned"] = net.pruned;
  return j;
}

}  // namespace djinn
