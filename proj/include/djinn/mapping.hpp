#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "djinn/net.hpp"
#include "djinn/tree.hpp"

namespace djinn {

struct Architecture {
  int n_in = 0;
  std::vector<int> hidden;
  int n_out = 0;

  /// n_in, hidden..., n_out
  std::vector<int> widths() const;
  bool operator==(const Architecture &) const = default;
};

enum class NeuronRole { passthrough, decision, free };

/// Location of a neuron: layer 0 is the input layer.
struct NeuronRef {
  int layer = -1;
  int index = -1;
  bool operator==(const NeuronRef &) const = default;
};

struct InitializedNetwork {
  Architecture arch;
  Network net;
  /// roles[l][j] for hidden layer l + 1.
  std::vector<std::vector<NeuronRole>> roles;
  /// Neuron representing each tree node that is a branch; unset for leaves.
  std::vector<NeuronRef> branch_neurons;
  int pruned = 0;
};

struct InitStats {
  std::vector<int> nonzero;  ///< per weight matrix
  std::vector<int> unity;
  int pruned = 0;
};

/// Hidden widths n(l) = n(l-1) + N_b(l). A tree whose only branch is the root
/// gets one hidden layer of width n_in.
Architecture architecture_from_topology(const TreeTopology &topology, int n_in,
                                        int n_out);

/// Standard deviation of the initial weight distribution, sqrt(3 / (n_prev + n_cur)).
double xavier_sigma(int n_prev, int n_cur);

/// Maps a tree onto an initialized network: unity passthrough of inputs while
/// the tree still splits on them, one sampled neuron per branch, leaf chains to
/// the outputs and normally distributed biases. No pruning is done here.
InitializedNetwork map_tree(const DecisionTree &tree, const TreeTopology &topology,
                            int n_in, int n_out, std::uint64_t seed);

/// Drops hidden neurons that have no incoming weight and a negative bias.
InitializedNetwork prune_dead_neurons(InitializedNetwork net);

InitStats init_stats(const Network &net, int pruned = 0);
inline InitStats init_stats(const InitializedNetwork &net) {
  return init_stats(net.net, net.pruned);
}

/// Neurons as nodes, nonzero weights as edges; unity edges drawn with penwidth=2.
std::string network_to_dot(const Network &net);

nlohmann::json initialized_network_to_json(const InitializedNetwork &net);

std::string to_string(NeuronRole role);

}  // namespace djinn
