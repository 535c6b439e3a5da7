#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "djinn/mapping.hpp"

namespace djinn {

enum class LogicGate { if_gate, or_gate, xor_gate };

std::string to_string(LogicGate gate);

/// Full truth table of the gate as a two-class data set with inputs in {0, 1}.
Dataset truth_table(LogicGate gate);

struct LogicRun {
  DecisionTree tree;
  InitializedNetwork initial;  ///< mapped and pruned, before training
  Network trained;
  CostHistory history;
  int correct = 0;
  int rows = 0;
};

/// Fits a depth-2 tree on the truth table, maps it and trains the network
/// on the four (or two) rows.
LogicRun run_logic_gate(LogicGate gate, std::uint64_t seed, int epochs = 500,
                        double learning_rate = 0.006);

}  // namespace djinn
