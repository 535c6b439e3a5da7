#pragma once

#include <string>
#include <vector>

#include "djinn/data.hpp"

namespace djinn {

/// Per-data-set training settings and where the CSV lives.
struct Preset {
  std::string name;
  std::string file;  ///< relative to the data directory
  std::vector<std::string> targets;
  Task task = Task::regression;
  int epochs = 0;
  double learning_rate = 0.0;
  int batch_size = 0;
  int max_depth = 0;
};

const std::vector<Preset> &presets();
const Preset &find_preset(const std::string &name);

}  // namespace djinn
