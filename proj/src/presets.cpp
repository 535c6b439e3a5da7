#include "djinn/presets.hpp"

#include <algorithm>

#include "djinn/error.hpp"

namespace djinn {

const std::vector<Preset> &presets() {
  static const std::vector<Preset> table = {
      {"boston", "boston.csv", {"medv"}, Task::regression, 300, 0.006, 21, 5},
      {"ca-housing", "ca_housing.csv", {"value"}, Task::regression, 200, 0.006, 826, 5},
      {"diabetes", "diabetes.csv", {"target"}, Task::regression, 50, 0.0001, 1, 5},
      {"yield", "synthetic_yield.csv", {"yield"}, Task::regression, 300, 0.008, 1857, 5},
      {"iris", "iris.csv", {"species"}, Task::classification, 100, 0.006, 6, 3},
      {"digits", "digits.csv", {"target"}, Task::classification, 300, 0.003, 72, 3},
      {"wine", "wine.csv", {"target"}, Task::classification, 50, 0.004, 8, 3},
      {"breast-cancer", "breast_cancer.csv", {"target"}, Task::classification, 100, 0.006, 7, 4},
  };
  return table;
}

const Preset &find_preset(const std::string &name) {
  const auto &table = presets();
  const auto it = std::find_if(table.begin(), table.end(),
                               [&](const Preset &p) { return p.name == name; });
  if (it == table.end()) throw Error("unknown preset '" + name + "'");
  return *it;
}

}  // namespace djinn
