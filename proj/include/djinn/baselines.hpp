#pragma once

#include <cstdint>
#include <vector>

#include "djinn/mapping.hpp"

namespace djinn {

/// Nonzero weight count per weight matrix.
struct SparsityBudget {
  std::vector<int> nonzero;

  /// Copies the counts of a mapped network. Layers whose count cannot cover
  /// every row and column are raised to max(rows, cols).
  static SparsityBudget from_stats(const InitStats &stats, const Architecture &arch);
};

/// Every weight and bias drawn from N(0, xavier_sigma^2).
InitializedNetwork random_dense_init(const Architecture &arch, Task task,
                                     std::uint64_t seed);

/// Exactly budget.nonzero[l] sampled weights per layer, with every row and
/// column holding at least one of them.
InitializedNetwork random_sparse_init(const Architecture &arch,
                                      const SparsityBudget &budget, Task task,
                                      std::uint64_t seed);

}  // namespace djinn
