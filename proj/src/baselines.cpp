#include "djinn/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "djinn/error.hpp"

namespace djinn {

SparsityBudget SparsityBudget::from_stats(const InitStats &stats,
                                          const Architecture &arch) {
  const auto widths = arch.widths();
  if (stats.nonzero.size() + 1 != widths.size())
    throw Error("sparsity budget: layer count does not match the architecture");
  SparsityBudget budget;
  for (std::size_t l = 0; l < stats.nonzero.size(); ++l)
    budget.nonzero.push_back(std::max(stats.nonzero[l], std::max(widths[l], widths[l + 1])));
  return budget;
}

namespace {

InitializedNetwork empty_network(const Architecture &arch, Task task) {
  if (arch.n_in < 1 || arch.n_out < 1 || arch.hidden.empty() ||
      std::any_of(arch.hidden.begin(), arch.hidden.end(), [](int w) { return w < 1; }))
    throw Error("invalid architecture");
  InitializedNetwork out;
  out.arch = arch;
  out.net.task = task;
  const auto widths = arch.widths();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    out.net.weights.push_back(Matrix::Zero(widths[l + 1], widths[l]));
    out.net.biases.push_back(Vector::Zero(widths[l + 1]));
  }
  return out;
}

void sample_biases(InitializedNetwork &net, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto widths = net.arch.widths();
  for (std::size_t l = 0; l < net.net.biases.size(); ++l) {
    const double sigma = xavier_sigma(widths[l], widths[l + 1]);
    for (auto &b : net.net.biases[l]) b = sigma * normal(rng);
  }
}

}  // namespace

InitializedNetwork random_dense_init(const Architecture &arch, Task task,
                                     std::uint64_t seed) {
  InitializedNetwork out = empty_network(arch, task);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto &w : out.net.weights) {
    const double sigma = xavier_sigma(static_cast<int>(w.cols()), static_cast<int>(w.rows()));
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = sigma * normal(rng);
  }
  sample_biases(out, rng);
  return out;
}

InitializedNetwork random_sparse_init(const Architecture &arch,
                                      const SparsityBudget &budget, Task task,
                                      std::uint64_t seed) {
  InitializedNetwork out = empty_network(arch, task);
  if (budget.nonzero.size() != out.net.weights.size())
    throw Error("sparsity budget: layer count does not match the architecture");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (std::size_t l = 0; l < out.net.weights.size(); ++l) {
    Matrix &w = out.net.weights[l];
    const auto rows = static_cast<int>(w.rows());
    const auto cols = static_cast<int>(w.cols());
    const int count = budget.nonzero[l];
    if (count < std::max(rows, cols) || count > rows * cols) {
      std::ostringstream msg;
      msg << "infeasible sparsity budget " << count << " for a " << rows << "x" << cols
          << " layer (needs " << std::max(rows, cols) << " to " << rows * cols << ")";
      throw Error(msg.str());
    }
    const double sigma = xavier_sigma(cols, rows);
    std::vector<char> used(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0);
    auto place = [&](int r, int c) {
      auto &flag = used[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                        static_cast<std::size_t>(c)];
      if (flag) return false;
      flag = 1;
      double v = 0.0;
      while (v == 0.0) v = sigma * normal(rng);
      w(r, c) = v;
      return true;
    };

    // Cover: shuffle the longer side and pair it cyclically with a shuffled
    // shorter side, so each row and column gets one entry.
    std::vector<int> long_side(static_cast<std::size_t>(std::max(rows, cols)));
    std::vector<int> short_side(static_cast<std::size_t>(std::min(rows, cols)));
    std::iota(long_side.begin(), long_side.end(), 0);
    std::iota(short_side.begin(), short_side.end(), 0);
    std::shuffle(long_side.begin(), long_side.end(), rng);
    std::shuffle(short_side.begin(), short_side.end(), rng);
    int placed = 0;
    for (std::size_t i = 0; i < long_side.size(); ++i) {
      const int a = long_side[i];
      const int b = short_side[i % short_side.size()];
      placed += rows >= cols ? place(a, b) : place(b, a);
    }

    // Fill the rest uniformly among the empty cells.
    std::vector<int> empty;
    for (int idx = 0; idx < rows * cols; ++idx)
      if (!used[static_cast<std::size_t>(idx)]) empty.push_back(idx);
    std::shuffle(empty.begin(), empty.end(), rng);
    for (std::size_t i = 0; placed < count; ++i, ++placed)
      place(empty[i] / cols, empty[i] % cols);
  }
  sample_biases(out, rng);
  return out;
}

}  // namespace djinn
