#pragma once

#include <nlohmann/json.hpp>

#include "djinn/tree.hpp"

namespace djinn::oracle {

// Three inputs, two classes, depth 3:
//   x0 <= 0.5 ? class 0
//             : (x1 <= 0.5 ? (x0 <= 0.75 ? 0 : 1) : (x2 <= 0.5 ? 0 : 1))
inline DecisionTree figure_tree() {
  auto leaf = [](int c) { return nlohmann::json{{"class", c}}; };
  auto branch = [](int f, double t, nlohmann::json l, nlohmann::json r) {
    return nlohmann::json{{"feature", f}, {"threshold", t}, {"left", l}, {"right", r}};
  };
  const nlohmann::json j = {
      {"task", "classification"},
      {"max_depth", 3},
      {"n_features", 3},
      {"n_outputs", 2},
      {"root", branch(0, 0.5, leaf(0),
                      branch(1, 0.5, branch(0, 0.75, leaf(0), leaf(1)),
                             branch(2, 0.5, leaf(0), leaf(1))))}};
  return tree_from_json(j);
}

}  // namespace djinn::oracle

#include <algorithm>
#include <cmath>
#include <random>

#include "djinn/net.hpp"

namespace djinn::oracle {

inline Network random_network(const std::vector<int> &widths, Task task, std::mt19937_64 &rng) {
  std::normal_distribution<double> n(0.0, 0.7);
  Network net;
  net.task = task;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Matrix w(widths[l + 1], widths[l]);
    Vector b(widths[l + 1]);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = n(rng);
    net.weights.push_back(w);
    net.biases.push_back(b);
  }
  return net;
}

// Largest |analytic - numeric| / max(|analytic| + |numeric|, 1e-6) over every
// parameter, with central differences.
inline double max_gradient_error(Network net, const Matrix &x, const Matrix &y, Loss loss) {
  const Gradients g = loss_and_gradient(net, x, y, loss);
  const double h = 1e-6;
  double worst = 0.0;
  auto check = [&](double &param, double analytic) {
    const double keep = param;
    param = keep + h;
    const double up = loss_value(net, x, y, loss);
    param = keep - h;
    const double down = loss_value(net, x, y, loss);
    param = keep;
    const double numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(analytic - numeric) /
                                std::max(std::abs(analytic) + std::abs(numeric), 1e-6));
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < net.weights[l].size(); ++i)
      check(net.weights[l].data()[i], g.weights[l].data()[i]);
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i)
      check(net.biases[l](i), g.biases[l](i));
  }
  return worst;
}

// Twenty seeded shapes, both losses; returns the worst error seen.
inline double gradient_check_sweep() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> width(1, 6), depth(1, 4), batch(1, 5), classes(2, 4);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int shape = 0; shape < 20; ++shape) {
    std::vector<int> widths{width(rng)};
    const int hidden = depth(rng) - 1;
    for (int l = 0; l < hidden; ++l) widths.push_back(width(rng));
    const int rows = batch(rng);
    Matrix x(rows, widths.front());
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);

    std::vector<int> reg = widths;
    reg.push_back(width(rng));
    Matrix yr(rows, reg.back());
    for (Eigen::Index i = 0; i < yr.size(); ++i) yr.data()[i] = n(rng);
    worst = std::max(worst, max_gradient_error(random_network(reg, Task::regression, rng), x, yr,
                                               Loss::mse));

    std::vector<int> cls = widths;
    cls.push_back(classes(rng));
    std::uniform_int_distribution<int> label(0, cls.back() - 1);
    Matrix yc(rows, 1);
    for (int i = 0; i < rows; ++i) yc(i, 0) = label(rng);
    worst = std::max(worst, max_gradient_error(random_network(cls, Task::classification, rng), x,
                                               yc, Loss::softmax_xent));
  }
  return worst;
}

}  // namespace djinn::oracle

#include "djinn/baselines.hpp"
#include "djinn/mapping.hpp"

namespace djinn::oracle {

struct SparseCheck {
  int architectures = 0;
  int layers = 0;
  int failures = 0;
  std::string first_failure;
};

// Random trees on random data give random architectures; every sparse layer
// must hit its budget exactly and touch every row and column.
inline SparseCheck sparse_budget_property(int n_architectures, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> features(1, 8), depth(1, 6), outputs(1, 3), rows(20, 120);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SparseCheck out;
  while (out.architectures < n_architectures) {
    const int p = features(rng), n = rows(rng), k = outputs(rng);
    Matrix x(n, p), y(n, k);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = u(rng);
    TreeConfig c;
    c.max_depth = depth(rng);
    const std::uint64_t s = rng();
    const DecisionTree t = fit_tree(x, y, Task::regression, c, s);
    if (t.branch_count() == 0) continue;
    InitializedNetwork m = map_tree(t, analyze_topology(t), p, k, s);
    try {
      m = prune_dead_neurons(m);
    } catch (const std::exception &) {
      continue;
    }
    const SparsityBudget budget = SparsityBudget::from_stats(init_stats(m), m.arch);
    const InitializedNetwork sparse = random_sparse_init(m.arch, budget, Task::regression, s + 1);
    ++out.architectures;
    for (std::size_t l = 0; l < sparse.net.weights.size(); ++l) {
      const Matrix &w = sparse.net.weights[l];
      ++out.layers;
      const auto nz = (w.array() != 0.0);
      const bool ok = nz.count() == budget.nonzero[l] && nz.rowwise().any().all() &&
                      nz.colwise().any().all() && w.rows() == m.net.weights[l].rows() &&
                      w.cols() == m.net.weights[l].cols();
      if (!ok && out.failures++ == 0)
        out.first_failure = "architecture " + std::to_string(out.architectures) + " layer " +
                            std::to_string(l);
    }
  }
  return out;
}

}  // namespace djinn::oracle

namespace djinn::oracle {

// Two-sided p-value of the pooled two-sample t statistic, by Simpson
// integration of the Student t density; shares no code with the library.
inline double ttest_oracle(const std::vector<double> &a, const std::vector<double> &b) {
  auto mean = [](const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto ss = [](const std::vector<double> &v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
  };
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  const double df = na + nb - 2.0;
  const double pooled = (ss(a, ma) + ss(b, mb)) / df;
  const double t = std::abs(ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  const double log_norm = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) -
                          0.5 * std::log(df * 3.14159265358979323846);
  auto density = [&](double x) {
    return std::exp(log_norm - (df + 1) / 2 * std::log1p(x * x / df));
  };
  const int steps = 200000;
  const double h = t / steps;
  double integral = density(0.0) + density(t);
  for (int i = 1; i < steps; ++i) integral += (i % 2 ? 4.0 : 2.0) * density(i * h);
  integral *= h / 3.0;
  return 1.0 - 2.0 * integral;
}

struct PvalueCheck {
  double worst = 0.0;
  int cases = 0;
};

inline PvalueCheck ttest_against_oracle(int cases, std::uint64_t seed,
                                        double (*pvalue)(const std::vector<double> &,
                                                         const std::vector<double> &)) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(3, 15);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-2.0, 2.0), scale(0.2, 3.0);
  PvalueCheck out;
  for (int c = 0; c < cases; ++c) {
    std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
    const double d = shift(rng), s = scale(rng);
    for (double &v : a) v = s * n(rng);
    for (double &v : b) v = s * n(rng) + d;
    out.worst = std::max(out.worst, std::abs(pvalue(a, b) - ttest_oracle(a, b)));
    ++out.cases;
  }
  return out;
}

}  // namespace djinn::oracle
