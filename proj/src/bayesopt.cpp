#include "djinn/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "djinn/error.hpp"

namespace djinn {

double SearchSpace::cardinality() const {
  double n = 1.0;
  for (std::size_t i = 0; i < lower.size(); ++i) n *= upper[i] - lower[i] + 1;
  return n;
}

bool SearchSpace::contains(const std::vector<int> &widths) const {
  if (widths.size() != lower.size()) return false;
  for (std::size_t i = 0; i < widths.size(); ++i)
    if (widths[i] < lower[i] || widths[i] > upper[i]) return false;
  return true;
}

void SearchSpace::validate() const {
  if (lower.empty() || lower.size() != upper.size())
    throw Error("search space: bounds must be non-empty and of equal length");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (lower[i] < 1 || upper[i] < lower[i])
      throw Error("search space: need 1 <= lower <= upper for every layer");
}

double GaussianProcess::kernel(const Vector &a, const Vector &b) const {
  return std::exp(-0.5 * (a - b).squaredNorm() / (length_scale_ * length_scale_));
}

bool GaussianProcess::fit(const Matrix &x, const Vector &y) {
  if (x.rows() != y.size() || x.rows() == 0) throw Error("GP fit: shape mismatch");
  x_ = x;
  y_mean_ = y.mean();
  const double var = (y.array() - y_mean_).square().mean();
  y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
  const Vector z = (y.array() - y_mean_) / y_scale_;
  const auto n = x.rows();

  static constexpr double kLengths[] = {0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.2, 2.0};
  static constexpr double kNoise[] = {1e-6, 1e-4, 1e-2, 1e-1};
  double best_lml = -std::numeric_limits<double>::infinity();
  double best_length = 0.0;
  double best_noise = 0.0;
  for (double length : kLengths) {
    for (double noise : kNoise) {
      length_scale_ = length;
      Matrix k(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
          k(i, j) = k(j, i) = kernel(x.row(i).transpose(), x.row(j).transpose());
      k.diagonal().array() += noise;
      Eigen::LLT<Matrix> llt(k);
      if (llt.info() != Eigen::Success) continue;
      const Vector alpha = llt.solve(z);
      const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      const double lml = -0.5 * z.dot(alpha) - 0.5 * log_det;
      if (std::isfinite(lml) && lml > best_lml) {
        best_lml = lml;
        best_length = length;
        best_noise = noise;
      }
    }
  }
  if (!std::isfinite(best_lml)) return false;
  length_scale_ = best_length;
  noise_ = best_noise;
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      k(i, j) = k(j, i) = kernel(x.row(i).transpose(), x.row(j).transpose());
  k.diagonal().array() += noise_;
  llt_.compute(k);
  if (llt_.info() != Eigen::Success) return false;
  alpha_ = llt_.solve(z);
  return alpha_.allFinite();
}

std::pair<double, double> GaussianProcess::predict(const Vector &x) const {
  Vector k(x_.rows());
  for (Eigen::Index i = 0; i < x_.rows(); ++i) k(i) = kernel(x_.row(i).transpose(), x);
  const double mean = k.dot(alpha_);
  const Vector v = llt_.matrixL().solve(k);
  const double var = std::max(0.0, 1.0 - v.squaredNorm());
  return {y_mean_ + y_scale_ * mean, var * y_scale_ * y_scale_};
}

double expected_improvement(double mean, double variance, double best) {
  const double gap = best - mean;
  if (!(variance > 0.0)) return std::max(gap, 0.0);
  const double sd = std::sqrt(variance);
  const double z = gap / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return gap * cdf + sd * pdf;
}

namespace {

double radical_inverse(int index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * (index % base);
    index /= base;
    f /= base;
  }
  return result;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};

Vector unit_coords(const std::vector<int> &w, const SearchSpace &space) {
  Vector u(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) {
    const int span = space.upper[i] - space.lower[i];
    u(static_cast<Eigen::Index>(i)) = span > 0 ? double(w[i] - space.lower[i]) / span : 0.5;
  }
  return u;
}

std::vector<std::vector<int>> enumerate(const SearchSpace &space) {
  std::vector<std::vector<int>> out;
  std::vector<int> w = space.lower;
  while (true) {
    out.push_back(w);
    std::size_t i = 0;
    for (; i < w.size(); ++i) {
      if (++w[i] <= space.upper[i]) break;
      w[i] = space.lower[i];
    }
    if (i == w.size()) break;
  }
  return out;
}

}  // namespace

SearchResult optimize(const Objective &objective, const SearchSpace &space,
                      const OptimizerConfig &config) {
  space.validate();
  if (config.initial_design < 1) throw Error("optimize: initial design must be >= 1");
  const double card = space.cardinality();
  if (config.budget < 1) throw Error("optimize: budget must be >= 1");
  // A small budget is spent entirely on the space-filling design.
  const int design = static_cast<int>(
      std::min<double>(std::min(config.initial_design, config.budget), card));

  std::mt19937_64 rng(config.seed);
  std::set<std::vector<int>> seen;
  SearchResult result;
  auto evaluate = [&](const std::vector<int> &w, bool surrogate) {
    Trial t;
    t.iteration = static_cast<int>(result.trials.size());
    t.widths = w;
    t.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t.iteration));
    t.proposed_by_surrogate = surrogate;
    t.objective = objective(w, t.seed);
    if (!std::isfinite(t.objective)) throw Error("optimize: objective returned a non-finite value");
    seen.insert(w);
    result.trials.push_back(std::move(t));
  };

  const std::size_t dims = space.n_layers();
  auto random_point = [&] {
    std::vector<int> w(dims);
    for (std::size_t i = 0; i < dims; ++i)
      w[i] = std::uniform_int_distribution<int>(space.lower[i], space.upper[i])(rng);
    return w;
  };

  // Halton initial design, skipping repeats after rounding.
  for (int index = 1; static_cast<int>(result.trials.size()) < design; ++index) {
    std::vector<int> w(dims);
    for (std::size_t i = 0; i < dims; ++i) {
      const int base = kPrimes[i % std::size(kPrimes)];
      const double u = radical_inverse(index + static_cast<int>(i / std::size(kPrimes)) * 7919, base);
      const int span = space.upper[i] - space.lower[i] + 1;
      w[i] = space.lower[i] + std::min(span - 1, static_cast<int>(u * span));
    }
    if (seen.count(w)) {
      if (index > 100 * design) w = random_point();
      if (seen.count(w)) continue;
    }
    evaluate(w, false);
  }

  const bool small = card <= config.candidates;
  const auto all_points = small ? enumerate(space) : std::vector<std::vector<int>>{};
  GaussianProcess gp;
  while (static_cast<int>(result.trials.size()) < config.budget) {
    std::vector<std::vector<int>> pool;
    if (small) {
      for (const auto &w : all_points)
        if (!seen.count(w)) pool.push_back(w);
      if (pool.empty()) pool = all_points;
    } else {
      for (int tries = 0; static_cast<int>(pool.size()) < config.candidates &&
                          tries < 20 * config.candidates; ++tries) {
        auto w = random_point();
        if (!seen.count(w)) pool.push_back(std::move(w));
      }
      if (pool.empty()) pool.push_back(random_point());
    }

    Matrix x(static_cast<Eigen::Index>(result.trials.size()), static_cast<Eigen::Index>(dims));
    Vector y(x.rows());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < result.trials.size(); ++t) {
      x.row(static_cast<Eigen::Index>(t)) = unit_coords(result.trials[t].widths, space).transpose();
      y(static_cast<Eigen::Index>(t)) = result.trials[t].objective;
      best = std::min(best, result.trials[t].objective);
    }
    if (!gp.fit(x, y)) {
      ++result.surrogate_failures;
      std::cerr << "bayesopt: surrogate fit failed at iteration " << result.trials.size()
                << ", falling back to a random proposal\n";
      evaluate(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)], false);
      continue;
    }
    std::size_t pick = 0;
    double best_ei = -1.0;
    for (std::size_t c = 0; c < pool.size(); ++c) {
      const auto [mean, var] = gp.predict(unit_coords(pool[c], space));
      const double ei = expected_improvement(mean, var, best);
      if (ei > best_ei) {
        best_ei = ei;
        pick = c;
      }
    }
    evaluate(pool[pick], true);
  }

  result.best = *std::min_element(result.trials.begin(), result.trials.end(),
                                  [](const Trial &a, const Trial &b) { return a.objective < b.objective; });
  return result;
}

ArchitectureSearch search_architecture(const Dataset &train, const SearchSpace &space,
                                       const TrainingConfig &training,
                                       const OptimizerConfig &config, bool scale_targets) {
  const SplitPlan inner = make_splits(static_cast<std::size_t>(train.n_samples()), 1, 0.2,
                                      derive_seed(config.seed, 99));
  const Dataset fit_part = train.subset(inner.permutations[0].train);
  const Dataset val_part = train.subset(inner.permutations[0].test);

  ArchitectureSearch out;
  out.model.task = train.task;
  out.model.n_classes = train.n_classes;
  out.model.scheme = InitScheme::random_dense;
  out.model.scaler = fit_scaler(fit_part.features);
  const Matrix x_fit = apply_scaler(fit_part.features, out.model.scaler);
  const Matrix x_val = apply_scaler(val_part.features, out.model.scaler);
  Matrix y_fit = fit_part.targets;
  Matrix y_val = val_part.targets;
  if (train.task == Task::regression && scale_targets) {
    out.model.target_scaler = fit_scaler(fit_part.targets);
    y_fit = apply_scaler(y_fit, *out.model.target_scaler);
    y_val = apply_scaler(y_val, *out.model.target_scaler);
  }
  TrainingConfig tc = training;
  tc.batch_size = std::min<int>(tc.batch_size, static_cast<int>(x_fit.rows()));

  double best = std::numeric_limits<double>::infinity();
  auto objective = [&](const std::vector<int> &widths, std::uint64_t seed) {
    const Architecture arch{static_cast<int>(x_fit.cols()), widths, train.n_outputs()};
    InitializedNetwork init = random_dense_init(arch, train.task, seed);
    tc.shuffle_seed = derive_seed(seed, 3);
    auto trained = djinn::train(std::move(init.net), x_fit, y_fit, tc);
    ++out.networks_trained;
    const double cost = loss_value(trained.net, x_val, y_val, tc.loss);
    if (cost < best) {
      best = cost;
      out.model.members.assign(1, std::move(trained.net));
      out.model.histories.assign(1, std::move(trained.history));
      out.model.member_seeds.assign(1, seed);
      out.model.architectures.assign(1, widths);
    }
    return cost;
  };
  out.result = optimize(objective, space, config);
  return out;
}

SearchSpace default_search_space(const std::vector<std::vector<int>> &djinn_architectures) {
  if (djinn_architectures.empty()) throw Error("default_search_space: no architectures");
  std::size_t layers = 0;
  int widest = 1;
  for (const auto &a : djinn_architectures) {
    layers = std::max(layers, a.size());
    for (int w : a) widest = std::max(widest, w);
  }
  return SearchSpace{std::vector<int>(layers, 2), std::vector<int>(layers, std::max(2, 2 * widest))};
}

std::string trials_csv(const std::vector<Trial> &trials) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,widths,objective,surrogate\n";
  for (const auto &t : trials) {
    os << t.iteration << ",\"";
    for (std::size_t i = 0; i < t.widths.size(); ++i) os << (i ? " " : "") << t.widths[i];
    os << "\"," << t.objective << ',' << (t.proposed_by_surrogate ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace djinn
