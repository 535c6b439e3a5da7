#include "djinn/ensemble.hpp"

#include <algorithm>
#include <future>
#include <sstream>

#include "djinn/error.hpp"

namespace djinn {

std::string to_string(InitScheme scheme) {
  switch (scheme) {
    case InitScheme::djinn: return "djinn";
    case InitScheme::random_dense: return "random_dense";
    case InitScheme::random_sparse: return "random_sparse";
  }
  return "unknown";
}

InitScheme scheme_from_string(const std::string &name) {
  if (name == "djinn") return InitScheme::djinn;
  if (name == "random_dense") return InitScheme::random_dense;
  if (name == "random_sparse") return InitScheme::random_sparse;
  throw Error("unknown init scheme '" + name + "'");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

enum Stream : std::uint64_t { map_stream = 1, weight_stream = 2, shuffle_stream = 3 };

struct MemberResult {
  Network net;
  CostHistory history;
  InitStats stats;
  std::vector<int> widths;
};

MemberResult build_member(const DecisionTree &tree, std::uint64_t seed, int n_in, int n_out,
                          const Matrix &x, const Matrix &y, const EnsembleConfig &config,
                          const std::optional<Monitor> &monitor) {
  const TreeTopology topo = analyze_topology(tree);
  InitializedNetwork mapped = prune_dead_neurons(
      map_tree(tree, topo, n_in, n_out, derive_seed(seed, map_stream)));
  MemberResult out;
  const Task task = tree.task();
  switch (config.scheme) {
    case InitScheme::djinn:
      break;
    case InitScheme::random_dense:
      mapped = random_dense_init(mapped.arch, task, derive_seed(seed, weight_stream));
      break;
    case InitScheme::random_sparse: {
      const auto budget = SparsityBudget::from_stats(init_stats(mapped), mapped.arch);
      mapped = random_sparse_init(mapped.arch, budget, task, derive_seed(seed, weight_stream));
      break;
    }
  }
  out.stats = init_stats(mapped);
  out.widths = mapped.arch.hidden;
  TrainingConfig tc = config.training;
  tc.shuffle_seed = derive_seed(seed, shuffle_stream);
  auto trained = train(std::move(mapped.net), x, y, tc, monitor);
  out.net = std::move(trained.net);
  out.history = std::move(trained.history);
  return out;
}

}  // namespace

DjinnEnsemble build_and_train(const Dataset &train, const EnsembleConfig &config,
                              std::optional<Monitor> monitor) {
  if (config.n_trees < 1) throw Error("ensemble needs at least one tree");
  if (config.jobs < 1) throw Error("jobs must be >= 1");
  DjinnEnsemble ens;
  ens.task = train.task;
  ens.n_classes = train.n_classes;
  ens.scheme = config.scheme;
  ens.scaler = fit_scaler(train.features);
  const Matrix x = apply_scaler(train.features, ens.scaler);
  Matrix y = train.targets;
  if (train.task == Task::regression && config.scale_targets) {
    ens.target_scaler = fit_scaler(train.targets);
    y = apply_scaler(train.targets, *ens.target_scaler);
  }
  const int n_in = static_cast<int>(x.cols());
  const int n_out = train.n_outputs();

  Matrix monitor_x;
  Matrix monitor_y;
  std::optional<Monitor> scaled_monitor;
  if (monitor && monitor->features) {
    monitor_x = apply_scaler(*monitor->features, ens.scaler);
    monitor_y = ens.target_scaler ? apply_scaler(*monitor->targets, *ens.target_scaler)
                                  : *monitor->targets;
    scaled_monitor = Monitor{&monitor_x, &monitor_y};
  }

  const Forest forest = fit_forest(x, y, train.task, config.n_trees, config.tree,
                                   config.base_seed, train.n_classes);
  std::vector<MemberResult> results(forest.trees.size());
  auto run = [&](std::size_t i) {
    results[i] = build_member(forest.trees[i], forest.seeds[i], n_in, n_out, x, y, config,
                              scaled_monitor);
  };
  if (config.jobs == 1) {
    for (std::size_t i = 0; i < results.size(); ++i) run(i);
  } else {
    for (std::size_t start = 0; start < results.size();
         start += static_cast<std::size_t>(config.jobs)) {
      std::vector<std::future<void>> batch;
      const std::size_t stop =
          std::min(results.size(), start + static_cast<std::size_t>(config.jobs));
      for (std::size_t i = start; i < stop; ++i)
        batch.push_back(std::async(std::launch::async, run, i));
      for (auto &f : batch) f.get();
    }
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    ens.members.push_back(std::move(results[i].net));
    ens.histories.push_back(std::move(results[i].history));
    ens.init_stats.push_back(std::move(results[i].stats));
    ens.architectures.push_back(std::move(results[i].widths));
    ens.member_seeds.push_back(forest.seeds[i]);
  }
  return ens;
}

Matrix predict_ensemble(const DjinnEnsemble &ensemble, const Matrix &features, int members) {
  if (ensemble.members.empty()) throw Error("ensemble has no members");
  if (features.cols() != ensemble.scaler.min.size())
    throw Error("predict_ensemble: feature count mismatch");
  if (members > static_cast<int>(ensemble.members.size()))
    throw Error("predict_ensemble: asked for more members than the ensemble has");
  const int count = members > 0 ? members : static_cast<int>(ensemble.members.size());
  const Matrix x = apply_scaler(features, ensemble.scaler);
  Matrix sum = predict(ensemble.members[0], x);
  for (int m = 1; m < count; ++m) sum += predict(ensemble.members[static_cast<std::size_t>(m)], x);
  sum /= static_cast<double>(count);
  if (ensemble.task == Task::regression && ensemble.target_scaler)
    return invert_scaler(sum, *ensemble.target_scaler);
  return sum;
}

Matrix ensemble_labels(const DjinnEnsemble &ensemble, const Matrix &features, int members) {
  if (ensemble.task != Task::classification)
    throw Error("ensemble_labels: not a classification ensemble");
  const Matrix probs = predict_ensemble(ensemble, features, members);
  Matrix labels(probs.rows(), 1);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    probs.row(i).maxCoeff(&best);
    labels(i, 0) = static_cast<double>(best);
  }
  return labels;
}

std::vector<double> mean_cost_curve(const DjinnEnsemble &ensemble) {
  if (ensemble.histories.empty()) return {};
  std::vector<double> out(ensemble.histories.front().train.size(), 0.0);
  for (const auto &h : ensemble.histories)
    for (std::size_t e = 0; e < out.size(); ++e) out[e] += h.train[e];
  for (auto &v : out) v /= static_cast<double>(ensemble.histories.size());
  return out;
}

std::vector<SweepRow> sweep_tree_count(const Dataset &data, const std::vector<int> &counts,
                                       const EnsembleConfig &config, const SplitPlan &plan) {
  if (counts.empty() || counts.front() < 1 || !std::is_sorted(counts.begin(), counts.end()))
    throw Error("tree counts must be positive and ascending");
  if (data.task != Task::regression) throw Error("tree-count sweep needs a regression task");
  EnsembleConfig cfg = config;
  cfg.n_trees = counts.back();
  std::vector<std::vector<double>> ratios(counts.size());
  for (const auto &perm : plan.permutations) {
    const Dataset train = data.subset(perm.train);
    const Dataset test = data.subset(perm.test);
    const DjinnEnsemble ens = build_and_train(train, cfg);
    const double single =
        regression_metrics(test.targets, predict_ensemble(ens, test.features, 1)).mse;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      const double mse =
          regression_metrics(test.targets, predict_ensemble(ens, test.features, counts[c])).mse;
      ratios[c].push_back(mse / single);
    }
  }
  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const auto report = summarize("sweep", Task::regression, {{"nmse", ratios[c]}});
    rows.push_back({counts[c], report.at("nmse")});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow> &rows) {
  std::ostringstream os;
  os.precision(10);
  os << "n_trees,normalized_mse_mean,normalized_mse_std";
  const std::size_t perms = rows.empty() ? 0 : rows.front().normalized_mse.raw.size();
  for (std::size_t p = 0; p < perms; ++p) os << ",perm" << p;
  os << '\n';
  for (const auto &r : rows) {
    os << r.n_trees << ',' << r.normalized_mse.mean << ',' << r.normalized_mse.std;
    for (double v : r.normalized_mse.raw) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

nlohmann::json ensemble_to_json(const DjinnEnsemble &ensemble) {
  nlohmann::json j;
  j["task"] = to_string(ensemble.task);
  j["n_classes"] = ensemble.n_classes;
  j["scheme"] = to_string(ensemble.scheme);
  j["member_seeds"] = ensemble.member_seeds;
  j["scaler"] = ensemble.scaler;
  if (ensemble.target_scaler) j["target_scaler"] = *ensemble.target_scaler;
  auto &members = j["members"] = nlohmann::json::array();
  for (const auto &m : ensemble.members) {
    nlohmann::json model = network_to_json(m);
    model["scaler"] = ensemble.scaler;
    if (ensemble.target_scaler) model["target_scaler"] = *ensemble.target_scaler;
    members.push_back(std::move(model));
  }
  return j;
}

DjinnEnsemble ensemble_from_json(const nlohmann::json &j) {
  DjinnEnsemble ens;
  ens.task = task_from_string(j.at("task").get<std::string>());
  ens.n_classes = j.value("n_classes", 0);
  ens.scheme = scheme_from_string(j.value("scheme", std::string("djinn")));
  ens.member_seeds = j.value("member_seeds", std::vector<std::uint64_t>{});
  ens.scaler = j.at("scaler").get<ScalingParams>();
  if (j.contains("target_scaler")) ens.target_scaler = j.at("target_scaler").get<ScalingParams>();
  for (const auto &m : j.at("members")) ens.members.push_back(network_from_json(m));
  if (ens.members.empty()) throw Error("ensemble JSON has no members");
  return ens;
}

}  // namespace djinn
