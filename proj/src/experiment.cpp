#include "djinn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "djinn/error.hpp"
#include "djinn/presets.hpp"

namespace djinn {

void RunConfig::validate() const {
  if (data.empty()) throw Error("no data file given");
  if (!std::filesystem::is_regular_file(data))
    throw Error("data file not found: " + data.string());
  if (targets.empty()) throw Error("no target column given");
  if (n_trees < 1) throw Error("--trees must be at least 1");
  if (max_depth < 1) throw Error("--max-depth must be at least 1");
  if (epochs < 1) throw Error("--epochs must be at least 1");
  if (!(learning_rate > 0.0)) throw Error("--lr must be positive");
  if (batch_size < 1) throw Error("--batch must be at least 1");
  if (permutations < 1) throw Error("--permutations must be at least 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error("test fraction must lie in (0, 1)");
  if (jobs < 1) throw Error("--jobs must be at least 1");
}

RunConfig preset_config(const std::string &preset, const std::filesystem::path &data_dir) {
  const Preset &p = find_preset(preset);
  RunConfig c;
  c.data = data_dir / p.file;
  c.targets = p.targets;
  c.task = p.task;
  c.max_depth = p.max_depth;
  c.epochs = p.epochs;
  c.learning_rate = p.learning_rate;
  c.batch_size = p.batch_size;
  return c;
}

Dataset load_dataset(const RunConfig &config) {
  config.validate();
  Dataset d = load_csv(config.data, config.targets, config.task);
  const auto train_rows = static_cast<int>(
      d.n_samples() - std::clamp<long long>(std::llround(config.test_fraction * d.n_samples()), 1,
                                            d.n_samples() - 1));
  // Catch an oversized batch here rather than halfway through a run.
  if (config.batch_size > train_rows)
    throw Error("--batch " + std::to_string(config.batch_size) + " exceeds the " +
                std::to_string(train_rows) + " training rows");
  return d;
}

EnsembleConfig ensemble_config(const RunConfig &config, std::size_t permutation) {
  EnsembleConfig e;
  e.n_trees = config.n_trees;
  e.tree.max_depth = config.max_depth;
  e.training.epochs = config.epochs;
  e.training.learning_rate = config.learning_rate;
  e.training.batch_size = config.batch_size;
  e.training.loss = default_loss(config.task);
  e.scheme = config.scheme;
  e.base_seed = derive_seed(config.seed, 100 + permutation);
  e.scale_targets = config.scale_targets;
  e.jobs = config.jobs;
  return e;
}

Matrix ensemble_output(const DjinnEnsemble &ensemble, const Matrix &features) {
  return ensemble.task == Task::regression ? predict_ensemble(ensemble, features)
                                           : ensemble_labels(ensemble, features);
}

SchemeRun run_scheme(const Dataset &data, const SplitPlan &plan, const RunConfig &config,
                     InitScheme scheme) {
  SchemeRun out;
  RunConfig c = config;
  c.scheme = scheme;
  out.report = crossval_evaluate(
      to_string(scheme),
      [&](const Dataset &train, const Dataset &test, std::size_t p) {
        const DjinnEnsemble ens = build_and_train(train, ensemble_config(c, p));
        out.cost_curves.push_back(mean_cost_curve(ens));
        return ensemble_output(ens, test.features);
      },
      data, plan);
  return out;
}

std::vector<double> average_curves(const std::vector<std::vector<double>> &curves) {
  if (curves.empty()) return {};
  std::vector<double> mean(curves.front().size(), 0.0);
  for (const auto &c : curves) {
    if (c.size() != mean.size()) throw Error("average_curves: curves differ in length");
    for (std::size_t i = 0; i < c.size(); ++i) mean[i] += c[i];
  }
  for (double &v : mean) v /= static_cast<double>(curves.size());
  return mean;
}

std::string cost_curves_csv(const std::vector<std::vector<double>> &curves) {
  const auto mean = average_curves(curves);
  std::ostringstream os;
  os.precision(17);
  os << "epoch,cost";
  for (std::size_t p = 0; p < curves.size(); ++p) os << ",perm" << p;
  os << '\n';
  for (std::size_t e = 0; e < mean.size(); ++e) {
    os << e + 1 << ',' << mean[e];
    for (const auto &c : curves) os << ',' << c[e];
    os << '\n';
  }
  return os.str();
}

BayesoptRun run_bayesopt(const Dataset &data, const SplitPlan &plan, const RunConfig &config,
                         int budget) {
  using clock = std::chrono::steady_clock;
  BayesoptRun out;
  TrainingConfig training;
  training.epochs = config.epochs;
  training.learning_rate = config.learning_rate;
  training.batch_size = config.batch_size;
  training.loss = default_loss(config.task);

  // Both models see the same folds; the DJINN ensemble also fixes the depth
  // and width bounds of the search.
  std::vector<DjinnEnsemble> djinn_models;
  RunConfig c = config;
  c.scheme = InitScheme::djinn;
  out.djinn = crossval_evaluate(
      "djinn",
      [&](const Dataset &train, const Dataset &test, std::size_t p) {
        const auto t0 = clock::now();
        djinn_models.push_back(build_and_train(train, ensemble_config(c, p)));
        out.djinn_seconds += std::chrono::duration<double>(clock::now() - t0).count();
        return ensemble_output(djinn_models.back(), test.features);
      },
      data, plan);

  out.searched = crossval_evaluate(
      "bayesopt",
      [&](const Dataset &train, const Dataset &test, std::size_t p) {
        const SearchSpace space = default_search_space(djinn_models[p].architectures);
        OptimizerConfig oc;
        oc.budget = budget;
        oc.seed = derive_seed(config.seed, 200 + p);
        const auto t0 = clock::now();
        const ArchitectureSearch s =
            search_architecture(train, space, training, oc, config.scale_targets);
        out.search_seconds += std::chrono::duration<double>(clock::now() - t0).count();
        out.networks_trained += s.networks_trained;
        out.searches.push_back(s.result);
        return ensemble_output(s.model, test.features);
      },
      data, plan);
  attach_pvalue(out.searched, out.djinn);
  return out;
}

}  // namespace djinn
