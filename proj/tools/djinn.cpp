// djinn: command-line driver for the tree-to-network experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "djinn/error.hpp"
#include "djinn/experiment.hpp"
#include "djinn/logic.hpp"
#include "djinn/presets.hpp"

#ifndef DJINN_DATA_DIR
#define DJINN_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace djinn;
using json = nlohmann::json;

namespace {

// Raw flag values; resolved into a RunConfig once parsing is done.
struct Flags {
  std::string preset;
  std::string data_dir = DJINN_DATA_DIR;
  std::string data;
  std::vector<std::string> targets;
  std::string task;
  std::optional<int> trees, max_depth, epochs, batch;
  std::optional<double> lr;
  std::uint64_t seed = 0;
  std::string scheme = "djinn";
  std::string out = "out";
  int permutations = 5;
  int jobs = 1;
  bool no_target_scaling = false;
};

void add_run_flags(CLI::App *cmd, Flags &f, bool with_scheme) {
  cmd->add_option("--preset", f.preset, "Data set preset (sets data, task and hyper-parameters)");
  cmd->add_option("--data-dir", f.data_dir, "Directory holding the preset CSVs");
  cmd->add_option("--data", f.data, "CSV file");
  cmd->add_option("--target", f.targets, "Target column(s)")->delimiter(',');
  cmd->add_option("--task", f.task, "regression or classification");
  cmd->add_option("--trees", f.trees, "Ensemble size");
  cmd->add_option("--max-depth", f.max_depth, "Maximum tree depth");
  cmd->add_option("--epochs", f.epochs, "Training epochs");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--batch", f.batch, "Mini-batch size");
  cmd->add_option("--seed", f.seed, "Base seed");
  if (with_scheme)
    cmd->add_option("--scheme", f.scheme, "djinn, random_dense or random_sparse");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--permutations", f.permutations, "Train/test permutations");
  cmd->add_option("--jobs", f.jobs, "Ensemble members trained in parallel");
  cmd->add_flag("--no-target-scaling", f.no_target_scaling,
                "Train regression nets on raw target values");
}

RunConfig resolve(const Flags &f) {
  RunConfig c;
  if (!f.preset.empty()) c = preset_config(f.preset, f.data_dir);
  if (!f.data.empty()) c.data = f.data;
  if (!f.targets.empty()) c.targets = f.targets;
  if (!f.task.empty()) c.task = task_from_string(f.task);
  if (f.trees) c.n_trees = *f.trees;
  if (f.max_depth) c.max_depth = *f.max_depth;
  if (f.epochs) c.epochs = *f.epochs;
  if (f.lr) c.learning_rate = *f.lr;
  if (f.batch) c.batch_size = *f.batch;
  c.seed = f.seed;
  c.scheme = scheme_from_string(f.scheme);
  c.permutations = f.permutations;
  c.jobs = f.jobs;
  c.scale_targets = !f.no_target_scaling;
  if (f.preset.empty() && f.data.empty()) throw Error("give --preset or --data");
  if (f.preset.empty() && f.task.empty()) throw Error("--task is required with --data");
  c.validate();
  return c;
}

json config_json(const RunConfig &c) {
  return {{"data", c.data.filename().string()},
          {"targets", c.targets},
          {"task", to_string(c.task)},
          {"trees", c.n_trees},
          {"max_depth", c.max_depth},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"permutations", c.permutations},
          {"test_fraction", c.test_fraction},
          {"target_scaling", c.scale_targets}};
}

// Artifacts are held in memory and only written once the command succeeded.
using Outputs = std::map<std::string, std::string>;

void write_outputs(const fs::path &dir, const Outputs &files) {
  fs::create_directories(dir);
  for (const auto &[name, text] : files) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / name).string());
    os << text;
  }
}

SplitPlan plan_for(const Dataset &d, const RunConfig &c) {
  return make_splits(static_cast<std::size_t>(d.n_samples()), c.permutations, c.test_fraction,
                     c.seed);
}

int cmd_train(const Flags &f) {
  const RunConfig c = resolve(f);
  const Dataset data = load_dataset(c);
  const SchemeRun run = run_scheme(data, plan_for(data, c), c, c.scheme);
  // The saved model is refit on every row.
  const DjinnEnsemble full = build_and_train(data, ensemble_config(c, c.permutations));

  json report = {{"config", config_json(c)}, {"reports", {report_to_json(run.report)}}};
  report["config"]["scheme"] = to_string(c.scheme);
  Outputs out;
  out["report.json"] = report.dump(2) + "\n";
  out["ensemble.json"] = ensemble_to_json(full).dump() + "\n";
  out["cost_history_" + to_string(c.scheme) + ".csv"] = cost_curves_csv(run.cost_curves);
  write_outputs(f.out, out);
  std::cout << format_table({run.report});
  return 0;
}

int cmd_compare(const Flags &f) {
  const RunConfig c = resolve(f);
  const Dataset data = load_dataset(c);
  const SplitPlan plan = plan_for(data, c);
  std::vector<EvalReport> reports;
  Outputs out;
  json report = {{"config", config_json(c)}, {"reports", json::array()}};
  for (InitScheme s : {InitScheme::djinn, InitScheme::random_dense, InitScheme::random_sparse}) {
    SchemeRun run = run_scheme(data, plan, c, s);
    if (!reports.empty()) attach_pvalue(run.report, reports.front());
    out["cost_history_" + to_string(s) + ".csv"] = cost_curves_csv(run.cost_curves);
    report["reports"].push_back(report_to_json(run.report));
    reports.push_back(std::move(run.report));
  }
  out["report.json"] = report.dump(2) + "\n";
  write_outputs(f.out, out);
  std::cout << format_table(reports);
  return 0;
}

int cmd_sweep(const Flags &f, const std::vector<int> &counts) {
  RunConfig c = resolve(f);
  if (counts.empty()) throw Error("--counts is empty");
  for (int n : counts)
    if (n < 1) throw Error("tree counts must be at least 1");
  const Dataset data = load_dataset(c);
  if (c.task != Task::regression) throw Error("sweep-trees needs a regression data set");
  const auto rows = sweep_tree_count(data, counts, ensemble_config(c, 0), plan_for(data, c));
  write_outputs(f.out, {{"sweep.csv", sweep_csv(rows)}});
  std::cout << sweep_csv(rows);
  return 0;
}

int cmd_bayesopt(const Flags &f, int budget) {
  const RunConfig c = resolve(f);
  if (budget < 1) throw Error("--budget must be at least 1");
  const Dataset data = load_dataset(c);
  const BayesoptRun run = run_bayesopt(data, plan_for(data, c), c, budget);

  std::ostringstream trials;
  json best = json::array();
  for (std::size_t p = 0; p < run.searches.size(); ++p) {
    const auto &s = run.searches[p];
    std::string csv = trials_csv(s.trials);
    // Prefix each row with its permutation, keeping one header.
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    if (p == 0) trials << "permutation," << line << '\n';
    while (std::getline(lines, line)) trials << p << ',' << line << '\n';
    best.push_back({{"permutation", p},
                    {"widths", s.best.widths},
                    {"objective", s.best.objective},
                    {"surrogate_failures", s.surrogate_failures}});
  }
  json report = {{"config", config_json(c)},
                 {"budget", budget},
                 {"networks_trained", run.networks_trained},
                 {"reports", {report_to_json(run.djinn), report_to_json(run.searched)}}};
  write_outputs(f.out, {{"trials.csv", trials.str()},
                        {"best_architecture.json", best.dump(2) + "\n"},
                        {"report.json", report.dump(2) + "\n"}});
  std::cout << format_table({run.djinn, run.searched});
  std::cerr << "search " << run.search_seconds << " s, djinn " << run.djinn_seconds << " s\n";
  return 0;
}

int cmd_logic(std::uint64_t seed, int epochs, const std::string &dir) {
  if (epochs < 1) throw Error("--epochs must be at least 1");
  Outputs out;
  for (LogicGate g : {LogicGate::if_gate, LogicGate::or_gate, LogicGate::xor_gate}) {
    const Dataset table = truth_table(g);
    const LogicRun run = run_logic_gate(g, seed, epochs);
    const Matrix labels = predict(run.trained, table.features);
    const Matrix probs = softmax_rows(labels);
    std::cout << to_string(g) << " (" << run.correct << '/' << run.rows << ")\n";
    for (Eigen::Index i = 0; i < table.features.rows(); ++i) {
      std::cout << "  ";
      for (Eigen::Index j = 0; j < table.features.cols(); ++j)
        std::cout << table.features(i, j) << ' ';
      Eigen::Index arg = 0;
      probs.row(i).maxCoeff(&arg);
      std::cout << "-> " << arg << "  (want " << table.targets(i, 0) << ")\n";
    }
    out[to_string(g) + "_tree.dot"] = tree_to_dot(run.tree);
    out[to_string(g) + "_network.dot"] = network_to_dot(run.initial.net);
    out[to_string(g) + "_trained.dot"] = network_to_dot(run.trained);
  }
  write_outputs(dir, out);
  return 0;
}

int cmd_export_dot(const std::string &path, int member) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open model " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception &e) {
    throw Error("model is not valid JSON: " + std::string(e.what()));
  }
  if (j.contains("members")) {
    const DjinnEnsemble ens = ensemble_from_json(j);
    if (member < 0 || member >= static_cast<int>(ens.members.size()))
      throw Error("--member out of range");
    std::cout << network_to_dot(ens.members[static_cast<std::size_t>(member)]);
  } else if (j.contains("widths")) {
    std::cout << network_to_dot(network_from_json(j));
  } else if (j.contains("root")) {
    std::cout << tree_to_dot(tree_from_json(j));
  } else {
    throw Error("unrecognised model JSON");
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Decision trees mapped to warm-started neural networks"};
  app.require_subcommand(1);

  Flags train_f, compare_f, sweep_f, bo_f;
  auto *train = app.add_subcommand("train", "Cross-validate one scheme and save a model");
  add_run_flags(train, train_f, true);

  auto *compare = app.add_subcommand("compare", "DJINN against random dense and sparse inits");
  add_run_flags(compare, compare_f, false);

  std::vector<int> counts{1, 2, 5, 10, 20};
  auto *sweep = app.add_subcommand("sweep-trees", "Test MSE against ensemble size");
  add_run_flags(sweep, sweep_f, true);
  sweep->add_option("--counts", counts, "Tree counts")->delimiter(',');

  int budget = 100;
  auto *bo = app.add_subcommand("bayesopt", "Width search for dense networks");
  add_run_flags(bo, bo_f, false);
  bo->add_option("--budget", budget, "Trained candidates per permutation");

  std::uint64_t logic_seed = 0;
  int logic_epochs = 500;
  std::string logic_out = ".";
  auto *logic = app.add_subcommand("logic-demo", "Map and train IF, OR and XOR");
  logic->add_option("--seed", logic_seed, "Seed");
  logic->add_option("--epochs", logic_epochs, "Training epochs");
  logic->add_option("--out", logic_out, "Directory for DOT files");

  std::string model_path;
  int member = 0;
  auto *dot = app.add_subcommand("export-dot", "Print a saved model as DOT");
  dot->add_option("--model", model_path, "Ensemble, network or tree JSON")->required();
  dot->add_option("--member", member, "Ensemble member to draw");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    if (*train) return cmd_train(train_f);
    if (*compare) return cmd_compare(compare_f);
    if (*sweep) return cmd_sweep(sweep_f, counts);
    if (*bo) return cmd_bayesopt(bo_f, budget);
    if (*logic) return cmd_logic(logic_seed, logic_epochs, logic_out);
    if (*dot) return cmd_export_dot(model_path, member);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
