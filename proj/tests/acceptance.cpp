// Acceptance checks. `acceptance <id>` runs one criterion, `acceptance all`
// runs every one; each prints a single PASS/FAIL line and the exit code is
// nonzero if any check failed.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "djinn/experiment.hpp"
#include "djinn/logic.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace djinn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

const fs::path data_dir = DJINN_DATA_DIR;

RunConfig preset(const std::string &name) { return preset_config(name, data_dir); }

// --- 1 ---------------------------------------------------------------------

Outcome mapping_golden() {
  const auto t0 = clock_type::now();
  const DecisionTree tree = oracle::figure_tree();
  const TreeTopology topo = analyze_topology(tree);
  const InitializedNetwork m = map_tree(tree, topo, 3, 2, 0);

  using Cells = std::set<std::pair<int, int>>;
  auto cells = [](const Matrix &w, bool unity) {
    Cells out;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        if (w(r, c) != 0.0 && (w(r, c) == 1.0) == unity)
          out.insert({static_cast<int>(r), static_cast<int>(c)});
    return out;
  };
  const std::vector<Cells> want_unity = {{{0, 0}, {2, 2}}, {}, {}};
  const std::vector<Cells> want_sampled = {
      {{3, 0}, {3, 1}}, {{0, 0}, {4, 0}, {4, 3}, {5, 2}, {5, 3}}, {{0, 0}, {0, 4}, {1, 4}, {0, 5}, {1, 5}}};
  bool pattern = m.net.weights.size() == 3;
  for (std::size_t l = 0; pattern && l < 3; ++l)
    pattern = cells(m.net.weights[l], true) == want_unity[l] &&
              cells(m.net.weights[l], false) == want_sampled[l];
  const bool widths = m.arch.hidden == std::vector<int>{4, 6};
  const double t = seconds_since(t0);
  return {widths && pattern && t < 1.0,
          "widths " + std::string(widths ? "(4, 6)" : "wrong") + ", pattern " +
              (pattern ? "exact" : "differs") + ", " + fmt(t, 2) + " s"};
}

// --- 2 ---------------------------------------------------------------------

Outcome logic_gates() {
  const auto t0 = clock_type::now();
  std::ostringstream misses;
  int solved = 0, total = 0;
  for (LogicGate g : {LogicGate::if_gate, LogicGate::or_gate, LogicGate::xor_gate}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const LogicRun r = run_logic_gate(g, seed, 500);
      ++total;
      if (r.correct == r.rows)
        ++solved;
      else
        misses << ' ' << to_string(g) << "@" << seed << "(" << r.correct << "/" << r.rows << ")";
    }
  }
  const double t = seconds_since(t0);
  return {solved == total && t < 30.0,
          std::to_string(solved) + "/" + std::to_string(total) + " gate-seeds solved" +
              (solved < total ? "; failed:" + misses.str() : "") + ", " + fmt(t, 3) + " s"};
}

// --- 3, 4, 5, 6 ------------------------------------------------------------

SplitPlan plan_for(const RunConfig &c, const Dataset &d) {
  return make_splits(static_cast<std::size_t>(d.n_samples()), c.permutations, c.test_fraction, c.seed);
}

Outcome classification_preset(const std::string &name, double min_accuracy, double max_seconds) {
  const auto t0 = clock_type::now();
  const RunConfig c = preset(name);
  const Dataset d = load_dataset(c);
  const SchemeRun r = run_scheme(d, plan_for(c, d), c, InitScheme::djinn);
  const double t = seconds_since(t0);
  const auto &acc = r.report.at("accuracy");
  return {acc.mean >= min_accuracy && t < max_seconds,
          name + " accuracy " + fmt(acc.mean) + " +- " + fmt(acc.std, 3) + " (need >= " +
              fmt(min_accuracy) + "), " + fmt(t, 3) + " s (limit " + fmt(max_seconds) + ")"};
}

Outcome regression_preset(const RunConfig &c, const Dataset &d, const std::string &name,
                          double min_ev, double max_mae, double max_mse, double max_seconds) {
  const auto t0 = clock_type::now();
  const SchemeRun r = run_scheme(d, plan_for(c, d), c, InitScheme::djinn);
  const double t = seconds_since(t0);
  const double ev = r.report.at("ev").mean, mae = r.report.at("mae").mean, mse = r.report.at("mse").mean;
  const bool ok = ev >= min_ev && mae <= max_mae && mse <= max_mse && t < max_seconds;
  std::string limits = "need EV >= " + fmt(min_ev);
  if (std::isfinite(max_mae)) limits += ", MAE <= " + fmt(max_mae);
  if (std::isfinite(max_mse)) limits += ", MSE <= " + fmt(max_mse);
  return {ok, name + " EV " + fmt(ev) + ", MAE " + fmt(mae) + ", MSE " + fmt(mse) + " (" + limits +
                  "), " + fmt(t, 3) + " s (limit " + fmt(max_seconds) + ")"};
}

constexpr double inf = std::numeric_limits<double>::infinity();

Outcome boston() {
  const RunConfig c = preset("boston");
  return regression_preset(c, load_dataset(c), "boston", 0.85, 2.5, inf, 300);
}

Outcome diabetes() {
  const RunConfig c = preset("diabetes");
  return regression_preset(c, load_dataset(c), "diabetes", 0.30, inf, inf, 300);
}

std::optional<Dataset> ca_housing(RunConfig &c, std::string &why) {
  c = preset("ca-housing");
  if (!fs::exists(c.data)) {
    why = "dataset unavailable: " + c.data.string() + " does not exist";
    return std::nullopt;
  }
  return load_dataset(c);
}

Outcome california() {
  RunConfig c;
  std::string why;
  const auto d = ca_housing(c, why);
  if (!d) return {false, why};
  return regression_preset(c, *d, "ca-housing (" + std::to_string(d->n_samples()) + " rows)", 0.78,
                           inf, 0.28, 1800);
}

Outcome warm_start() {
  RunConfig c;
  std::string why;
  const auto d = ca_housing(c, why);
  if (!d) return {false, why};
  const SplitPlan plan = plan_for(c, *d);
  const auto djinn = run_scheme(*d, plan, c, InitScheme::djinn).cost_curves;
  const auto dense = run_scheme(*d, plan, c, InitScheme::random_dense).cost_curves;
  const auto sparse = run_scheme(*d, plan, c, InitScheme::random_sparse).cost_curves;
  int first = 0, last = 0;
  for (std::size_t p = 0; p < djinn.size(); ++p) {
    first += djinn[p].front() < dense[p].front() && djinn[p].front() < sparse[p].front();
    last += djinn[p].back() <= sparse[p].back();
  }
  return {first >= 4 && last >= 4,
          "epoch-1 cost below both random inits in " + std::to_string(first) +
              "/5, final cost <= random_sparse in " + std::to_string(last) + "/5 (need 4/5 each)"};
}

Outcome ensemble_trend() {
  std::string detail;
  bool ok = true;
  for (const char *name : {"boston", "diabetes"}) {
    const RunConfig c = preset(name);
    const Dataset d = load_dataset(c);
    const auto rows = sweep_tree_count(d, {1, 10}, ensemble_config(c, 0), plan_for(c, d));
    int below = 0;
    for (double v : rows[1].normalized_mse.raw) below += v < 1.0;
    ok = ok && below == static_cast<int>(rows[1].normalized_mse.raw.size());
    detail += std::string(detail.empty() ? "" : "; ") + name + " MSE(10)/MSE(1) mean " +
              fmt(rows[1].normalized_mse.mean) + ", below 1 in " + std::to_string(below) + "/" +
              std::to_string(rows[1].normalized_mse.raw.size());
  }
  return {ok, detail};
}

// --- 7, 8 ------------------------------------------------------------------

Outcome statistics() {
  const auto check = oracle::ttest_against_oracle(50, 7, &ttest_pvalue);
  const double p = ttest_pvalue({1, 2, 3, 4, 5}, {2, 3, 4, 5, 6});
  return {check.cases == 50 && check.worst < 1e-6 && std::abs(p - 0.347) < 1e-3,
          "max |p - oracle| over 50 cases " + fmt(check.worst, 3) + " (need < 1e-6); textbook p " +
              fmt(p, 6) + " (need 0.347 +- 1e-3)"};
}

Outcome gradients() {
  const double worst = oracle::gradient_check_sweep();
  return {worst < 1e-5, "max relative error " + fmt(worst, 3) + " over 20 shapes x 2 losses (need < 1e-5)"};
}

// --- 9 ---------------------------------------------------------------------

Outcome bayesian_optimizer() {
  OptimizerConfig oc;
  oc.budget = 30;
  const SearchResult quad = optimize(
      [](const std::vector<int> &w, std::uint64_t) { return std::pow(w[0] - 10.0, 2); },
      SearchSpace{{2}, {30}}, oc);
  const bool quad_ok = quad.best.widths == std::vector<int>{10};

  const RunConfig c = preset("iris");
  const Dataset d = load_dataset(c);
  const BayesoptRun run = run_bayesopt(d, plan_for(c, d), c, 100);
  bool budget_ok = run.searches.size() == static_cast<std::size_t>(c.permutations) &&
                   run.networks_trained == 100 * c.permutations;
  for (const auto &s : run.searches) budget_ok = budget_ok && s.trials.size() == 100;
  const double dj = run.djinn.at("accuracy").mean, bo = run.searched.at("accuracy").mean;
  const bool acc_ok = std::abs(dj - bo) <= 0.03;
  const double per_search = run.search_seconds / c.permutations;
  const double per_build = run.djinn_seconds / c.permutations;
  const bool cost_ok = per_search > per_build;
  return {quad_ok && budget_ok && acc_ok && cost_ok,
          std::string("quadratic argmin ") + std::to_string(quad.best.widths[0]) +
              "; trained per search " + std::to_string(run.networks_trained / c.permutations) +
              "; iris accuracy bayesopt " + fmt(bo) + " vs djinn " + fmt(dj) +
              " (need within 0.03); search " + fmt(per_search, 3) + " s vs one DJINN build " +
              fmt(per_build, 3) + " s"};
}

// --- 10 --------------------------------------------------------------------

Outcome sparse_baseline() {
  const auto check = oracle::sparse_budget_property(200, 2);
  return {check.failures == 0 && check.architectures == 200,
          std::to_string(check.architectures) + " architectures, " + std::to_string(check.layers) +
              " layers, " + std::to_string(check.failures) + " violations" +
              (check.failures ? " (first: " + check.first_failure + ")" : "")};
}

struct Criterion {
  std::string id;
  std::string title;
  std::function<Outcome()> run;
};

const std::vector<Criterion> &criteria() {
  static const std::vector<Criterion> all = {
      {"1", "mapping golden test", mapping_golden},
      {"2", "logic gates", logic_gates},
      {"3a", "iris preset", [] { return classification_preset("iris", 0.95, 120); }},
      {"3b", "wine preset", [] { return classification_preset("wine", 0.95, 600); }},
      {"3c", "breast cancer preset", [] { return classification_preset("breast-cancer", 0.94, 600); }},
      {"3d", "digits preset", [] { return classification_preset("digits", 0.95, 600); }},
      {"4a", "boston preset", boston},
      {"4b", "california housing preset", california},
      {"4c", "diabetes preset", diabetes},
      {"5", "warm start", warm_start},
      {"6", "ensemble trend", ensemble_trend},
      {"7", "t-test", statistics},
      {"8", "gradient check", gradients},
      {"9", "bayesian optimizer", bayesian_optimizer},
      {"10", "sparse baseline", sparse_baseline},
  };
  return all;
}

}  // namespace

int main(int argc, char **argv) {
  const std::string want = argc > 1 ? argv[1] : "all";
  int failed = 0, ran = 0;
  for (const auto &c : criteria()) {
    if (want != "all" && want != c.id) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << c.id << " (" << c.title << "): " << (o.pass ? "PASS" : "FAIL")
              << " - " << o.detail << std::endl;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion '" << want << "'\n";
    return 2;
  }
  return failed ? 1 : 0;
}
