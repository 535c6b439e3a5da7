#include "djinn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "djinn/error.hpp"

namespace djinn {

RegressionScores regression_metrics(const Matrix &y_true, const Matrix &y_pred) {
  if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols())
    throw Error("regression_metrics: shape mismatch");
  if (y_true.rows() < 2) throw Error("regression_metrics: need at least two samples");
  const Matrix resid = y_true - y_pred;
  RegressionScores s;
  s.mse = resid.squaredNorm() / static_cast<double>(resid.size());
  s.mae = resid.cwiseAbs().sum() / static_cast<double>(resid.size());
  double ev = 0.0;
  for (Eigen::Index k = 0; k < y_true.cols(); ++k) {
    auto variance = [](const auto &col) {
      return (col.array() - col.mean()).square().mean();
    };
    const double var_true = variance(y_true.col(k));
    if (!(var_true > 0.0))
      throw Error("regression_metrics: explained variance undefined for constant targets");
    ev += 1.0 - variance(resid.col(k)) / var_true;
  }
  s.ev = ev / static_cast<double>(y_true.cols());
  return s;
}

ClassificationScores classification_metrics(const std::vector<int> &y_true,
                                             const std::vector<int> &y_pred,
                                             int n_classes) {
  if (y_true.empty()) throw Error("classification_metrics: empty input");
  if (y_true.size() != y_pred.size())
    throw Error("classification_metrics: length mismatch");
  const auto k = static_cast<std::size_t>(n_classes);
  std::vector<double> tp(k, 0.0), actual(k, 0.0), predicted(k, 0.0);
  double correct = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes)
      throw Error("classification_metrics: label out of range");
    actual[static_cast<std::size_t>(t)] += 1.0;
    predicted[static_cast<std::size_t>(p)] += 1.0;
    if (t == p) {
      tp[static_cast<std::size_t>(t)] += 1.0;
      correct += 1.0;
    }
  }
  ClassificationScores s;
  for (std::size_t c = 0; c < k; ++c) {
    if (actual[c] > 0.0) s.recall += tp[c] / actual[c];
    if (predicted[c] > 0.0) s.precision += tp[c] / predicted[c];
  }
  s.recall /= static_cast<double>(k);
  s.precision /= static_cast<double>(k);
  s.accuracy = correct / static_cast<double>(y_true.size());
  return s;
}

double ttest_pvalue(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.size() < 2 || b.size() < 2) throw Error("ttest_pvalue: need two samples per group");
  auto mean = [](const std::vector<double> &v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  auto ss = [](const std::vector<double> &v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
  };
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a);
  const double mb = mean(b);
  const double df = na + nb - 2.0;
  const double pooled = (ss(a, ma) + ss(b, mb)) / df;
  const double diff = ma - mb;
  if (!(pooled > 0.0))
    return diff == 0.0 ? 1.0 : std::numeric_limits<double>::min();
  const double t = diff / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  if (t == 0.0) return 1.0;
  // Two-sided tail: P(|T| > t) = I_{df / (df + t^2)}(df / 2, 1 / 2).
  const double p = boost::math::ibeta(0.5 * df, 0.5, df / (df + t * t));
  return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

const MetricSummary &EvalReport::at(const std::string &name) const {
  const auto it = metrics.find(name);
  if (it == metrics.end()) throw Error("report has no metric '" + name + "'");
  return it->second;
}

std::vector<std::string> metric_names(Task task) {
  if (task == Task::regression) return {"mse", "mae", "ev"};
  return {"recall", "precision", "accuracy"};
}

std::string comparison_metric(Task task) {
  return task == Task::regression ? "mse" : "accuracy";
}

EvalReport summarize(const std::string &model, Task task,
                     const std::map<std::string, std::vector<double>> &raw) {
  EvalReport report;
  report.model = model;
  report.task = task;
  for (const auto &[name, values] : raw) {
    MetricSummary m;
    m.raw = values;
    const double n = static_cast<double>(values.size());
    m.mean = values.empty() ? 0.0 : std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    report.metrics[name] = std::move(m);
  }
  return report;
}

EvalReport crossval_evaluate(const std::string &model, const ModelRunner &runner,
                             const Dataset &data, const SplitPlan &plan) {
  if (plan.permutations.empty()) throw Error("crossval_evaluate: empty split plan");
  std::map<std::string, std::vector<double>> raw;
  for (std::size_t p = 0; p < plan.permutations.size(); ++p) {
    const auto &perm = plan.permutations[p];
    const Dataset train = data.subset(perm.train);
    const Dataset test = data.subset(perm.test);
    const Matrix pred = runner(train, test, p);
    if (data.task == Task::regression) {
      const auto s = regression_metrics(test.targets, pred);
      raw["mse"].push_back(s.mse);
      raw["mae"].push_back(s.mae);
      raw["ev"].push_back(s.ev);
    } else {
      std::vector<int> labels(static_cast<std::size_t>(pred.rows()));
      for (Eigen::Index i = 0; i < pred.rows(); ++i)
        labels[static_cast<std::size_t>(i)] = static_cast<int>(pred(i, 0));
      const auto s = classification_metrics(test.class_indices(), labels, data.n_classes);
      raw["recall"].push_back(s.recall);
      raw["precision"].push_back(s.precision);
      raw["accuracy"].push_back(s.accuracy);
    }
  }
  return summarize(model, data.task, raw);
}

void attach_pvalue(EvalReport &report, const EvalReport &reference) {
  const std::string key = comparison_metric(report.task);
  report.pvalues[reference.model] =
      ttest_pvalue(report.at(key).raw, reference.at(key).raw);
}

nlohmann::json report_to_json(const EvalReport &report) {
  nlohmann::json j;
  j["model"] = report.model;
  j["task"] = to_string(report.task);
  for (const auto &name : metric_names(report.task)) {
    const auto it = report.metrics.find(name);
    if (it == report.metrics.end()) continue;
    j["metrics"][name] = {{"mean", it->second.mean},
                          {"std", it->second.std},
                          {"raw", it->second.raw}};
  }
  for (const auto &[ref, p] : report.pvalues) j["pvalues"][ref] = p;
  return j;
}

std::string format_table(const std::vector<EvalReport> &reports) {
  if (reports.empty()) return {};
  const Task task = reports.front().task;
  const auto names = metric_names(task);
  const int name_width = static_cast<int>(std::max_element(reports.begin(), reports.end(),
      [](const auto &a, const auto &b) { return a.model.size() < b.model.size(); })
      ->model.size()) + 2;
  std::ostringstream os;
  os << std::left << std::setw(std::max(name_width, 8)) << "Model";
  for (const auto &n : names) os << std::setw(22) << n;
  os << "p\n";
  for (const auto &r : reports) {
    os << std::left << std::setw(std::max(name_width, 8)) << r.model;
    for (const auto &n : names) {
      std::ostringstream cell;
      cell << std::setprecision(4) << r.at(n).mean << " +- " << r.at(n).std;
      os << std::setw(22) << cell.str();
    }
    if (!r.pvalues.empty()) os << std::setprecision(4) << r.pvalues.begin()->second;
    os << '\n';
  }
  return os.str();
}

}  // namespace djinn
