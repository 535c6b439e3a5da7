#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "djinn/data.hpp"

namespace djinn {

struct RegressionScores {
  double mse = 0.0;
  double mae = 0.0;
  double ev = 0.0;
};

struct ClassificationScores {
  double recall = 0.0;
  double precision = 0.0;
  double accuracy = 0.0;
};

/// MSE and MAE over every entry; explained variance 1 - Var(y - y_hat) / Var(y)
/// per target column, averaged.
RegressionScores regression_metrics(const Matrix &y_true, const Matrix &y_pred);

/// Accuracy plus macro-averaged recall and precision; a class with a zero
/// denominator contributes 0.
ClassificationScores classification_metrics(const std::vector<int> &y_true,
                                             const std::vector<int> &y_pred,
                                             int n_classes);

/// Two-sided pooled-variance Student's t-test.
double ttest_pvalue(const std::vector<double> &a, const std::vector<double> &b);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation (n - 1)
  std::vector<double> raw;
};

struct EvalReport {
  std::string model;
  Task task = Task::regression;
  /// Metric name -> summary, in the order given by metric_names(task).
  std::map<std::string, MetricSummary> metrics;
  /// p-value against the reference model, keyed by the reference name.
  std::map<std::string, double> pvalues;

  const MetricSummary &at(const std::string &name) const;
};

/// "mse", "mae", "ev" or "recall", "precision", "accuracy".
std::vector<std::string> metric_names(Task task);

/// The score a t-test compares: test MSE for regression, accuracy otherwise.
std::string comparison_metric(Task task);

/// Predictions for the test rows of one permutation. Regression returns
/// predicted targets (rows x n_targets); classification returns class
/// indices in a single column.
using ModelRunner = std::function<Matrix(const Dataset &train, const Dataset &test,
                                         std::size_t permutation)>;

EvalReport crossval_evaluate(const std::string &model, const ModelRunner &runner,
                             const Dataset &data, const SplitPlan &plan);

EvalReport summarize(const std::string &model, Task task,
                     const std::map<std::string, std::vector<double>> &raw);

/// Adds p-values against `reference` for the comparison metric.
void attach_pvalue(EvalReport &report, const EvalReport &reference);

nlohmann::json report_to_json(const EvalReport &report);

/// Aligned plain-text table, one row per model.
std::string format_table(const std::vector<EvalReport> &reports);

}  // namespace djinn
