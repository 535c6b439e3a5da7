#include "djinn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "djinn/error.hpp"

namespace djinn {

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool parse_real(const std::string &text, double &out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char *begin = t.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

}  // namespace

std::string to_string(Task task) {
  return task == Task::regression ? "regression" : "classification";
}

Task task_from_string(const std::string &name) {
  if (name == "regression") return Task::regression;
  if (name == "classification") return Task::classification;
  throw Error("unknown task '" + name + "'");
}

int Dataset::n_outputs() const {
  return task == Task::classification ? n_classes
                                      : static_cast<int>(targets.cols());
}

Dataset Dataset::subset(const std::vector<std::size_t> &rows) const {
  Dataset out;
  out.task = task;
  out.n_classes = n_classes;
  out.feature_names = feature_names;
  out.class_labels = class_labels;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()), targets.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= static_cast<std::size_t>(n_samples()))
      throw Error("subset row index out of range");
    const auto r = static_cast<Eigen::Index>(rows[i]);
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
    out.targets.row(static_cast<Eigen::Index>(i)) = targets.row(r);
  }
  return out;
}

std::vector<int> Dataset::class_indices() const {
  std::vector<int> out(static_cast<std::size_t>(targets.rows()));
  for (Eigen::Index i = 0; i < targets.rows(); ++i)
    out[static_cast<std::size_t>(i)] = static_cast<int>(targets(i, 0));
  return out;
}

Dataset load_csv(const std::filesystem::path &path,
                 const std::vector<std::string> &target_columns, Task task) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open data file " + path.string());
  if (target_columns.empty()) throw Error("no target column given");
  if (task == Task::classification && target_columns.size() != 1)
    throw Error("classification needs exactly one target column");

  std::string line;
  if (!std::getline(in, line) || trim(line).empty())
    throw Error("empty data file " + path.string());
  std::vector<std::string> header = split_csv_line(line);
  for (auto &h : header) h = trim(h);

  std::vector<int> target_pos;
  for (const auto &name : target_columns) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("missing target column '" + name + "'");
    target_pos.push_back(static_cast<int>(it - header.begin()));
  }
  std::vector<int> feature_pos;
  Dataset ds;
  ds.task = task;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (std::find(target_pos.begin(), target_pos.end(), c) != target_pos.end())
      continue;
    feature_pos.push_back(c);
    ds.feature_names.push_back(header[static_cast<std::size_t>(c)]);
  }

  std::vector<std::vector<double>> feature_rows;
  std::vector<std::vector<double>> target_rows;
  std::unordered_map<std::string, int> class_of;
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "row " << row << " has " << cells.size() << " cells, expected "
          << header.size();
      throw Error(msg.str());
    }
    auto numeric = [&](int c) {
      double v = 0.0;
      if (!parse_real(cells[static_cast<std::size_t>(c)], v)) {
        std::ostringstream msg;
        msg << "non-numeric cell at row " << row << ", column "
            << header[static_cast<std::size_t>(c)];
        throw Error(msg.str());
      }
      return v;
    };
    std::vector<double> f;
    f.reserve(feature_pos.size());
    for (int c : feature_pos) f.push_back(numeric(c));
    std::vector<double> t;
    if (task == Task::classification) {
      const std::string label = trim(cells[static_cast<std::size_t>(target_pos[0])]);
      auto [it, inserted] =
          class_of.emplace(label, static_cast<int>(ds.class_labels.size()));
      if (inserted) ds.class_labels.push_back(label);
      t.push_back(it->second);
    } else {
      for (int c : target_pos) t.push_back(numeric(c));
    }
    feature_rows.push_back(std::move(f));
    target_rows.push_back(std::move(t));
  }
  if (feature_rows.empty()) throw Error("empty data file " + path.string());
  if (feature_rows.size() < 2) throw Error("need at least two samples");

  const auto n = static_cast<Eigen::Index>(feature_rows.size());
  ds.features.resize(n, static_cast<Eigen::Index>(feature_pos.size()));
  ds.targets.resize(n, static_cast<Eigen::Index>(target_rows[0].size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &f = feature_rows[static_cast<std::size_t>(i)];
    const auto &t = target_rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j)
      ds.features(i, j) = f[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < ds.targets.cols(); ++j)
      ds.targets(i, j) = t[static_cast<std::size_t>(j)];
  }
  ds.n_classes = static_cast<int>(ds.class_labels.size());
  return ds;
}

ScalingParams fit_scaler(const Matrix &train) {
  if (train.rows() == 0) throw Error("fit_scaler: empty input");
  return {train.colwise().minCoeff().transpose(),
          train.colwise().maxCoeff().transpose()};
}

Matrix apply_scaler(const Matrix &x, const ScalingParams &params) {
  if (x.cols() != params.min.size())
    throw Error("apply_scaler: dimension mismatch");
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double range = params.max(j) - params.min(j);
    if (range > 0.0)
      out.col(j) = (x.col(j).array() - params.min(j)) / range;
    else
      out.col(j).setZero();
  }
  return out;
}

Matrix invert_scaler(const Matrix &scaled, const ScalingParams &params) {
  if (scaled.cols() != params.min.size())
    throw Error("invert_scaler: dimension mismatch");
  Matrix out(scaled.rows(), scaled.cols());
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double range = params.max(j) - params.min(j);
    out.col(j) = scaled.col(j).array() * range + params.min(j);
  }
  return out;
}

SplitPlan make_splits(std::size_t n_samples, int n_permutations,
                      double test_fraction, std::uint64_t seed) {
  if (n_samples < 2) throw Error("make_splits: need at least two samples");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error("make_splits: test fraction must lie in (0, 1)");
  if (n_permutations < 1) throw Error("make_splits: need a permutation");

  auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n_samples)));
  n_test = std::clamp<std::size_t>(n_test, 1, n_samples - 1);

  SplitPlan plan;
  plan.seed = seed;
  plan.test_fraction = test_fraction;
  for (int p = 0; p < n_permutations; ++p) {
    std::vector<std::size_t> idx(n_samples);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(p));
    std::shuffle(idx.begin(), idx.end(), rng);
    SplitPlan::Permutation perm;
    perm.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    perm.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    std::sort(perm.test.begin(), perm.test.end());
    std::sort(perm.train.begin(), perm.train.end());
    plan.permutations.push_back(std::move(perm));
  }
  return plan;
}

void to_json(nlohmann::json &j, const ScalingParams &p) {
  j = {{"min", std::vector<double>(p.min.data(), p.min.data() + p.min.size())},
       {"max", std::vector<double>(p.max.data(), p.max.data() + p.max.size())}};
}

void from_json(const nlohmann::json &j, ScalingParams &p) {
  const auto lo = j.at("min").get<std::vector<double>>();
  const auto hi = j.at("max").get<std::vector<double>>();
  if (lo.size() != hi.size()) throw Error("scaler JSON: min/max length mismatch");
  p.min = Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  p.max = Eigen::Map<const Vector>(hi.data(), static_cast<Eigen::Index>(hi.size()));
}

void to_json(nlohmann::json &j, const SplitPlan &plan) {
  j = nlohmann::json{{"seed", plan.seed}, {"test_fraction", plan.test_fraction}};
  auto &perms = j["permutations"] = nlohmann::json::array();
  for (const auto &p : plan.permutations)
    perms.push_back({{"train", p.train}, {"test", p.test}});
}

void from_json(const nlohmann::json &j, SplitPlan &plan) {
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.test_fraction = j.value("test_fraction", 0.2);
  plan.permutations.clear();
  for (const auto &p : j.at("permutations"))
    plan.permutations.push_back({p.at("train").get<std::vector<std::size_t>>(),
                                 p.at("test").get<std::vector<std::size_t>>()});
}

}  // namespace djinn
