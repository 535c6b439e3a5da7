#include "djinn/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "djinn/error.hpp"

namespace djinn {

std::vector<int> Network::widths() const {
  std::vector<int> out;
  out.push_back(n_inputs());
  for (const auto &w : weights) out.push_back(static_cast<int>(w.rows()));
  return out;
}

std::vector<int> Network::hidden_widths() const {
  auto w = widths();
  return {w.begin() + 1, w.end() - 1};
}

void Network::validate() const {
  if (weights.empty()) throw Error("network has no layers");
  if (weights.size() != biases.size()) throw Error("weights/biases layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != biases[l].size())
      throw Error("bias length does not match layer width");
    if (l > 0 && weights[l].cols() != weights[l - 1].rows())
      throw Error("weight shape chain is broken");
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw Error("network has non-finite parameters");
  }
}

Loss default_loss(Task task) {
  return task == Task::classification ? Loss::softmax_xent : Loss::mse;
}

void TrainingConfig::validate(Eigen::Index n_train) const {
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (batch_size < 1 || batch_size > n_train)
    throw Error("batch size must lie in [1, n_train]");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0))
    throw Error("invalid Adam constants");
}

namespace {

void check_input(const Network &net, const Matrix &features) {
  if (features.cols() != net.n_inputs())
    throw Error("network input width does not match feature count");
  if (!features.allFinite()) throw Error("non-finite network input");
}

}  // namespace

Matrix forward(const Network &net, const Matrix &features) {
  check_input(net, features);
  Matrix a = features.transpose();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix z = net.weights[l] * a;
    z.colwise() += net.biases[l];
    if (l + 1 < net.weights.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a.transpose();
}

namespace {

// Cost and d(cost)/d(output) for a batch of outputs laid out one column per sample.
double output_cost(const Matrix &out, const Matrix &targets, Loss loss, Matrix *grad) {
  const auto batch = static_cast<double>(out.cols());
  if (loss == Loss::mse) {
    if (targets.cols() != out.rows())
      throw Error("MSE targets must have one column per output");
    Matrix diff = out - targets.transpose();
    if (grad) *grad = (2.0 / batch) * diff;
    return diff.squaredNorm() / batch;
  }
  if (targets.cols() != 1) throw Error("cross-entropy targets must be class indices");
  double cost = 0.0;
  if (grad) grad->resize(out.rows(), out.cols());
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    const double label = targets(i, 0);
    if (!(label >= 0.0 && label < static_cast<double>(out.rows())))
      throw Error("class index out of range for the output layer");
    const auto y = static_cast<Eigen::Index>(label);
    const double top = out.col(i).maxCoeff();
    const Vector e = (out.col(i).array() - top).exp();
    const double sum = e.sum();
    cost += top + std::log(sum) - out(y, i);
    if (grad) {
      grad->col(i) = e / sum;
      (*grad)(y, i) -= 1.0;
    }
  }
  if (grad) *grad /= batch;
  return cost / batch;
}

}  // namespace

Gradients loss_and_gradient(const Network &net, const Matrix &features,
                            const Matrix &targets, Loss loss) {
  if (features.rows() == 0) throw Error("empty batch");
  if (features.rows() != targets.rows()) throw Error("batch feature/target row mismatch");
  check_input(net, features);
  const std::size_t depth = net.weights.size();
  std::vector<Matrix> acts(depth + 1);
  acts[0] = features.transpose();
  for (std::size_t l = 0; l < depth; ++l) {
    acts[l + 1] = net.weights[l] * acts[l];
    acts[l + 1].colwise() += net.biases[l];
    if (l + 1 < depth) acts[l + 1] = acts[l + 1].cwiseMax(0.0);
  }

  Gradients g;
  Matrix delta;
  g.cost = output_cost(acts[depth], targets, loss, &delta);
  g.weights.resize(depth);
  g.biases.resize(depth);
  for (std::size_t l = depth; l-- > 0;) {
    g.weights[l].noalias() = delta * acts[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Matrix back = net.weights[l].transpose() * delta;
    // ReLU derivative, taken as 0 at exactly 0.
    delta = (acts[l].array() > 0.0).select(back, 0.0);
  }
  return g;
}

double loss_value(const Network &net, const Matrix &features, const Matrix &targets,
                  Loss loss) {
  if (features.rows() != targets.rows()) throw Error("feature/target row mismatch");
  const Matrix out = forward(net, features).transpose();
  return output_cost(out, targets, loss, nullptr);
}

Adam::Adam(const Network &net, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    mw_.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
    vw_.push_back(mw_.back());
    mb_.push_back(Vector::Zero(net.biases[l].size()));
    vb_.push_back(mb_.back());
  }
}

void Adam::step(Network &net, const Gradients &grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto &param, auto &m, auto &v, const auto &g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    update(net.weights[l], mw_[l], vw_[l], grad.weights[l]);
    update(net.biases[l], mb_[l], vb_[l], grad.biases[l]);
  }
}

TrainResult train(Network net, const Matrix &features, const Matrix &targets,
                  const TrainingConfig &config, std::optional<Monitor> monitor) {
  net.validate();
  config.validate(features.rows());
  if (features.rows() != targets.rows()) throw Error("feature/target row mismatch");

  const auto n = static_cast<std::size_t>(features.rows());
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.shuffle_seed);
  Adam adam(net, config.learning_rate, config.beta1, config.beta2, config.epsilon);

  TrainResult result;
  Matrix xb;
  Matrix yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const auto rows = static_cast<Eigen::Index>(stop - start);
      xb.resize(rows, features.cols());
      yb.resize(rows, targets.cols());
      for (Eigen::Index i = 0; i < rows; ++i) {
        xb.row(i) = features.row(order[start + static_cast<std::size_t>(i)]);
        yb.row(i) = targets.row(order[start + static_cast<std::size_t>(i)]);
      }
      const Gradients g = loss_and_gradient(net, xb, yb, config.loss);
      if (!std::isfinite(g.cost)) {
        std::ostringstream msg;
        msg << "training diverged: non-finite cost in epoch " << epoch + 1;
        throw Error(msg.str());
      }
      adam.step(net, g);
      total += g.cost;
      ++batches;
    }
    result.history.train.push_back(total / batches);
    if (monitor && monitor->features)
      result.history.test.push_back(
          loss_value(net, *monitor->features, *monitor->targets, config.loss));
  }
  net.validate();
  result.net = std::move(net);
  return result;
}

Matrix softmax_rows(const Matrix &logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Eigen::RowVectorXd e = (logits.row(i).array() - logits.row(i).maxCoeff()).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

Matrix predict(const Network &net, const Matrix &features) {
  Matrix out = forward(net, features);
  return net.task == Task::classification ? softmax_rows(out) : out;
}

nlohmann::json network_to_json(const Network &net) {
  nlohmann::json j;
  j["widths"] = net.widths();
  j["task"] = to_string(net.task);
  auto &ws = j["weights"] = nlohmann::json::array();
  auto &bs = j["biases"] = nlohmann::json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(net.weights[l].size()));
    for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c)
        flat.push_back(net.weights[l](r, c));
    ws.push_back(std::move(flat));
    bs.push_back(std::vector<double>(net.biases[l].data(),
                                     net.biases[l].data() + net.biases[l].size()));
  }
  return j;
}

Network network_from_json(const nlohmann::json &j) {
  const auto widths = j.at("widths").get<std::vector<int>>();
  const auto &ws = j.at("weights");
  const auto &bs = j.at("biases");
  if (widths.size() < 2 || ws.size() != widths.size() - 1 || bs.size() != ws.size())
    throw Error("model JSON: layer counts are inconsistent");
  Network net;
  net.task = task_from_string(j.at("task").get<std::string>());
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto flat = ws[l].get<std::vector<double>>();
    const auto bias = bs[l].get<std::vector<double>>();
    const int rows = widths[l + 1];
    const int cols = widths[l];
    if (flat.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) ||
        bias.size() != static_cast<std::size_t>(rows))
      throw Error("model JSON: array size does not match widths");
    Matrix w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        w(r, c) = flat[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                       static_cast<std::size_t>(c)];
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::Map<const Vector>(bias.data(), rows));
  }
  net.validate();
  return net;
}

std::string cost_history_csv(const CostHistory &history) {
  std::ostringstream os;
  os.precision(17);
  const bool with_test = history.test.size() == history.train.size() && !history.test.empty();
  os << "epoch,cost" << (with_test ? ",test_cost" : "") << '\n';
  for (std::size_t e = 0; e < history.train.size(); ++e) {
    os << e + 1 << ',' << history.train[e];
    if (with_test) os << ',' << history.test[e];
    os << '\n';
  }
  return os.str();
}

}  // namespace djinn
