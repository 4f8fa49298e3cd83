#include "triage/learn.hpp"

#include "triage/common.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace triage::learn {

namespace {

void softmax_row(const RowView &x, std::span<const double> W, std::span<const double> b,
                 std::size_t K, std::size_t d, std::vector<double> &out) {
  out.assign(K, 0.0);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < K; ++c) {
    double z = b[c];
    for (std::size_t k = 0; k < x.index.size(); ++k)
      if (x.index[k] < d)
        z += W[c * d + x.index[k]] * x.value[k];
    out[c] = z;
    best = std::max(best, z);
  }
  double sum = 0.0;
  for (auto &z : out) {
    z = std::exp(z - best);
    sum += z;
  }
  for (auto &z : out)
    z /= sum;
}

double loss_only(const Dataset &data, const ClassWeights &cw, double l2, std::span<const double> W,
                 std::span<const double> b) {
  const std::size_t K = data.n_classes, d = data.X.cols();
  double loss = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto row = data.X.row(i);
    // log-sum-exp directly; avoids log(0) for confident rows
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> z(K);
    for (std::size_t c = 0; c < K; ++c) {
      z[c] = b[c];
      for (std::size_t k = 0; k < row.index.size(); ++k)
        z[c] += W[c * d + row.index[k]] * row.value[k];
      best = std::max(best, z[c]);
    }
    double s = 0.0;
    for (double v : z)
      s += std::exp(v - best);
    double w = cw.of(data.y[i]);
    loss += w * (best + std::log(s) - z[static_cast<std::size_t>(data.y[i])]);
    wsum += w;
  }
  double reg = 0.0;
  for (double v : W)
    reg += v * v;
  return (wsum > 0.0 ? loss / wsum : 0.0) + 0.5 * l2 * reg;
}

} // namespace

LossAndGradient logreg_loss_and_gradient(const Dataset &data, const ClassWeights &cw, double l2,
                                         std::span<const double> W, std::span<const double> b) {
  const std::size_t K = data.n_classes, d = data.X.cols();
  if (W.size() != K * d || b.size() != K || cw.w.size() != K)
    fail(ErrorCode::InvalidArgument, "logistic regression parameter shape mismatch");
  LossAndGradient out;
  out.grad_weights.assign(K * d, 0.0);
  out.grad_bias.assign(K, 0.0);
  double wsum = 0.0;
  for (int c : data.y)
    wsum += cw.of(c);
  std::vector<double> p;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto row = data.X.row(i);
    softmax_row(row, W, b, K, d, p);
    double w = cw.of(data.y[i]) / wsum;
    for (std::size_t c = 0; c < K; ++c) {
      double g = w * (p[c] - (static_cast<std::size_t>(data.y[i]) == c ? 1.0 : 0.0));
      out.grad_bias[c] += g;
      for (std::size_t k = 0; k < row.index.size(); ++k)
        out.grad_weights[c * d + row.index[k]] += g * row.value[k];
    }
  }
  for (std::size_t j = 0; j < W.size(); ++j)
    out.grad_weights[j] += l2 * W[j];
  out.loss = loss_only(data, cw, l2, W, b);
  return out;
}

LogRegModel fit_logreg(const Dataset &data, const ClassWeights &cw, const LogRegParams &hp,
                       std::uint64_t seed) {
  data.validate();
  if (data.size() == 0)
    fail(ErrorCode::InvalidArgument, "cannot fit logistic regression on an empty dataset");
  if (cw.w.size() != data.n_classes)
    fail(ErrorCode::InvalidArgument, "class weights do not match the class count");
  if (!(hp.learning_rate > 0.0) || !(hp.l2 >= 0.0))
    fail(ErrorCode::InvalidArgument, "learning rate must be positive and l2 non-negative");
  const std::size_t K = data.n_classes, d = data.X.cols();
  LogRegModel m;
  m.n_classes = K;
  m.n_features = d;
  m.weights.resize(K * d);
  m.bias.assign(K, 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> init(0.0, 0.01);
  for (auto &w : m.weights)
    w = init(rng);

  auto current = logreg_loss_and_gradient(data, cw, hp.l2, m.weights, m.bias);
  if (!std::isfinite(current.loss))
    fail(ErrorCode::Numeric, "logistic regression loss is not finite");
  double lr = hp.learning_rate;
  std::vector<double> W2(m.weights.size()), b2(K);
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    m.loss_history.push_back(current.loss);
    bool moved = false;
    // halve the step until the loss does not increase
    for (int attempt = 0; attempt < 40; ++attempt) {
      for (std::size_t j = 0; j < W2.size(); ++j)
        W2[j] = m.weights[j] - lr * current.grad_weights[j];
      for (std::size_t c = 0; c < K; ++c)
        b2[c] = m.bias[c] - lr * current.grad_bias[c];
      double trial = loss_only(data, cw, hp.l2, W2, b2);
      if (std::isnan(trial))
        fail(ErrorCode::Numeric, "logistic regression loss became NaN at epoch " +
                                     std::to_string(epoch) + "; lower the learning rate");
      if (std::isfinite(trial) && trial <= current.loss) {
        moved = true;
        break;
      }
      lr *= 0.5;
    }
    if (!moved)
      break;
    m.weights.swap(W2);
    m.bias.swap(b2);
    current = logreg_loss_and_gradient(data, cw, hp.l2, m.weights, m.bias);
    W2.resize(m.weights.size());
    b2.resize(K);
  }
  m.loss_history.push_back(current.loss);
  return m;
}

std::vector<double> LogRegModel::predict_proba(const RowView &x) const {
  std::vector<double> p;
  softmax_row(x, weights, bias, n_classes, n_features, p);
  return p;
}

} // namespace triage::learn
