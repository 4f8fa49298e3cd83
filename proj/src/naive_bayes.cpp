#include "triage/learn.hpp"

#include "triage/common.hpp"

#include <cmath>
#include <limits>

namespace triage::learn {

void Dataset::validate() const {
  if (X.rows() != y.size())
    fail(ErrorCode::InvalidArgument, "dataset has " + std::to_string(X.rows()) + " rows but " +
                                         std::to_string(y.size()) + " labels");
  if (n_classes == 0)
    fail(ErrorCode::InvalidArgument, "dataset needs at least one class");
  for (int c : y)
    if (c < 0 || static_cast<std::size_t>(c) >= n_classes)
      fail(ErrorCode::InvalidArgument, "label " + std::to_string(c) + " out of range");
}

NaiveBayesModel fit_multinomial_nb(const Dataset &data, double alpha) {
  data.validate();
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    fail(ErrorCode::InvalidArgument, "smoothing alpha must be positive");
  if (data.size() == 0)
    fail(ErrorCode::InvalidArgument, "cannot fit naive Bayes on an empty dataset");
  const std::size_t K = data.n_classes, d = data.X.cols();
  NaiveBayesModel m;
  m.n_classes = K;
  m.n_features = d;
  m.alpha = alpha;
  m.class_count.assign(K, 0.0);
  std::vector<double> feature_totals(K * d, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto c = static_cast<std::size_t>(data.y[i]);
    m.class_count[c] += 1.0;
    auto row = data.X.row(i);
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      double v = row.value[k];
      if (v < 0.0 || !std::isfinite(v))
        fail(ErrorCode::InvalidArgument, "naive Bayes needs non-negative finite features (row " +
                                             std::to_string(i) + ")");
      feature_totals[c * d + row.index[k]] += v;
    }
  }
  const double n = static_cast<double>(data.size());
  m.log_prior.resize(K);
  m.log_likelihood.resize(K * d);
  for (std::size_t c = 0; c < K; ++c) {
    m.log_prior[c] = m.class_count[c] > 0.0 ? std::log(m.class_count[c] / n)
                                            : -std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t f = 0; f < d; ++f)
      total += feature_totals[c * d + f];
    double denom = total + alpha * static_cast<double>(d);
    for (std::size_t f = 0; f < d; ++f)
      m.log_likelihood[c * d + f] = std::log((feature_totals[c * d + f] + alpha) / denom);
  }
  return m;
}

std::vector<double> NaiveBayesModel::predict_proba(const RowView &x) const {
  std::vector<double> score(n_classes);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n_classes; ++c) {
    double s = log_prior[c];
    if (std::isfinite(s))
      for (std::size_t k = 0; k < x.index.size(); ++k) {
        if (x.index[k] >= n_features)
          continue;
        s += x.value[k] * log_likelihood[c * n_features + x.index[k]];
      }
    score[c] = s;
    best = std::max(best, s);
  }
  double z = 0.0;
  for (auto &s : score) {
    s = std::isfinite(s) ? std::exp(s - best) : 0.0;
    z += s;
  }
  for (auto &s : score)
    s /= z;
  return score;
}

} // namespace triage::learn
