#include "triage/learn.hpp"

#include "triage/common.hpp"

#include <algorithm>
#include <numeric>

namespace triage::learn {

namespace {

double sparse_dot(const RowView &a, const RowView &b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.index.size() && j < b.index.size()) {
    if (a.index[i] == b.index[j])
      s += a.value[i++] * b.value[j++];
    else if (a.index[i] < b.index[j])
      ++i;
    else
      ++j;
  }
  return s;
}

double sq_norm(const RowView &a) {
  double s = 0.0;
  for (double v : a.value)
    s += v * v;
  return s;
}

} // namespace

KnnModel fit_knn(const Dataset &data, std::size_t k) {
  data.validate();
  if (data.size() == 0)
    fail(ErrorCode::InvalidArgument, "cannot fit k-NN on an empty dataset");
  if (k == 0)
    fail(ErrorCode::InvalidArgument, "k must be at least 1");
  KnnModel m;
  m.k = std::min(k, data.size());
  m.n_classes = data.n_classes;
  m.X = data.X;
  m.y = data.y;
  for (std::size_t i = 0; i < data.size(); ++i)
    m.sq_norms.push_back(sq_norm(data.X.row(i)));
  return m;
}

std::vector<double> KnnModel::predict_proba(const RowView &x) const {
  const double xx = sq_norm(x);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    dist.emplace_back(std::max(0.0, xx + sq_norms[i] - 2.0 * sparse_dot(x, X.row(i))), i);
  auto kk = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  std::vector<double> p(n_classes, 0.0);
  for (std::size_t j = 0; j < kk; ++j)
    p[static_cast<std::size_t>(y[dist[j].second])] += 1.0 / static_cast<double>(kk);
  return p;
}

} // namespace triage::learn
