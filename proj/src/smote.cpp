#include "triage/learn.hpp"

#include "triage/common.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace triage::learn {

namespace {

double sq_distance(const SparseVector &a, const SparseVector &b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.nnz() || j < b.nnz()) {
    double d;
    if (j == b.nnz() || (i < a.nnz() && a.index[i] < b.index[j]))
      d = a.value[i++];
    else if (i == a.nnz() || b.index[j] < a.index[i])
      d = b.value[j++];
    else
      d = a.value[i++] - b.value[j++];
    s += d * d;
  }
  return s;
}

SparseVector interpolate(const SparseVector &x, const SparseVector &nn, double lambda) {
  SparseVector out;
  std::size_t i = 0, j = 0;
  while (i < x.nnz() || j < nn.nnz()) {
    std::uint32_t idx;
    double a = 0.0, b = 0.0;
    if (j == nn.nnz() || (i < x.nnz() && x.index[i] < nn.index[j])) {
      idx = x.index[i];
      a = x.value[i++];
    } else if (i == x.nnz() || nn.index[j] < x.index[i]) {
      idx = nn.index[j];
      b = nn.value[j++];
    } else {
      idx = x.index[i];
      a = x.value[i++];
      b = nn.value[j++];
    }
    double v = a + lambda * (b - a);
    if (v != 0.0) {
      out.index.push_back(idx);
      out.value.push_back(v);
    }
  }
  return out;
}

} // namespace

std::vector<std::size_t> nearest_neighbors(std::span<const SparseVector> rows, std::size_t i,
                                           std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t j = 0; j < rows.size(); ++j)
    if (j != i)
      d.emplace_back(sq_distance(rows[i], rows[j]), j);
  k = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < k; ++j)
    out.push_back(d[j].second);
  return out;
}

SmoteResult smote(std::span<const SparseVector> minority, std::size_t majority_count, std::size_t k,
                  std::uint64_t seed) {
  if (minority.size() < 2)
    fail(ErrorCode::InvalidArgument, "SMOTE needs at least two minority samples");
  if (k == 0)
    fail(ErrorCode::InvalidArgument, "SMOTE needs k >= 1");
  k = std::min(k, minority.size() - 1);
  SmoteResult out;
  if (majority_count <= minority.size())
    return out;
  std::vector<std::vector<std::size_t>> nn(minority.size());
  for (std::size_t i = 0; i < minority.size(); ++i)
    nn[i] = nearest_neighbors(minority, i, k);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_base(0, minority.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_nn(0, k - 1);
  std::uniform_real_distribution<double> lambda(0.0, 1.0);
  const auto needed = majority_count - minority.size();
  for (std::size_t g = 0; g < needed; ++g) {
    auto base = pick_base(rng);
    auto neighbor = nn[base][pick_nn(rng)];
    double l = lambda(rng);
    out.points.push_back(interpolate(minority[base], minority[neighbor], l));
    out.origins.push_back({base, neighbor, l});
  }
  return out;
}

Dataset smote_balance(const Dataset &data, std::size_t k, std::uint64_t seed) {
  data.validate();
  std::map<int, std::vector<SparseVector>> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto r = data.X.row(i);
    by_class[data.y[i]].push_back(
        {std::vector<std::uint32_t>(r.index.begin(), r.index.end()),
         std::vector<double>(r.value.begin(), r.value.end())});
  }
  std::size_t largest = 0;
  for (const auto &[c, rows] : by_class)
    largest = std::max(largest, rows.size());

  Dataset out{data.X, data.y, data.n_classes};
  for (const auto &[c, rows] : by_class) {
    if (rows.size() == largest)
      continue;
    auto res = smote(rows, largest, k, mix_seed(seed, static_cast<std::uint64_t>(c)));
    for (auto &p : res.points) {
      out.X.add_row(p);
      out.y.push_back(c);
    }
  }
  return out;
}

} // namespace triage::learn
