#include "triage/learn.hpp"

#include "triage/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <mutex>
#include <thread>

namespace triage::learn {

double gini(std::span<const double> class_weights) {
  double total = 0.0, sq = 0.0;
  for (double w : class_weights)
    total += w;
  if (total <= 0.0)
    return 0.0;
  for (double w : class_weights)
    sq += (w / total) * (w / total);
  return 1.0 - sq;
}

namespace {

struct Split {
  std::uint32_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
  bool found = false;
};

struct Entry {
  std::uint32_t feature;
  double value;
  std::uint32_t row;
};

class TreeBuilder {
public:
  TreeBuilder(const Dataset &data, std::vector<double> weight, std::vector<double> count,
              const ForestParams &hp, std::uint64_t seed)
      : data_(data), weight_(std::move(weight)), count_(std::move(count)), hp_(hp), rng_(seed),
        K_(data.n_classes), scratch_(data.size(), 0.0) {
    const auto d = data.X.cols();
    mtry_ = hp.max_features ? hp.max_features
                            : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                                           std::sqrt(static_cast<double>(d)))));
    tree_.importance.assign(d, 0.0);
  }

  Tree build() {
    std::vector<std::uint32_t> root;
    for (std::uint32_t i = 0; i < data_.size(); ++i)
      if (count_[i] > 0.0)
        root.push_back(i);
    struct Task {
      std::int32_t node;
      std::vector<std::uint32_t> rows;
      std::size_t depth;
    };
    std::vector<Task> stack;
    tree_.nodes.emplace_back();
    stack.push_back({0, std::move(root), 0});
    while (!stack.empty()) {
      Task t = std::move(stack.back());
      stack.pop_back();
      std::vector<double> totals(K_, 0.0);
      double n = 0.0;
      for (auto r : t.rows) {
        totals[static_cast<std::size_t>(data_.y[r])] += weight_[r];
        n += count_[r];
      }
      Split s;
      bool pure = std::count_if(totals.begin(), totals.end(), [](double w) { return w > 0.0; }) <= 1;
      bool depth_ok = hp_.max_depth == 0 || t.depth < hp_.max_depth;
      if (!pure && depth_ok && n >= 2.0 * static_cast<double>(hp_.min_leaf))
        s = best_split(t.rows, totals);
      if (!s.found) {
        make_leaf(t.node, totals);
        continue;
      }
      tree_.importance[s.feature] += s.gain;
      std::vector<std::uint32_t> left, right;
      partition(t.rows, s, left, right);
      auto l = static_cast<std::int32_t>(tree_.nodes.size());
      tree_.nodes.emplace_back();
      auto r = static_cast<std::int32_t>(tree_.nodes.size());
      tree_.nodes.emplace_back();
      auto &node = tree_.nodes[static_cast<std::size_t>(t.node)];
      node.feature = static_cast<std::int32_t>(s.feature);
      node.threshold = s.threshold;
      node.left = l;
      node.right = r;
      stack.push_back({r, std::move(right), t.depth + 1});
      stack.push_back({l, std::move(left), t.depth + 1});
    }
    return std::move(tree_);
  }

private:
  void make_leaf(std::int32_t node, const std::vector<double> &totals) {
    double sum = 0.0;
    for (double w : totals)
      sum += w;
    auto &nd = tree_.nodes[static_cast<std::size_t>(node)];
    nd.feature = -1;
    nd.leaf = static_cast<std::uint32_t>(tree_.leaf_probs.size());
    for (double w : totals)
      tree_.leaf_probs.push_back(sum > 0.0 ? w / sum : 1.0 / static_cast<double>(K_));
  }

  // Features that are zero for every row in the node cannot split it, so only
  // features present in some row are candidates; they are visited in random
  // order until mtry non-constant ones have been evaluated.
  Split best_split(const std::vector<std::uint32_t> &rows, const std::vector<double> &totals) {
    entries_.clear();
    for (auto r : rows) {
      auto row = data_.X.row(r);
      for (std::size_t k = 0; k < row.index.size(); ++k)
        if (row.value[k] != 0.0)
          entries_.push_back({row.index[k], row.value[k], r});
    }
    std::sort(entries_.begin(), entries_.end(), [](const Entry &a, const Entry &b) {
      return a.feature != b.feature ? a.feature < b.feature
                                    : (a.value != b.value ? a.value < b.value : a.row < b.row);
    });
    struct Range {
      std::uint32_t feature;
      std::size_t begin, end;
    };
    std::vector<Range> candidates;
    for (std::size_t i = 0; i < entries_.size();) {
      std::size_t j = i;
      while (j < entries_.size() && entries_[j].feature == entries_[i].feature)
        ++j;
      candidates.push_back({entries_[i].feature, i, j});
      i = j;
    }

    double node_count = 0.0;
    for (auto r : rows)
      node_count += count_[r];
    double node_weight = 0.0;
    for (double w : totals)
      node_weight += w;
    const double parent = node_weight * gini(totals);

    Split best;
    std::size_t evaluated = 0;
    for (std::size_t i = 0; i < candidates.size() && evaluated < mtry_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[pick(rng_)]);
      const auto &c = candidates[i];
      bool informative = false;
      auto s = evaluate(c.feature, c.begin, c.end, rows.size(), totals, node_count, node_weight,
                        parent, informative);
      if (!informative)
        continue;
      ++evaluated;
      if (s.found && (!best.found || s.gain > best.gain))
        best = s;
    }
    if (best.found && best.gain <= 1e-12 * std::max(1.0, parent))
      best.found = false;
    return best;
  }

  Split evaluate(std::uint32_t feature, std::size_t begin, std::size_t end, std::size_t n_rows,
                 const std::vector<double> &totals, double node_count, double node_weight,
                 double parent, bool &informative) {
    // value groups in ascending order with the implicit zeros inserted
    struct Group {
      double value;
      std::vector<double> w;
      double count;
    };
    std::vector<Group> groups;
    std::vector<double> zero_w = totals;
    double zero_count = node_count;
    for (std::size_t k = begin; k < end; ++k) {
      zero_w[static_cast<std::size_t>(data_.y[entries_[k].row])] -= weight_[entries_[k].row];
      zero_count -= count_[entries_[k].row];
    }
    bool zeros_present = (end - begin) < n_rows;
    bool zero_inserted = false;
    auto push_zero = [&] {
      if (zeros_present && !zero_inserted) {
        for (auto &w : zero_w)
          w = std::max(0.0, w);
        groups.push_back({0.0, zero_w, zero_count});
      }
      zero_inserted = true;
    };
    for (std::size_t k = begin; k < end; ++k) {
      const auto &e = entries_[k];
      if (e.value > 0.0)
        push_zero();
      if (groups.empty() || groups.back().value != e.value)
        groups.push_back({e.value, std::vector<double>(K_, 0.0), 0.0});
      groups.back().w[static_cast<std::size_t>(data_.y[e.row])] += weight_[e.row];
      groups.back().count += count_[e.row];
    }
    push_zero();
    informative = groups.size() >= 2;
    Split best;
    if (!informative)
      return best;

    std::vector<double> left(K_, 0.0), right(K_);
    double left_count = 0.0, left_weight = 0.0;
    const auto min_leaf = static_cast<double>(hp_.min_leaf);
    for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
      for (std::size_t c = 0; c < K_; ++c) {
        left[c] += groups[g].w[c];
        left_weight += groups[g].w[c];
      }
      left_count += groups[g].count;
      double right_count = node_count - left_count;
      if (left_count < min_leaf || right_count < min_leaf)
        continue;
      for (std::size_t c = 0; c < K_; ++c)
        right[c] = std::max(0.0, totals[c] - left[c]);
      double right_weight = node_weight - left_weight;
      double gain = parent - left_weight * gini(left) - right_weight * gini(right);
      if (!best.found || gain > best.gain) {
        double lo = groups[g].value, hi = groups[g + 1].value;
        double mid = lo + (hi - lo) / 2.0;
        best = {feature, (mid < hi) ? mid : lo, gain, true};
      }
    }
    return best;
  }

  void partition(const std::vector<std::uint32_t> &rows, const Split &s,
                 std::vector<std::uint32_t> &left, std::vector<std::uint32_t> &right) {
    for (const auto &e : entries_)
      if (e.feature == s.feature)
        scratch_[e.row] = e.value;
    for (auto r : rows)
      (scratch_[r] <= s.threshold ? left : right).push_back(r);
    for (const auto &e : entries_)
      if (e.feature == s.feature)
        scratch_[e.row] = 0.0;
  }

  const Dataset &data_;
  std::vector<double> weight_;
  std::vector<double> count_;
  const ForestParams &hp_;
  std::mt19937_64 rng_;
  std::size_t K_;
  std::size_t mtry_ = 1;
  std::vector<double> scratch_;
  std::vector<Entry> entries_;
  Tree tree_;
};

Tree grow_tree(const Dataset &data, const ClassWeights &cw, const ForestParams &hp,
               std::uint64_t seed) {
  const std::size_t n = data.size();
  std::vector<double> weight(n), count(n);
  std::mt19937_64 rng(seed);
  if (hp.bootstrap) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i)
      p[i] = cw.of(data.y[i]);
    std::discrete_distribution<std::size_t> draw(p.begin(), p.end());
    for (std::size_t k = 0; k < n; ++k)
      count[draw(rng)] += 1.0;
    weight = count;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      count[i] = 1.0;
      weight[i] = cw.of(data.y[i]);
    }
  }
  TreeBuilder b(data, std::move(weight), std::move(count), hp, rng());
  return b.build();
}

} // namespace

ForestModel fit_random_forest(const Dataset &data, const ClassWeights &cw, const ForestParams &hp,
                              std::uint64_t seed) {
  data.validate();
  if (data.size() == 0)
    fail(ErrorCode::InvalidArgument, "cannot fit a forest on an empty dataset");
  std::vector<bool> seen(data.n_classes, false);
  for (int c : data.y)
    seen[static_cast<std::size_t>(c)] = true;
  if (std::count(seen.begin(), seen.end(), true) < 2)
    fail(ErrorCode::InvalidArgument, "a forest needs at least two classes in the training data");
  if (cw.w.size() != data.n_classes)
    fail(ErrorCode::InvalidArgument, "class weights do not match the class count");
  if (hp.n_trees == 0 || hp.min_leaf == 0)
    fail(ErrorCode::InvalidArgument, "forest needs at least one tree and min_leaf >= 1");

  ForestModel m;
  m.n_classes = data.n_classes;
  m.n_features = data.X.cols();
  m.trees.resize(hp.n_trees);
  std::size_t threads = hp.threads ? hp.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, hp.n_trees);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      auto t = next.fetch_add(1);
      if (t >= hp.n_trees)
        return;
      try {
        m.trees[t] = grow_tree(data, cw, hp, mix_seed(seed, t));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i)
      pool.emplace_back(worker);
    for (auto &th : pool)
      th.join();
  }
  if (error)
    std::rethrow_exception(error);
  return m;
}

const double *Tree::leaf_distribution(const RowView &x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto &n = nodes[i];
    i = static_cast<std::size_t>(x.at(static_cast<std::uint32_t>(n.feature)) <= n.threshold ? n.left
                                                                                            : n.right);
  }
  return leaf_probs.data() + nodes[i].leaf;
}

std::vector<double> ForestModel::predict_proba(const RowView &x) const {
  std::vector<double> p(n_classes, 0.0);
  for (const auto &t : trees) {
    const double *leaf = t.leaf_distribution(x);
    for (std::size_t c = 0; c < n_classes; ++c)
      p[c] += leaf[c];
  }
  double sum = 0.0;
  for (double v : p)
    sum += v;
  for (auto &v : p)
    v = sum > 0.0 ? v / sum : 1.0 / static_cast<double>(n_classes);
  return p;
}

std::vector<double> ForestModel::feature_importance() const {
  std::vector<double> out(n_features, 0.0);
  std::size_t used = 0;
  for (const auto &t : trees) {
    double total = 0.0;
    for (double v : t.importance)
      total += v;
    if (!(total > 0.0))
      continue;
    ++used;
    for (std::size_t f = 0; f < t.importance.size() && f < n_features; ++f)
      out[f] += t.importance[f] / total;
  }
  double sum = 0.0;
  for (double v : out)
    sum += v;
  if (used > 0 && sum > 0.0)
    for (auto &v : out)
      v /= sum;
  return out;
}

} // namespace triage::learn
