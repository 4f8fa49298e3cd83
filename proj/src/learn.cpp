#include "triage/learn.hpp"

#include "triage/common.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace triage::learn {

using nlohmann::json;

ClassWeights ClassWeights::compute(std::span<const int> y, std::size_t n_classes) {
  std::vector<double> freq(n_classes, 0.0);
  for (int c : y) {
    if (c < 0 || static_cast<std::size_t>(c) >= n_classes)
      fail(ErrorCode::InvalidArgument, "label " + std::to_string(c) + " out of range");
    freq[static_cast<std::size_t>(c)] += 1.0;
  }
  ClassWeights cw;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (freq[c] == 0.0)
      fail(ErrorCode::InvalidArgument, "class " + std::to_string(c) + " is absent from the training labels");
    cw.w.push_back(static_cast<double>(y.size()) / freq[c]);
  }
  return cw;
}

ClassWeights ClassWeights::priority_override(int i) {
  if (i < 1 || i > 9)
    fail(ErrorCode::InvalidArgument, "class-weight override index must be in [1, 9]");
  ClassWeights cw;
  cw.w.resize(kPriorityClassCount);
  cw.w[static_cast<std::size_t>(PriorityClass::High)] = 0.1 * i;
  cw.w[static_cast<std::size_t>(PriorityClass::Low)] = 0.1 * (10 - i);
  return cw;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best])
      best = i;
  return best;
}

double median(std::vector<double> values) {
  if (values.empty())
    return 0.0;
  std::sort(values.begin(), values.end());
  auto n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::optional<RankField> parse_rank_field(std::string_view s) {
  if (s == "created_at")
    return RankField::CreatedAt;
  if (s == "updated_at")
    return RankField::UpdatedAt;
  if (s == "comments")
    return RankField::Comments;
  return std::nullopt;
}

std::string_view to_string(RankField f) {
  switch (f) {
  case RankField::CreatedAt: return "created_at";
  case RankField::UpdatedAt: return "updated_at";
  case RankField::Comments: return "comments";
  }
  return "?";
}

std::vector<PriorityClass> rank_baseline(std::span<const IssueRecord> issues, RankField field) {
  std::vector<double> v;
  v.reserve(issues.size());
  for (const auto &i : issues) {
    switch (field) {
    case RankField::Comments:
      v.push_back(static_cast<double>(i.comments.size()));
      break;
    case RankField::CreatedAt:
      v.push_back(static_cast<double>(i.created_at.time_since_epoch().count()));
      break;
    case RankField::UpdatedAt:
      v.push_back(static_cast<double>(i.updated_at.value_or(i.created_at).time_since_epoch().count()));
      break;
    }
  }
  return rank_by_median(v, field == RankField::CreatedAt);
}

std::vector<PriorityClass> rank_by_median(std::span<const double> values, bool low_is_high) {
  double m = median(std::vector<double>(values.begin(), values.end()));
  std::vector<PriorityClass> out;
  for (double x : values) {
    bool high = low_is_high ? x < m : x > m;
    out.push_back(high ? PriorityClass::High : PriorityClass::Low);
  }
  return out;
}

std::string_view to_string(ModelKind k) {
  switch (k) {
  case ModelKind::Keyword: return "keyword";
  case ModelKind::NaiveBayes: return "nb";
  case ModelKind::LogReg: return "logreg";
  case ModelKind::Forest: return "forest";
  case ModelKind::Knn: return "knn";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::Keyword, ModelKind::NaiveBayes, ModelKind::LogReg, ModelKind::Forest,
                 ModelKind::Knn})
    if (to_string(k) == s)
      return k;
  if (s == "rf" || s == "random_forest")
    return ModelKind::Forest;
  return std::nullopt;
}

namespace {

double hp_or(const Hyperparams &hp, const char *key, double fallback) {
  auto it = hp.find(key);
  return it == hp.end() ? fallback : it->second;
}

std::size_t hp_count(const Hyperparams &hp, const char *key, std::size_t fallback) {
  double v = hp_or(hp, key, static_cast<double>(fallback));
  if (!(v >= 0.0) || !std::isfinite(v))
    fail(ErrorCode::InvalidArgument, std::string("hyperparameter '") + key + "' must be a non-negative integer");
  return static_cast<std::size_t>(std::llround(v));
}

} // namespace

Estimator train_estimator(ModelKind kind, const Dataset &data, const ClassWeights &cw,
                          const Hyperparams &hp, std::uint64_t seed) {
  switch (kind) {
  case ModelKind::NaiveBayes:
    return fit_multinomial_nb(data, hp_or(hp, "alpha", 1.0));
  case ModelKind::LogReg: {
    LogRegParams p;
    p.learning_rate = hp_or(hp, "learning_rate", p.learning_rate);
    p.l2 = hp_or(hp, "l2", p.l2);
    p.epochs = hp_count(hp, "epochs", p.epochs);
    return fit_logreg(data, cw, p, seed);
  }
  case ModelKind::Forest: {
    ForestParams p;
    p.n_trees = hp_count(hp, "n_trees", p.n_trees);
    p.max_depth = hp_count(hp, "max_depth", p.max_depth);
    p.min_leaf = hp_count(hp, "min_leaf", p.min_leaf);
    p.max_features = hp_count(hp, "max_features", p.max_features);
    if (p.max_features == 0 && hp.count("mtry_factor")) {
      double base = std::floor(std::sqrt(static_cast<double>(data.X.cols())));
      p.max_features = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(base * hp.at("mtry_factor"))));
    }
    p.bootstrap = hp_or(hp, "bootstrap", 1.0) != 0.0;
    p.threads = hp_count(hp, "threads", p.threads);
    return fit_random_forest(data, cw, p, seed);
  }
  case ModelKind::Knn:
    return fit_knn(data, hp_count(hp, "k", 5));
  case ModelKind::Keyword:
    break;
  }
  fail(ErrorCode::InvalidArgument, "the keyword baseline is not a trainable estimator");
}

std::vector<double> predict_proba(const Estimator &m, const RowView &x) {
  return std::visit([&x](const auto &model) { return model.predict_proba(x); }, m);
}

ModelKind kind_of(const Estimator &m) {
  switch (m.index()) {
  case 0: return ModelKind::NaiveBayes;
  case 1: return ModelKind::LogReg;
  case 2: return ModelKind::Forest;
  default: return ModelKind::Knn;
  }
}

std::size_t n_features_of(const Estimator &m) {
  if (auto *k = std::get_if<KnnModel>(&m))
    return k->X.cols();
  return std::visit(
      [](const auto &model) -> std::size_t {
        if constexpr (requires { model.n_features; })
          return model.n_features;
        else
          return 0;
      },
      m);
}

// --- serialization ----------------------------------------------------------

namespace {

json sparse_to_json(const RowView &r) {
  return {std::vector<std::uint32_t>(r.index.begin(), r.index.end()),
          std::vector<double>(r.value.begin(), r.value.end())};
}

SparseVector sparse_from_json(const json &j) {
  return {j.at(0).get<std::vector<std::uint32_t>>(), j.at(1).get<std::vector<double>>()};
}

json tree_to_json(const Tree &t) {
  std::vector<std::int32_t> feature, left, right;
  std::vector<double> threshold;
  std::vector<std::uint32_t> leaf;
  for (const auto &n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    leaf.push_back(n.leaf);
  }
  json imp = json::array();
  for (std::size_t f = 0; f < t.importance.size(); ++f)
    if (t.importance[f] != 0.0)
      imp.push_back({f, t.importance[f]});
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"leaf", leaf},           {"leaf_probs", t.leaf_probs},
          {"importance", imp}};
}

Tree tree_from_json(const json &j, std::size_t n_features, std::size_t n_classes) {
  Tree t;
  auto feature = j.at("feature").get<std::vector<std::int32_t>>();
  auto threshold = j.at("threshold").get<std::vector<double>>();
  auto left = j.at("left").get<std::vector<std::int32_t>>();
  auto right = j.at("right").get<std::vector<std::int32_t>>();
  auto leaf = j.at("leaf").get<std::vector<std::uint32_t>>();
  t.leaf_probs = j.at("leaf_probs").get<std::vector<double>>();
  const auto n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || leaf.size() != n)
    fail(ErrorCode::Schema, "forest tree arrays are inconsistent");
  for (std::size_t i = 0; i < n; ++i) {
    TreeNode node{feature[i], threshold[i], left[i], right[i], leaf[i]};
    if (node.feature >= 0) {
      auto ok = [n, i](std::int32_t c) { return c > static_cast<std::int32_t>(i) && c < static_cast<std::int32_t>(n); };
      if (static_cast<std::size_t>(node.feature) >= n_features || !ok(node.left) || !ok(node.right))
        fail(ErrorCode::Schema, "forest tree node out of range");
    } else if (static_cast<std::size_t>(node.leaf) + n_classes > t.leaf_probs.size()) {
      fail(ErrorCode::Schema, "forest leaf out of range");
    }
    t.nodes.push_back(node);
  }
  t.importance.assign(n_features, 0.0);
  for (const auto &e : j.at("importance")) {
    auto f = e.at(0).get<std::size_t>();
    if (f >= n_features)
      fail(ErrorCode::Schema, "forest importance index out of range");
    t.importance[f] = e.at(1).get<double>();
  }
  return t;
}

} // namespace

json estimator_to_json(const Estimator &m) {
  json j;
  j["kind"] = std::string(to_string(kind_of(m)));
  if (auto *nb = std::get_if<NaiveBayesModel>(&m)) {
    j["n_classes"] = nb->n_classes;
    j["n_features"] = nb->n_features;
    j["alpha"] = nb->alpha;
    j["class_count"] = nb->class_count;
    j["log_likelihood"] = nb->log_likelihood;
  } else if (auto *lr = std::get_if<LogRegModel>(&m)) {
    j["n_classes"] = lr->n_classes;
    j["n_features"] = lr->n_features;
    j["weights"] = lr->weights;
    j["bias"] = lr->bias;
    j["loss_history"] = lr->loss_history;
  } else if (auto *rf = std::get_if<ForestModel>(&m)) {
    j["n_classes"] = rf->n_classes;
    j["n_features"] = rf->n_features;
    json trees = json::array();
    for (const auto &t : rf->trees)
      trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
  } else if (auto *kn = std::get_if<KnnModel>(&m)) {
    j["n_classes"] = kn->n_classes;
    j["n_features"] = kn->X.cols();
    j["k"] = kn->k;
    json rows = json::array();
    for (std::size_t i = 0; i < kn->y.size(); ++i)
      rows.push_back(sparse_to_json(kn->X.row(i)));
    j["rows"] = std::move(rows);
    j["labels"] = kn->y;
  }
  return j;
}

Estimator estimator_from_json(const json &j) {
  try {
    auto kind = parse_model_kind(j.at("kind").get<std::string>());
    auto K = j.at("n_classes").get<std::size_t>();
    auto d = j.at("n_features").get<std::size_t>();
    if (!kind || kind == ModelKind::Keyword)
      fail(ErrorCode::Schema, "unknown estimator kind");
    switch (*kind) {
    case ModelKind::NaiveBayes: {
      NaiveBayesModel m;
      m.n_classes = K;
      m.n_features = d;
      m.alpha = j.at("alpha").get<double>();
      m.class_count = j.at("class_count").get<std::vector<double>>();
      m.log_likelihood = j.at("log_likelihood").get<std::vector<double>>();
      if (m.class_count.size() != K || m.log_likelihood.size() != K * d)
        fail(ErrorCode::Schema, "naive Bayes parameter shape mismatch");
      double n = 0.0;
      for (double c : m.class_count)
        n += c;
      for (double c : m.class_count)
        m.log_prior.push_back(c > 0.0 ? std::log(c / n) : -std::numeric_limits<double>::infinity());
      return m;
    }
    case ModelKind::LogReg: {
      LogRegModel m;
      m.n_classes = K;
      m.n_features = d;
      m.weights = j.at("weights").get<std::vector<double>>();
      m.bias = j.at("bias").get<std::vector<double>>();
      m.loss_history = j.at("loss_history").get<std::vector<double>>();
      if (m.weights.size() != K * d || m.bias.size() != K)
        fail(ErrorCode::Schema, "logistic regression parameter shape mismatch");
      return m;
    }
    case ModelKind::Forest: {
      ForestModel m;
      m.n_classes = K;
      m.n_features = d;
      for (const auto &t : j.at("trees"))
        m.trees.push_back(tree_from_json(t, d, K));
      if (m.trees.empty())
        fail(ErrorCode::Schema, "forest has no trees");
      return m;
    }
    case ModelKind::Knn: {
      KnnModel m;
      m.n_classes = K;
      m.k = j.at("k").get<std::size_t>();
      m.X = CsrMatrix(d);
      for (const auto &r : j.at("rows")) {
        auto v = sparse_from_json(r);
        m.X.add_row(v);
        double s = 0.0;
        for (double x : v.value)
          s += x * x;
        m.sq_norms.push_back(s);
      }
      m.y = j.at("labels").get<std::vector<int>>();
      if (m.y.size() != m.X.rows())
        fail(ErrorCode::Schema, "k-NN rows and labels differ in length");
      return m;
    }
    case ModelKind::Keyword:
      break;
    }
  } catch (const json::exception &e) {
    fail(ErrorCode::Schema, std::string("estimator: ") + e.what());
  }
  fail(ErrorCode::Schema, "unknown estimator kind");
}

} // namespace triage::learn
