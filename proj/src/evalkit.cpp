#include "triage/evalkit.hpp"

#include "triage/common.hpp"
#include "triage/corpus.hpp"
#include "triage/features.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

namespace triage::eval {

using nlohmann::json;

BinaryMetrics metrics(const BinaryCounts &c) {
  BinaryMetrics m;
  auto ratio = [](std::size_t num, std::size_t den, bool &flag) {
    if (den == 0) {
      flag = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(c.tp, c.tp + c.fp, m.precision_undefined);
  m.recall = ratio(c.tp, c.tp + c.fn, m.recall_undefined);
  m.accuracy = ratio(c.tp + c.tn, c.total(), m.accuracy_undefined);
  if (m.precision + m.recall > 0.0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  else
    m.f1_undefined = true;
  return m;
}

ConfusionMatrix ConfusionMatrix::from_pairs(std::span<const int> truth, std::span<const int> predicted,
                                            std::size_t n_classes) {
  if (truth.size() != predicted.size())
    fail(ErrorCode::InvalidArgument, "truth and prediction lengths differ");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i)
    cm.add(truth[i], predicted[i]);
  return cm;
}

void ConfusionMatrix::add(int truth, int predicted) {
  if (truth < 0 || predicted < 0 || static_cast<std::size_t>(truth) >= k_ ||
      static_cast<std::size_t>(predicted) >= k_)
    fail(ErrorCode::InvalidArgument, "class index out of range in confusion matrix");
  ++cells_[static_cast<std::size_t>(truth) * k_ + static_cast<std::size_t>(predicted)];
}

void ConfusionMatrix::merge(const ConfusionMatrix &other) {
  if (other.k_ != k_)
    fail(ErrorCode::InvalidArgument, "cannot merge confusion matrices of different size");
  for (std::size_t i = 0; i < cells_.size(); ++i)
    cells_[i] += other.cells_[i];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (auto c : cells_)
    s += c;
  return s;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < k_; ++i)
    s += count(i, i);
  return s;
}

BinaryCounts ConfusionMatrix::one_vs_rest(std::size_t cls) const {
  BinaryCounts b;
  for (std::size_t t = 0; t < k_; ++t)
    for (std::size_t p = 0; p < k_; ++p) {
      auto n = count(t, p);
      if (t == cls && p == cls)
        b.tp += n;
      else if (p == cls)
        b.fp += n;
      else if (t == cls)
        b.fn += n;
      else
        b.tn += n;
    }
  return b;
}

EvalReport report(const ConfusionMatrix &cm, std::span<const std::string> class_names) {
  if (class_names.size() != cm.classes())
    fail(ErrorCode::InvalidArgument, "class name count does not match the confusion matrix");
  EvalReport r;
  r.total = cm.total();
  r.accuracy = r.total ? static_cast<double>(cm.correct()) / static_cast<double>(r.total) : 0.0;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    auto b = cm.one_vs_rest(c);
    auto m = metrics(b);
    r.classes.push_back({class_names[c], m.precision, m.recall, m.f1, b.tp + b.fn,
                         m.precision_undefined || m.recall_undefined || m.f1_undefined});
    f1_sum += m.f1;
  }
  r.macro_f1 = cm.classes() ? f1_sum / static_cast<double>(cm.classes()) : 0.0;
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    std::vector<std::size_t> row;
    for (std::size_t p = 0; p < cm.classes(); ++p)
      row.push_back(cm.count(t, p));
    r.confusion.push_back(std::move(row));
  }
  return r;
}

json EvalReport::to_json() const {
  json cls = json::array();
  for (const auto &c : classes)
    cls.push_back({{"class", c.name},
                   {"precision", c.precision},
                   {"recall", c.recall},
                   {"f1", c.f1},
                   {"support", c.support},
                   {"undefined", c.undefined}});
  json j = {{"accuracy", accuracy}, {"macro_f1", macro_f1}, {"total", total},
            {"classes", cls},       {"confusion", confusion}};
  if (!metadata.empty())
    j["metadata"] = metadata;
  return j;
}

namespace {

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string pad(const std::string &s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string lpad(const std::string &s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

} // namespace

std::string EvalReport::to_table() const {
  std::size_t w = 8;
  for (const auto &c : classes)
    w = std::max(w, c.name.size() + 2);
  std::ostringstream os;
  os << pad("class", w) << lpad("precision", 11) << lpad("recall", 9) << lpad("f1", 9)
     << lpad("support", 9) << "\n";
  for (const auto &c : classes)
    os << pad(c.name, w) << lpad(fixed(c.precision), 11) << lpad(fixed(c.recall), 9)
       << lpad(fixed(c.f1), 9) << lpad(std::to_string(c.support), 9) << (c.undefined ? "  *" : "")
       << "\n";
  os << "accuracy " << fixed(accuracy) << "  macro-f1 " << fixed(macro_f1) << "  n=" << total << "\n";
  return os.str();
}

std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "accuracy")
    return Metric::Accuracy;
  if (s == "macro_f1" || s == "macro-f1" || s == "f1")
    return Metric::MacroF1;
  return std::nullopt;
}

double score(const EvalReport &r, Metric m) { return m == Metric::Accuracy ? r.accuracy : r.macro_f1; }

SummaryStats summarize(std::span<const EvalReport> reports) {
  SummaryStats s;
  if (reports.empty())
    return s;
  const double n = static_cast<double>(reports.size());
  auto mean_std = [&](auto get, double &mean, double &sd) {
    mean = 0.0;
    for (const auto &r : reports)
      mean += get(r);
    mean /= n;
    double var = 0.0;
    for (const auto &r : reports)
      var += (get(r) - mean) * (get(r) - mean);
    sd = std::sqrt(var / n);
  };
  mean_std([](const EvalReport &r) { return r.accuracy; }, s.accuracy_mean, s.accuracy_std);
  mean_std([](const EvalReport &r) { return r.macro_f1; }, s.macro_f1_mean, s.macro_f1_std);
  const auto K = reports.front().classes.size();
  s.precision_mean.assign(K, 0.0);
  s.recall_mean.assign(K, 0.0);
  s.f1_mean.assign(K, 0.0);
  for (const auto &r : reports)
    for (std::size_t c = 0; c < K && c < r.classes.size(); ++c) {
      s.precision_mean[c] += r.classes[c].precision / n;
      s.recall_mean[c] += r.classes[c].recall / n;
      s.f1_mean[c] += r.classes[c].f1 / n;
    }
  return s;
}

namespace {

json summary_json(const SummaryStats &s, std::span<const std::string> names) {
  json cls = json::array();
  for (std::size_t c = 0; c < s.f1_mean.size(); ++c)
    cls.push_back({{"class", c < names.size() ? names[c] : std::to_string(c)},
                   {"precision", s.precision_mean[c]},
                   {"recall", s.recall_mean[c]},
                   {"f1", s.f1_mean[c]}});
  return {{"accuracy_mean", s.accuracy_mean},
          {"accuracy_std", s.accuracy_std},
          {"macro_f1_mean", s.macro_f1_mean},
          {"macro_f1_std", s.macro_f1_std},
          {"classes", cls}};
}

json quartiles_json(const Quartiles &q) {
  return {{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max}};
}

EvalReport run_split(std::span<const int> y, std::span<const std::string> names,
                     std::span<const std::size_t> train, std::span<const std::size_t> test,
                     const FitPredict &fit_predict, ConfusionMatrix *cm_out = nullptr) {
  auto pred = fit_predict(train, test);
  if (pred.size() != test.size())
    fail(ErrorCode::Runtime, "model returned " + std::to_string(pred.size()) + " predictions for " +
                                 std::to_string(test.size()) + " issues");
  ConfusionMatrix cm(names.size());
  for (std::size_t i = 0; i < test.size(); ++i)
    cm.add(y[test[i]], pred[i]);
  if (cm_out)
    *cm_out = cm;
  return report(cm, names);
}

} // namespace

CvResult cross_validate(std::span<const int> y, std::span<const std::string> class_names, std::size_t k,
                        std::uint64_t seed, const FitPredict &fit_predict) {
  if (k < 2)
    fail(ErrorCode::InvalidArgument, "cross-validation needs k >= 2");
  if (y.size() < k)
    fail(ErrorCode::InvalidArgument, "fewer issues than folds");
  CvResult out;
  out.fold_of = stratified_folds(y, k, seed);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < y.size(); ++i)
      (out.fold_of[i] == f ? test : train).push_back(i);
    std::set<int> in_test;
    for (auto i : test)
      in_test.insert(y[i]);
    for (std::size_t c = 0; c < class_names.size(); ++c)
      if (!in_test.count(static_cast<int>(c)))
        out.warnings.push_back("fold " + std::to_string(f) + ": class " + class_names[c] +
                               " absent from the held-out part");
    out.folds.push_back(run_split(y, class_names, train, test, fit_predict));
    out.folds.back().metadata["fold"] = std::to_string(f);
  }
  out.summary = summarize(out.folds);
  return out;
}

Quartiles quartiles(std::vector<double> v) {
  Quartiles q;
  if (v.empty())
    return q;
  std::sort(v.begin(), v.end());
  auto at = [&v](double p) {
    double pos = p * static_cast<double>(v.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  q.min = v.front();
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  q.max = v.back();
  return q;
}

ProjectBasedResult evaluate_project_based(std::span<const std::string> repos, std::span<const int> y,
                                          std::span<const std::string> class_names, double ratio,
                                          std::uint64_t seed, const FitPredict &fit_predict) {
  if (repos.size() != y.size())
    fail(ErrorCode::InvalidArgument, "repository and label lengths differ");
  std::map<std::string, std::vector<std::size_t>> by_repo;
  for (std::size_t i = 0; i < repos.size(); ++i)
    by_repo[repos[i]].push_back(i);

  ProjectBasedResult out;
  ConfusionMatrix pooled(class_names.size());
  std::uint64_t stream = 0;
  for (const auto &[repo, members] : by_repo) {
    ++stream;
    std::vector<std::size_t> per_class(class_names.size(), 0);
    for (auto i : members)
      ++per_class[static_cast<std::size_t>(y[i])];
    std::string reason;
    for (std::size_t c = 0; c < class_names.size(); ++c)
      if (per_class[c] < 2) {
        reason = "class " + class_names[c] + " has " + std::to_string(per_class[c]) +
                 " issue(s); at least 2 are needed";
        break;
      }
    if (!reason.empty()) {
      out.skipped.push_back({repo, reason});
      continue;
    }
    std::vector<int> local_y;
    for (auto i : members)
      local_y.push_back(y[i]);
    auto split = stratified_split_indices(local_y, ratio, mix_seed(seed, stream));
    std::vector<std::size_t> train, test;
    for (auto i : split.train)
      train.push_back(members[i]);
    for (auto i : split.test)
      test.push_back(members[i]);
    ConfusionMatrix cm;
    RepoRow row{repo, train.size(), test.size(), run_split(y, class_names, train, test, fit_predict, &cm)};
    row.report.metadata["repo"] = repo;
    pooled.merge(cm);
    out.rows.push_back(std::move(row));
  }
  std::vector<EvalReport> reports;
  std::vector<double> acc;
  std::vector<std::vector<double>> f1(class_names.size());
  for (const auto &r : out.rows) {
    reports.push_back(r.report);
    acc.push_back(r.report.accuracy);
    for (std::size_t c = 0; c < class_names.size(); ++c)
      f1[c].push_back(r.report.classes[c].f1);
  }
  out.mean = summarize(reports);
  out.pooled = report(pooled, class_names);
  out.accuracy = quartiles(acc);
  for (auto &v : f1)
    out.f1.push_back(quartiles(v));
  return out;
}

json ProjectBasedResult::to_json() const {
  json rows_j = json::array();
  for (const auto &r : rows)
    rows_j.push_back({{"repo", r.repo}, {"n_train", r.n_train}, {"n_test", r.n_test},
                      {"report", r.report.to_json()}});
  json skipped_j = json::array();
  for (const auto &s : skipped)
    skipped_j.push_back({{"repo", s.repo}, {"reason", s.reason}});
  std::vector<std::string> names;
  for (const auto &c : pooled.classes)
    names.push_back(c.name);
  json f1_j = json::object();
  for (std::size_t c = 0; c < f1.size() && c < names.size(); ++c)
    f1_j[names[c]] = quartiles_json(f1[c]);
  return {{"repositories", rows_j},
          {"skipped", skipped_j},
          {"aggregate_mean_over_repos", summary_json(mean, names)},
          {"aggregate_pooled", pooled.to_json()},
          {"accuracy_quartiles", quartiles_json(accuracy)},
          {"f1_quartiles", f1_j}};
}

std::string ProjectBasedResult::to_table() const {
  std::size_t w = 10;
  for (const auto &r : rows)
    w = std::max(w, r.repo.size() + 2);
  std::ostringstream os;
  os << pad("repo", w) << lpad("train", 7) << lpad("test", 6) << lpad("accuracy", 10);
  for (const auto &c : pooled.classes)
    os << lpad("f1:" + c.name, 10);
  os << "\n";
  for (const auto &r : rows) {
    os << pad(r.repo, w) << lpad(std::to_string(r.n_train), 7) << lpad(std::to_string(r.n_test), 6)
       << lpad(fixed(r.report.accuracy), 10);
    for (const auto &c : r.report.classes)
      os << lpad(fixed(c.f1), 10);
    os << "\n";
  }
  os << "mean accuracy " << fixed(mean.accuracy_mean) << " (sd " << fixed(mean.accuracy_std)
     << ")  pooled accuracy " << fixed(pooled.accuracy) << "\n";
  os << "accuracy quartiles: min " << fixed(accuracy.min) << "  q1 " << fixed(accuracy.q1)
     << "  median " << fixed(accuracy.median) << "  q3 " << fixed(accuracy.q3) << "  max "
     << fixed(accuracy.max) << "\n";
  for (const auto &s : skipped)
    os << "skipped " << s.repo << ": " << s.reason << "\n";
  return os.str();
}

std::string ProjectBasedResult::to_csv() const {
  std::ostringstream os;
  os << "repo,n_train,n_test,accuracy";
  for (const auto &c : pooled.classes)
    os << ",precision_" << c.name << ",recall_" << c.name << ",f1_" << c.name;
  os << "\n";
  for (const auto &r : rows) {
    os << csv_escape(r.repo) << "," << r.n_train << "," << r.n_test << ","
       << features::format_double(r.report.accuracy);
    for (const auto &c : r.report.classes)
      os << "," << features::format_double(c.precision) << "," << features::format_double(c.recall)
         << "," << features::format_double(c.f1);
    os << "\n";
  }
  return os.str();
}

CrossProjectSplit cross_project_split(std::span<const std::string> repos, double ratio, std::uint64_t seed) {
  std::set<std::string> unique(repos.begin(), repos.end());
  if (unique.size() < 2)
    fail(ErrorCode::InvalidArgument, "cross-project evaluation needs at least two repositories");
  if (!(ratio > 0.0 && ratio < 1.0))
    fail(ErrorCode::InvalidArgument, "split ratio must lie strictly between 0 and 1");
  std::vector<std::string> order(unique.begin(), unique.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto n = order.size();
  auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 0.5));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  CrossProjectSplit s;
  s.train_repos.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test_repos.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train_repos.begin(), s.train_repos.end());
  std::sort(s.test_repos.begin(), s.test_repos.end());
  std::set<std::string> train_set(s.train_repos.begin(), s.train_repos.end());
  for (std::size_t i = 0; i < repos.size(); ++i)
    (train_set.count(repos[i]) ? s.train : s.test).push_back(i);
  return s;
}

json CrossProjectResult::to_json() const {
  return {{"train_repositories", split.train_repos},
          {"test_repositories", split.test_repos},
          {"n_train", split.train.size()},
          {"n_test", split.test.size()},
          {"report", report.to_json()}};
}

CrossProjectResult evaluate_cross_project(std::span<const std::string> repos, std::span<const int> y,
                                          std::span<const std::string> class_names, double ratio,
                                          std::uint64_t seed, const FitPredict &fit_predict) {
  if (repos.size() != y.size())
    fail(ErrorCode::InvalidArgument, "repository and label lengths differ");
  CrossProjectResult out;
  out.split = cross_project_split(repos, ratio, seed);
  out.report = run_split(y, class_names, out.split.train, out.split.test, fit_predict);
  return out;
}

FeatureImportanceReport feature_importance(const learn::Estimator &model,
                                           std::span<const std::string> feature_names) {
  const auto *forest = std::get_if<learn::ForestModel>(&model);
  if (!forest)
    fail(ErrorCode::InvalidArgument, "feature importance needs a random forest model");
  if (feature_names.size() != forest->n_features)
    fail(ErrorCode::InvalidArgument, "feature name count does not match the model width");
  auto imp = forest->feature_importance();
  FeatureImportanceReport r;
  for (std::size_t f = 0; f < imp.size(); ++f)
    r.ranked.emplace_back(feature_names[f], imp[f]);
  std::stable_sort(r.ranked.begin(), r.ranked.end(), [](const auto &a, const auto &b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return r;
}

json FeatureImportanceReport::to_json() const {
  json j = json::array();
  for (const auto &[name, v] : ranked)
    j.push_back({{"feature", name}, {"importance", v}});
  return j;
}

std::string FeatureImportanceReport::to_table(std::size_t top) const {
  std::size_t n = top ? std::min(top, ranked.size()) : ranked.size();
  std::size_t w = 10;
  for (std::size_t i = 0; i < n; ++i)
    w = std::max(w, ranked[i].first.size() + 2);
  std::ostringstream os;
  os << lpad("rank", 5) << "  " << pad("feature", w) << lpad("importance", 12) << "\n";
  for (std::size_t i = 0; i < n; ++i)
    os << lpad(std::to_string(i + 1), 5) << "  " << pad(ranked[i].first, w)
       << lpad(fixed(ranked[i].second, 6), 12) << "\n";
  return os.str();
}

} // namespace triage::eval
