#pragma once

#include "triage/learn.hpp"

#include <nlohmann/json_fwd.hpp>

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace triage::eval {

struct BinaryCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

struct BinaryMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  bool accuracy_undefined = false;
};

/// Zero denominators give 0 and set the matching flag.
BinaryMetrics metrics(const BinaryCounts &c);

class ConfusionMatrix {
public:
  explicit ConfusionMatrix(std::size_t n_classes = 2) : k_(n_classes), cells_(n_classes * n_classes, 0) {}
  static ConfusionMatrix from_pairs(std::span<const int> truth, std::span<const int> predicted,
                                    std::size_t n_classes);

  void add(int truth, int predicted);
  void merge(const ConfusionMatrix &other);
  std::size_t count(std::size_t truth, std::size_t predicted) const { return cells_[truth * k_ + predicted]; }
  std::size_t classes() const { return k_; }
  std::size_t total() const;
  std::size_t correct() const;
  BinaryCounts one_vs_rest(std::size_t cls) const;

private:
  std::size_t k_;
  std::vector<std::size_t> cells_;
};

struct ClassReport {
  std::string name;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::size_t support = 0;
  bool undefined = false;
};

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::size_t total = 0;
  std::vector<ClassReport> classes;
  std::vector<std::vector<std::size_t>> confusion;
  std::map<std::string, std::string> metadata;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

EvalReport report(const ConfusionMatrix &cm, std::span<const std::string> class_names);

enum class Metric { Accuracy, MacroF1 };
std::optional<Metric> parse_metric(std::string_view s);
double score(const EvalReport &r, Metric m);

/// Trains on `train` and returns one predicted class per element of `test`.
using FitPredict =
    std::function<std::vector<int>(std::span<const std::size_t> train, std::span<const std::size_t> test)>;

struct SummaryStats {
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  double macro_f1_mean = 0.0, macro_f1_std = 0.0;
  std::vector<double> precision_mean, recall_mean, f1_mean;
};

SummaryStats summarize(std::span<const EvalReport> reports);

struct CvResult {
  std::vector<EvalReport> folds;
  SummaryStats summary;
  std::vector<std::size_t> fold_of;
  std::vector<std::string> warnings;
};

CvResult cross_validate(std::span<const int> y, std::span<const std::string> class_names, std::size_t k,
                        std::uint64_t seed, const FitPredict &fit_predict);

struct Quartiles {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};
/// Linear interpolation between order statistics.
Quartiles quartiles(std::vector<double> values);

struct RepoRow {
  std::string repo;
  std::size_t n_train = 0, n_test = 0;
  EvalReport report;
};

struct SkippedRepo {
  std::string repo;
  std::string reason;
};

struct ProjectBasedResult {
  std::vector<RepoRow> rows; // sorted by repo
  std::vector<SkippedRepo> skipped;
  SummaryStats mean;         // unweighted mean over repositories
  EvalReport pooled;         // micro-average over all held-out issues
  Quartiles accuracy;
  std::vector<Quartiles> f1; // per class

  nlohmann::json to_json() const;
  std::string to_table() const;
  std::string to_csv() const;
};

ProjectBasedResult evaluate_project_based(std::span<const std::string> repos, std::span<const int> y,
                                          std::span<const std::string> class_names, double ratio,
                                          std::uint64_t seed, const FitPredict &fit_predict);

struct CrossProjectSplit {
  std::vector<std::string> train_repos, test_repos;
  std::vector<std::size_t> train, test;
};

/// round(ratio * #repos) repositories (at least one on each side) train.
CrossProjectSplit cross_project_split(std::span<const std::string> repos, double ratio, std::uint64_t seed);

struct CrossProjectResult {
  CrossProjectSplit split;
  EvalReport report;
  nlohmann::json to_json() const;
};

CrossProjectResult evaluate_cross_project(std::span<const std::string> repos, std::span<const int> y,
                                          std::span<const std::string> class_names, double ratio,
                                          std::uint64_t seed, const FitPredict &fit_predict);

struct FeatureImportanceReport {
  std::vector<std::pair<std::string, double>> ranked; // descending, ties by name

  nlohmann::json to_json() const;
  std::string to_table(std::size_t top = 0) const;
};

/// Throws Error{InvalidArgument} for non-forest estimators.
FeatureImportanceReport feature_importance(const learn::Estimator &model,
                                           std::span<const std::string> feature_names);

} // namespace triage::eval
