#pragma once

#include "triage/corpus.hpp"
#include "triage/evalkit.hpp"
#include "triage/features.hpp"
#include "triage/labelmap.hpp"
#include "triage/learn.hpp"
#include "triage/sentiment.hpp"
#include "triage/textnorm.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace triage::pipeline {

/// An issue with its text normalized and raw metadata extracted; everything
/// that does not depend on fitted preprocessing.
struct PreparedIssue {
  std::string id;
  std::string repo;
  text::TokenizedDoc title;
  text::TokenizedDoc description;
  std::vector<std::string> labels;
  features::MetadataFeatures metadata{};
  std::optional<ObjectiveClass> objective;
  std::optional<PriorityClass> priority;
  std::size_t comments = 0;
  Timestamp created_at{};
  std::optional<Timestamp> updated_at;
};

std::vector<PreparedIssue> prepare(const Corpus &corpus, std::size_t threads = 0);

/// sha256 over the stopword list, lemma table, sentiment lexicon and label
/// tables used by prepare().
std::string preprocessing_checksum();

enum class Balancing { None, ClassWeights, Smote };
std::string_view to_string(Balancing b);
std::optional<Balancing> parse_balancing(std::string_view s);

struct TrainConfig {
  learn::ModelKind kind = learn::ModelKind::Forest;
  learn::Hyperparams hyperparams;
  Balancing balancing = Balancing::ClassWeights;
  std::optional<int> weight_override; // priority only, i in [1,9]
  std::size_t smote_k = 5;
  std::size_t search_budget = 0;      // 0 disables random search
  std::size_t search_folds = 3;
  eval::Metric search_metric = eval::Metric::Accuracy;
  std::optional<learn::SearchSpace> search_space;
  std::size_t title_max_features = features::TfidfModel::kTitleMaxFeatures;
  std::size_t desc_max_features = features::TfidfModel::kDescriptionMaxFeatures;
  std::uint64_t seed = 42;

  nlohmann::json to_json() const;
  /// Keys missing from `j` keep their defaults; unknown keys throw
  /// Error{InvalidArgument}.
  static TrainConfig from_json(const nlohmann::json &j);
};

using ObjectiveProbs = std::array<double, kObjectiveClassCount>;
using PriorityProbs = std::array<double, kPriorityClassCount>;

class ObjectiveModel {
public:
  /// Issues without a single objective label are ignored. Keyword models
  /// need no training data.
  static ObjectiveModel train(std::span<const PreparedIssue> issues, const TrainConfig &config);
  static ObjectiveModel train(std::span<const PreparedIssue *const> issues, const TrainConfig &config);
  static ObjectiveModel keyword();

  ObjectiveProbs predict_proba(const PreparedIssue &issue) const;
  learn::ModelKind kind() const { return config_.kind; }
  const TrainConfig &config() const { return config_; }
  std::size_t train_size() const { return train_size_; }

  void save(const std::filesystem::path &dir) const;
  /// Throws Error{Checksum} if an asset or preprocessing table differs from
  /// what the model was trained with.
  static ObjectiveModel load(const std::filesystem::path &dir);
  std::string fingerprint() const;

private:
  nlohmann::json manifest() const;
  SparseVector row(const PreparedIssue &issue) const;

  TrainConfig config_;
  std::optional<features::TfidfModel> title_, desc_;
  std::optional<learn::Estimator> estimator_;
  std::string train_fingerprint_;
  std::size_t train_size_ = 0;
  std::optional<learn::SearchResult> search_;
};

/// Where stage-2 gets its three objective probabilities from.
class ObjectiveSource {
public:
  static ObjectiveSource keyword();
  static ObjectiveSource model(ObjectiveModel m);
  /// CSV with header `id,Bug,Enhancement,SupportDoc`.
  static ObjectiveSource imported(const std::filesystem::path &csv);
  static ObjectiveSource imported(std::map<std::string, ObjectiveProbs> probs, std::string origin);

  /// Throws Error{InvalidArgument} when an imported file lacks the issue.
  ObjectiveProbs probs(const PreparedIssue &issue) const;
  std::string kind() const;
  nlohmann::json describe() const;
  const ObjectiveModel *model_ptr() const { return model_.get(); }

private:
  enum class Kind { Keyword, Model, Imported } kind_ = Kind::Keyword;
  std::shared_ptr<const ObjectiveModel> model_;
  std::shared_ptr<const std::map<std::string, ObjectiveProbs>> imported_;
  std::string origin_;
};

std::map<std::string, ObjectiveProbs> load_objective_probs(const std::filesystem::path &csv);

class PriorityModel {
public:
  /// Issues without a priority label are ignored.
  static PriorityModel train(std::span<const PreparedIssue> issues, const ObjectiveSource &source,
                             const TrainConfig &config);
  static PriorityModel train(std::span<const PreparedIssue *const> issues, const ObjectiveSource &source,
                             const TrainConfig &config);

  PriorityProbs predict_proba(const PreparedIssue &issue, const ObjectiveProbs &objective) const;
  features::FeatureLayout layout() const;
  std::vector<std::string> feature_names() const;
  const learn::Estimator &estimator() const { return *estimator_; }
  const TrainConfig &config() const { return config_; }
  const learn::ClassWeights &class_weights() const { return weights_; }
  const std::optional<learn::SearchResult> &search() const { return search_; }
  const features::TfidfModel &title_model() const { return *title_; }
  const features::TfidfModel &desc_model() const { return *desc_; }
  const features::ScalerParams &scaler() const { return *scaler_; }

  /// Source recorded at training time; imported sources must be supplied
  /// again when predicting.
  const std::string &objective_kind() const { return objective_kind_; }
  const ObjectiveModel *embedded_objective() const { return objective_ ? &*objective_ : nullptr; }

  void save(const std::filesystem::path &dir) const;
  static PriorityModel load(const std::filesystem::path &dir);
  std::string fingerprint() const;

  SparseVector row(const PreparedIssue &issue, const ObjectiveProbs &objective) const;

private:
  nlohmann::json manifest() const;

  TrainConfig config_;
  std::optional<features::TfidfModel> title_, desc_;
  std::optional<features::ScalerParams> scaler_;
  std::optional<learn::Estimator> estimator_;
  learn::ClassWeights weights_;
  std::string objective_kind_;
  nlohmann::json objective_description_;
  std::optional<ObjectiveModel> objective_;
  std::string train_fingerprint_;
  std::size_t train_size_ = 0;
  std::optional<learn::SearchResult> search_;
};

struct Prediction {
  std::string id;
  std::string predicted;
  std::vector<double> probs;
};

/// Header `id,predicted,<class columns>,model_fingerprint`.
std::string predictions_csv(std::span<const Prediction> rows, std::span<const std::string> class_names,
                            const std::string &fingerprint);

std::vector<std::string> objective_class_names();
std::vector<std::string> priority_class_names();

enum class EvalMode { CrossValidation, ProjectBased, CrossProject };
std::optional<EvalMode> parse_eval_mode(std::string_view s);
std::string_view to_string(EvalMode m);

struct EvalOptions {
  enum class Task { Objective, Priority } task = Task::Priority;
  EvalMode mode = EvalMode::CrossProject;
  std::size_t folds = 5;
  double train_ratio = 0.8;
  std::uint64_t seed = 42;
  std::optional<std::vector<int>> weight_sweep; // override indices to try
  std::size_t importance_top = 10;
};

struct EvaluationOutput {
  nlohmann::json report;
  std::string table;
  std::string csv; // per-repo distribution (project-based only)
};

/// Runs the experiment; preprocessing is refit inside every training part.
EvaluationOutput evaluate(std::span<const PreparedIssue> issues, const ObjectiveSource &source,
                          const TrainConfig &config, const EvalOptions &options);

std::vector<Prediction> predict_objective(const ObjectiveModel &m, std::span<const PreparedIssue> issues);

/// `source` replaces the stage-1 source recorded in the model; it is required
/// when the model was trained on imported probabilities.
std::vector<Prediction> predict_priority(const PriorityModel &m, std::span<const PreparedIssue> issues,
                                         const ObjectiveSource *source = nullptr);

/// Stage-2 feature matrix. With a model its fitted vectorizers and scaler are
/// used, otherwise they are fitted on `issues`.
std::string feature_table_csv(std::span<const PreparedIssue> issues, const ObjectiveSource &source,
                              const PriorityModel *model, const TrainConfig &config);

/// Accuracy of a rank baseline on a subset.
eval::EvalReport rank_baseline_report(std::span<const PreparedIssue> issues, learn::RankField field);

} // namespace triage::pipeline
