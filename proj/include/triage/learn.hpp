#pragma once

#include "triage/corpus_types.hpp"
#include "triage/sparse.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace triage::learn {

/// Labelled rows; labels lie in [0, n_classes).
struct Dataset {
  CsrMatrix X;
  std::vector<int> y;
  std::size_t n_classes = 0;

  std::size_t size() const { return y.size(); }
  /// Throws Error{InvalidArgument} on shape or label-range problems.
  void validate() const;
};

// --- class weights ----------------------------------------------------------

struct ClassWeights {
  std::vector<double> w;

  /// weight_t = N / frequency_t. Throws if a class has no members.
  static ClassWeights compute(std::span<const int> y, std::size_t n_classes);
  static ClassWeights uniform(std::size_t n_classes) { return {std::vector<double>(n_classes, 1.0)}; }
  /// Manual grid for priority: High gets 0.1*i, Low gets 0.1*(10-i), i in [1,9].
  static ClassWeights priority_override(int i);
  double of(int cls) const { return w.at(static_cast<std::size_t>(cls)); }
};

// --- keyword baseline -------------------------------------------------------

class KeywordClassifier {
public:
  /// Sections `[keywords] Bug`, `[keywords] Enhancement`, `[keywords] SupportDoc`.
  static KeywordClassifier parse(std::string_view text);
  static const KeywordClassifier &builtin();

  /// Most hits wins with probability 1; ties share uniformly; no hits is uniform.
  std::array<double, kObjectiveClassCount> predict_proba(std::span<const std::string> tokens) const;
  const std::vector<std::string> &keywords(ObjectiveClass c) const {
    return keywords_[static_cast<std::size_t>(c)];
  }

private:
  std::array<std::vector<std::string>, kObjectiveClassCount> keywords_;
  std::map<std::string, std::size_t> lookup_;
};

// --- estimators -------------------------------------------------------------

struct NaiveBayesModel {
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  double alpha = 1.0;
  std::vector<double> class_count;
  std::vector<double> log_prior;      // -inf for classes absent in training
  std::vector<double> log_likelihood; // n_classes x n_features, row-major

  std::vector<double> predict_proba(const RowView &x) const;
};

/// Throws Error{InvalidArgument} on negative feature values.
NaiveBayesModel fit_multinomial_nb(const Dataset &data, double alpha = 1.0);

struct LogRegParams {
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::size_t epochs = 200;
};

struct LogRegModel {
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  std::vector<double> weights; // n_classes x n_features, row-major
  std::vector<double> bias;
  std::vector<double> loss_history;

  std::vector<double> predict_proba(const RowView &x) const;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad_weights;
  std::vector<double> grad_bias;
};

/// Class-weighted mean cross-entropy plus (l2/2)*||W||^2 and its gradient.
LossAndGradient logreg_loss_and_gradient(const Dataset &data, const ClassWeights &cw, double l2,
                                         std::span<const double> weights, std::span<const double> bias);

/// Full-batch gradient descent. Throws Error{Numeric} if the loss stops
/// being finite.
LogRegModel fit_logreg(const Dataset &data, const ClassWeights &cw, const LogRegParams &hp,
                       std::uint64_t seed);

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;    // 0 = unlimited
  std::size_t min_leaf = 1;
  std::size_t max_features = 0; // 0 = floor(sqrt(d))
  bool bootstrap = true;
  std::size_t threads = 0;      // 0 = hardware concurrency
};

struct TreeNode {
  std::int32_t feature = -1; // -1 marks a leaf
  double threshold = 0.0;    // go left when x <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t leaf = 0;    // offset into Tree::leaf_probs
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<double> leaf_probs;
  std::vector<double> importance; // raw impurity decrease per feature

  const double *leaf_distribution(const RowView &x) const;
};

struct ForestModel {
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  std::vector<Tree> trees;

  std::vector<double> predict_proba(const RowView &x) const;
  /// Mean decrease in impurity: per-tree normalized, averaged, renormalized.
  std::vector<double> feature_importance() const;
};

double gini(std::span<const double> class_weights);

ForestModel fit_random_forest(const Dataset &data, const ClassWeights &cw, const ForestParams &hp,
                              std::uint64_t seed);

struct KnnModel {
  std::size_t k = 5;
  std::size_t n_classes = 0;
  CsrMatrix X;
  std::vector<int> y;
  std::vector<double> sq_norms;

  std::vector<double> predict_proba(const RowView &x) const;
};

KnnModel fit_knn(const Dataset &data, std::size_t k);

// --- balancing --------------------------------------------------------------

struct SmoteOrigin {
  std::size_t base = 0;
  std::size_t neighbor = 0;
  double lambda = 0.0;
};

struct SmoteResult {
  std::vector<SparseVector> points;
  std::vector<SmoteOrigin> origins;
};

/// `majority_count - minority.size()` points, each x + lambda (x_nn - x)
/// with x_nn among the k nearest minority neighbours of x.
SmoteResult smote(std::span<const SparseVector> minority, std::size_t majority_count, std::size_t k,
                  std::uint64_t seed);
/// Oversamples every class up to the largest class count.
Dataset smote_balance(const Dataset &data, std::size_t k, std::uint64_t seed);

/// Indices of the k nearest rows to `rows[i]` among `rows` (excluding i),
/// ties broken by index.
std::vector<std::size_t> nearest_neighbors(std::span<const SparseVector> rows, std::size_t i,
                                           std::size_t k);

// --- hyperparameter search --------------------------------------------------

using Hyperparams = std::map<std::string, double>;

struct ParamRange {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  bool integer = false;
  bool log_scale = false;
};

struct SearchSpace {
  std::vector<ParamRange> ranges;

  void validate() const;
  Hyperparams sample(std::mt19937_64 &rng) const;
  static SearchSpace forest_default();
  static SearchSpace logreg_default();
  static SearchSpace nb_default();
  static SearchSpace knn_default();
};

struct SearchTrial {
  Hyperparams params;
  double score = 0.0;
};

struct SearchResult {
  Hyperparams best;
  double best_score = 0.0;
  std::vector<SearchTrial> trace;
};

using Evaluator = std::function<double(const Hyperparams &)>;
/// Samples `budget` configurations; the first one with the top score wins.
SearchResult random_search(const SearchSpace &space, std::size_t budget, std::uint64_t seed,
                           const Evaluator &evaluate);

// --- rank baselines ---------------------------------------------------------

enum class RankField { CreatedAt, UpdatedAt, Comments };
std::optional<RankField> parse_rank_field(std::string_view s);
std::string_view to_string(RankField f);

double median(std::vector<double> values);

/// High where the value lies strictly above the median (strictly below when
/// `low_is_high`), Low otherwise.
std::vector<PriorityClass> rank_by_median(std::span<const double> values, bool low_is_high);

/// Comments and updated_at: above the median is High. created_at: older than
/// the median is High. Missing updated_at falls back to created_at.
std::vector<PriorityClass> rank_baseline(std::span<const IssueRecord> issues, RankField field);

// --- generic model handle ---------------------------------------------------

enum class ModelKind { Keyword, NaiveBayes, LogReg, Forest, Knn };
std::string_view to_string(ModelKind k);
std::optional<ModelKind> parse_model_kind(std::string_view s);

using Estimator = std::variant<NaiveBayesModel, LogRegModel, ForestModel, KnnModel>;

/// Trains the estimator named by `kind` with hyperparameters read from `hp`
/// (missing keys take defaults).
Estimator train_estimator(ModelKind kind, const Dataset &data, const ClassWeights &cw,
                          const Hyperparams &hp, std::uint64_t seed);
std::vector<double> predict_proba(const Estimator &m, const RowView &x);
ModelKind kind_of(const Estimator &m);
std::size_t n_features_of(const Estimator &m);

nlohmann::json estimator_to_json(const Estimator &m);
Estimator estimator_from_json(const nlohmann::json &j);

std::size_t argmax(std::span<const double> v);

} // namespace triage::learn
