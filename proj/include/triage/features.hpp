#pragma once

#include "triage/corpus_types.hpp"
#include "triage/labelmap.hpp"
#include "triage/sentiment.hpp"
#include "triage/sparse.hpp"
#include "triage/textnorm.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace triage::features {

/// n-grams of `tokens` for every n in [lo, hi], joined with single spaces.
std::vector<std::string> ngrams(std::span<const std::string> tokens, std::size_t lo, std::size_t hi);

class TfidfModel {
public:
  inline static constexpr std::size_t kTitleMaxFeatures = 10000;
  inline static constexpr std::size_t kDescriptionMaxFeatures = 20000;

  /// Keeps the `max_features` n-grams with the highest corpus frequency
  /// (ties by term); columns are ordered by term.
  static TfidfModel fit(std::span<const std::vector<std::string>> docs, std::size_t max_features,
                        std::size_t ngram_lo = 1, std::size_t ngram_hi = 2);

  /// count * idf per column, then L2-normalized.
  SparseVector transform(std::span<const std::string> tokens) const;
  /// Raw in-vocabulary n-gram counts.
  SparseVector transform_counts(std::span<const std::string> tokens) const;

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string> &terms() const { return terms_; }
  const std::vector<double> &idf() const { return idf_; }
  std::optional<std::size_t> index_of(const std::string &term) const;
  std::size_t max_features() const { return max_features_; }
  std::size_t documents() const { return n_docs_; }

  nlohmann::json to_json() const;
  static TfidfModel from_json(const nlohmann::json &j);
  /// sha256 of the serialized model.
  std::string fingerprint() const;
  bool operator==(const TfidfModel &o) const {
    return terms_ == o.terms_ && idf_ == o.idf_ && max_features_ == o.max_features_ &&
           ngram_lo_ == o.ngram_lo_ && ngram_hi_ == o.ngram_hi_ && n_docs_ == o.n_docs_;
  }

private:
  void build_index();
  std::unordered_map<std::string, std::size_t> counts_in_vocab(std::span<const std::string> tokens) const;

  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t max_features_ = 0;
  std::size_t ngram_lo_ = 1;
  std::size_t ngram_hi_ = 2;
  std::size_t n_docs_ = 0;
};

enum class Nf : std::size_t {
  TitleWords,
  DescWords,
  Code,
  Url,
  Comments,
  CmMeanLen,
  CmDevelopersRatio,
  TimeToDiscuss,
  Events,
  Assigned,
  IsPullRequest,
  HasCommit,
  HasMilestone,
  Labels,
  AuthorFollowers,
  AuthorFollowing,
  AuthorPublicRepos,
  AuthorPublicGists,
  AuthorIssueCounts,
  AuthorGithubCntrb,
  AuthorAccountAge,
  AuthorRepoCntrb,
  Association,
  SameAuthorCloser,
  DescPositivity,
  DescNegativity,
  DescPosPolarity,
  DescSubjectivity,
};
inline constexpr std::size_t kMetadataCount = 28;
using MetadataFeatures = std::array<double, kMetadataCount>;

const std::array<std::string_view, kMetadataCount> &metadata_names();
inline double get(const MetadataFeatures &m, Nf f) { return m[static_cast<std::size_t>(f)]; }

/// Sentiment is scored on `description_doc`, the normalized description.
MetadataFeatures extract_metadata(const IssueRecord &issue, const text::TokenizedDoc &description_doc,
                                  const sentiment::Lexicon &lex = sentiment::Lexicon::builtin());
MetadataFeatures extract_metadata(const IssueRecord &issue);

/// Per-column min-max scaling; constant columns map to 0, values outside the
/// fitted range are clipped.
class ScalerParams {
public:
  static ScalerParams fit(std::span<const MetadataFeatures> rows);
  MetadataFeatures scale(const MetadataFeatures &row) const;

  const MetadataFeatures &min() const { return min_; }
  const MetadataFeatures &max() const { return max_; }

  nlohmann::json to_json() const;
  static ScalerParams from_json(const nlohmann::json &j);
  std::string fingerprint() const;
  bool operator==(const ScalerParams &) const = default;

private:
  MetadataFeatures min_{};
  MetadataFeatures max_{};
};

struct FeatureVector {
  SparseVector tf; // title ++ description ++ objective probabilities
  labels::LabelVector lf{};
  MetadataFeatures nf{};
};

/// Column layout of the flattened stage-2 input: TF ++ LF ++ NF.
struct FeatureLayout {
  std::size_t title_dim = 0;
  std::size_t desc_dim = 0;
  static constexpr std::size_t prob_dim = kObjectiveClassCount;
  static constexpr std::size_t lf_dim = labels::kClusterCount;
  static constexpr std::size_t nf_dim = kMetadataCount;

  std::size_t tf_dim() const { return title_dim + desc_dim + prob_dim; }
  std::size_t lf_offset() const { return tf_dim(); }
  std::size_t nf_offset() const { return tf_dim() + lf_dim; }
  std::size_t total() const { return tf_dim() + lf_dim + nf_dim; }

  static FeatureLayout of(const TfidfModel &title, const TfidfModel &desc) {
    return {title.size(), desc.size()};
  }
  std::vector<std::string> names(const TfidfModel &title, const TfidfModel &desc,
                                 const labels::ClusterTable &clusters = labels::ClusterTable::builtin()) const;
};

/// Throws Error{InvalidArgument} when probabilities are not a 3-way
/// distribution.
FeatureVector assemble(const text::TokenizedDoc &title, const text::TokenizedDoc &description,
                       std::span<const std::string> raw_labels, const MetadataFeatures &raw_metadata,
                       const TfidfModel &title_model, const TfidfModel &desc_model,
                       const ScalerParams &scaler, std::span<const double> objective_probs,
                       const labels::ClusterTable &clusters = labels::ClusterTable::builtin());

SparseVector flatten(const FeatureVector &fv, const FeatureLayout &layout);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Header: id, NF names, LF names, tf. The tf cell holds space separated
/// index:value pairs.
std::string feature_matrix_csv(std::span<const std::string> ids, std::span<const FeatureVector> rows,
                               const labels::ClusterTable &clusters = labels::ClusterTable::builtin());

} // namespace triage::features
