#pragma once

#include "triage/corpus_types.hpp"
#include "triage/labelmap.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace triage {

// Corpus files are JSON Lines, one IssueRecord per line. Schema version and
// provenance live in a sidecar `<file>.meta.json`.

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct LoadResult {
  Corpus corpus;
  std::vector<LineError> errors;
};

std::filesystem::path sidecar_path(const std::filesystem::path &corpus_file);

/// Malformed lines are collected in `errors`; with `strict` the first one
/// throws Error{Parse}. A sidecar with another schema version throws
/// Error{Schema}; a missing file throws Error{Io}.
LoadResult load_corpus(const std::filesystem::path &path, bool strict = false);
void save_corpus(const Corpus &corpus, const std::filesystem::path &path);

std::string issue_to_json(const IssueRecord &issue);
/// Throws Error{Schema} when a required key is missing or an invariant fails.
IssueRecord issue_from_json(std::string_view line);

struct FilterConfig {
  std::size_t min_text_length = 3;
  double non_english_threshold = 0.5;
  std::vector<std::string> excluded_clusters = {"duplicate", "invalid"};
};

struct FilterReport {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t short_text = 0;
  std::size_t excluded_label = 0;
  std::size_t non_english = 0;
  std::map<std::string, std::size_t> excluded_by_cluster;
  std::size_t removed() const { return short_text + excluded_label + non_english; }
};

/// Fraction of code points outside printable ASCII; ASCII whitespace is
/// ignored. Empty text yields 0.
double non_ascii_fraction(std::string_view text);

/// Rules are checked in order short text, excluded label, non-English; each
/// removed issue is counted under the first rule it violates.
std::pair<Corpus, FilterReport>
filter_corpus(const Corpus &corpus, const FilterConfig &rules = {},
              const labels::ClusterTable &clusters = labels::ClusterTable::builtin());

// --- splitting --------------------------------------------------------------

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  /// Classes with fewer than two members; placed wholly in the larger part.
  std::vector<int> undersized_classes;
};

/// Per-class seeded shuffle, then a prefix of round(count * ratio) goes to
/// train (halves round toward train). Both parts keep input order.
SplitIndices stratified_split_indices(std::span<const int> labels, double ratio,
                                      std::uint64_t seed);

/// Fold id in [0, k) for every element; class members are dealt round-robin
/// after a seeded shuffle so each fold mirrors the class mix.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k,
                                          std::uint64_t seed);

using LabelAccessor = std::function<std::optional<int>(const IssueRecord &)>;
LabelAccessor priority_target(const labels::PriorityLabelMap &map = labels::PriorityLabelMap::builtin());
LabelAccessor objective_target(const labels::ObjectiveLabelMap &map = labels::ObjectiveLabelMap::builtin());

struct CorpusSplit {
  Corpus train;
  Corpus test;
  std::vector<int> undersized_classes;
};

/// Throws Error{InvalidArgument} if an issue has no target or ratio is not
/// inside (0, 1).
CorpusSplit stratified_split(const Corpus &corpus, const LabelAccessor &target, double ratio,
                             std::uint64_t seed);

} // namespace triage
