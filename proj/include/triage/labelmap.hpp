#pragma once

#include "triage/corpus_types.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace triage::labels {

inline constexpr std::size_t kClusterCount = 66;
using LabelVector = std::array<std::uint8_t, kClusterCount>;

/// Case-folds, trims and collapses ':', '/', '-', '=' and runs of spaces into
/// single spaces. Lookup key for every label table.
std::string canonicalize_label(std::string_view raw);

struct Cluster {
  std::string representative;
  std::vector<std::string> members; // raw, as listed in the table
};

class ClusterTable {
public:
  static ClusterTable parse(std::string_view text);
  static const ClusterTable &builtin();

  const std::vector<Cluster> &clusters() const { return clusters_; }
  std::optional<std::size_t> cluster_of(std::string_view raw_label) const;
  std::optional<std::size_t> index_of_representative(std::string_view name) const;

private:
  std::vector<Cluster> clusters_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

class ObjectiveLabelMap {
public:
  static ObjectiveLabelMap parse(std::string_view text);
  static const ObjectiveLabelMap &builtin();

  std::optional<ObjectiveClass> class_of(std::string_view raw_label) const;
  const std::vector<std::string> &raw_labels(ObjectiveClass c) const {
    return raw_[static_cast<std::size_t>(c)];
  }

private:
  std::array<std::vector<std::string>, kObjectiveClassCount> raw_;
  std::unordered_map<std::string, ObjectiveClass> lookup_;
};

class PriorityLabelMap {
public:
  static PriorityLabelMap parse(std::string_view text);
  static const PriorityLabelMap &builtin();

  std::optional<PriorityClass> class_of(std::string_view raw_label) const;
  const std::vector<std::string> &raw_labels(PriorityClass c) const {
    return raw_[static_cast<std::size_t>(c)];
  }
  std::size_t size() const { return raw_[0].size() + raw_[1].size(); }

private:
  std::array<std::vector<std::string>, kPriorityClassCount> raw_;
  std::unordered_map<std::string, PriorityClass> lookup_;
};

/// The three tables together plus a checksum of their source text, recorded
/// in model artifacts.
struct LabelTables {
  ClusterTable clusters;
  ObjectiveLabelMap objective;
  PriorityLabelMap priority;
  std::string checksum;

  static const LabelTables &builtin();
  static LabelTables parse(std::string_view clusters, std::string_view objective,
                           std::string_view priority);
};

/// Mono-label rule: exactly one distinct objective class must match.
std::optional<ObjectiveClass> objective_of(std::span<const std::string> labels,
                                           const ObjectiveLabelMap &map = ObjectiveLabelMap::builtin());

/// High if any High label matches, else Low if any Low label matches.
std::optional<PriorityClass> priority_of(std::span<const std::string> labels,
                                         const PriorityLabelMap &map = PriorityLabelMap::builtin());

LabelVector label_features(std::span<const std::string> labels,
                           const ClusterTable &table = ClusterTable::builtin());

} // namespace triage::labels
