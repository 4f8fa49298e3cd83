#pragma once

#include "triage/common.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace triage {

enum class ObjectiveClass { Bug = 0, Enhancement = 1, SupportDoc = 2 };
inline constexpr std::size_t kObjectiveClassCount = 3;
inline constexpr std::array<ObjectiveClass, 3> kObjectiveClasses = {
    ObjectiveClass::Bug, ObjectiveClass::Enhancement, ObjectiveClass::SupportDoc};

enum class PriorityClass { High = 0, Low = 1 };
inline constexpr std::size_t kPriorityClassCount = 2;
inline constexpr std::array<PriorityClass, 2> kPriorityClasses = {PriorityClass::High,
                                                                  PriorityClass::Low};

std::string_view to_string(ObjectiveClass c);
std::string_view to_string(PriorityClass c);
std::optional<ObjectiveClass> parse_objective(std::string_view s);
std::optional<PriorityClass> parse_priority(std::string_view s);

enum class IssueState { Open, Closed };

/// Ordinal encoding is the numeric association feature.
enum class Association { None = 0, Contributor = 1, Collaborator = 2, Member = 3, Owner = 4 };
std::string_view to_string(Association a);
std::optional<Association> parse_association(std::string_view s);

struct UserProfile {
  std::string login;
  std::uint64_t followers = 0;
  std::uint64_t following = 0;
  std::uint64_t public_repos = 0;
  std::uint64_t public_gists = 0;
  std::uint64_t issue_count = 0;
  std::uint64_t github_contributions = 0;
  Timestamp account_created_at{};
  std::uint64_t repo_contributions = 0;
  Association association = Association::None;
  bool operator==(const UserProfile &) const = default;
};

struct CommentRecord {
  std::string author_login;
  std::string body;
  Timestamp created_at{};
  bool operator==(const CommentRecord &) const = default;
};

struct EventRecord {
  std::string kind;
  Timestamp created_at{};
  bool operator==(const EventRecord &) const = default;
};

struct IssueRecord {
  std::string id;
  std::string repo;
  std::string title;       // raw, as fetched
  std::string description; // raw, as fetched
  IssueState state = IssueState::Closed;
  Timestamp created_at{};
  std::optional<Timestamp> closed_at;
  std::optional<Timestamp> updated_at;
  std::vector<std::string> labels;
  bool is_pull_request = false;
  bool milestone_present = false;
  bool assignee_present = false;
  std::vector<CommentRecord> comments;
  std::vector<EventRecord> events;
  UserProfile author;
  std::optional<std::string> closer_login;
  bool referenced_commit = false;
  bool hydration_failed = false;
  /// Unknown keys from the corpus file, kept verbatim (key -> JSON text).
  std::map<std::string, std::string> extra;

  bool operator==(const IssueRecord &) const = default;
};

struct Provenance {
  std::string source;
  std::string fetched_at;
  bool operator==(const Provenance &) const = default;
};

inline constexpr int kCorpusSchemaVersion = 1;

struct Corpus {
  std::vector<IssueRecord> issues;
  Provenance provenance;
  int schema_version = kCorpusSchemaVersion;
  bool operator==(const Corpus &) const = default;
};

} // namespace triage
