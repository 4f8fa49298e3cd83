#pragma once

#include "triage/common.hpp"
#include "triage/corpus_types.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testutil {

inline std::filesystem::path data(const std::string &rel) { return std::filesystem::path(TRIAGE_TEST_DATA) / rel; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("triage_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline triage::IssueRecord make_issue(const std::string &id, const std::string &title, const std::string &desc,
                                      std::vector<std::string> labels = {}) {
  triage::IssueRecord r;
  r.id = id;
  r.repo = "o/r";
  r.title = title;
  r.description = desc;
  r.created_at = triage::parse_timestamp("2021-01-01T00:00:00Z");
  r.closed_at = triage::parse_timestamp("2021-01-02T00:00:00Z");
  r.labels = std::move(labels);
  r.author.login = "alice";
  r.author.account_created_at = triage::parse_timestamp("2019-01-01T00:00:00Z");
  return r;
}

} // namespace testutil
