#include "triage/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace triage {

namespace {

std::map<int, std::vector<std::size_t>> group_by_class(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i)
    groups[labels[i]].push_back(i);
  return groups;
}

} // namespace

SplitIndices stratified_split_indices(std::span<const int> labels, double ratio,
                                      std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    fail(ErrorCode::InvalidArgument, "split ratio must lie strictly between 0 and 1");
  SplitIndices out;
  std::mt19937_64 rng(seed);
  for (auto &[cls, members] : group_by_class(labels)) {
    std::shuffle(members.begin(), members.end(), rng);
    std::size_t n_train;
    if (members.size() < 2) {
      out.undersized_classes.push_back(cls);
      n_train = ratio >= 0.5 ? members.size() : 0;
    } else {
      n_train = static_cast<std::size_t>(
          std::floor(static_cast<double>(members.size()) * ratio + 0.5));
    }
    out.train.insert(out.train.end(), members.begin(), members.begin() + n_train);
    out.test.insert(out.test.end(), members.begin() + n_train, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2)
    fail(ErrorCode::InvalidArgument, "fold count must be at least 2");
  std::vector<std::size_t> fold(labels.size(), 0);
  std::mt19937_64 rng(seed);
  std::size_t offset = 0;
  for (auto &[cls, members] : group_by_class(labels)) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j)
      fold[members[j]] = (offset + j) % k;
    offset += members.size();
  }
  return fold;
}

LabelAccessor priority_target(const labels::PriorityLabelMap &map) {
  return [&map](const IssueRecord &r) -> std::optional<int> {
    auto c = labels::priority_of(r.labels, map);
    if (!c)
      return std::nullopt;
    return static_cast<int>(*c);
  };
}

LabelAccessor objective_target(const labels::ObjectiveLabelMap &map) {
  return [&map](const IssueRecord &r) -> std::optional<int> {
    auto c = labels::objective_of(r.labels, map);
    if (!c)
      return std::nullopt;
    return static_cast<int>(*c);
  };
}

CorpusSplit stratified_split(const Corpus &corpus, const LabelAccessor &target, double ratio,
                             std::uint64_t seed) {
  std::vector<int> y;
  y.reserve(corpus.issues.size());
  for (const auto &issue : corpus.issues) {
    auto t = target(issue);
    if (!t)
      fail(ErrorCode::InvalidArgument, "issue '" + issue.id + "' has no target label");
    y.push_back(*t);
  }
  auto idx = stratified_split_indices(y, ratio, seed);
  CorpusSplit out;
  out.undersized_classes = idx.undersized_classes;
  for (auto *part : {&out.train, &out.test}) {
    part->provenance = corpus.provenance;
    part->schema_version = corpus.schema_version;
  }
  for (auto i : idx.train)
    out.train.issues.push_back(corpus.issues[i]);
  for (auto i : idx.test)
    out.test.issues.push_back(corpus.issues[i]);
  return out;
}

} // namespace triage
