#include "triage/learn.hpp"

#include "triage/common.hpp"
#include "triage/embedded_data.hpp"

#include <algorithm>
#include <sstream>

namespace triage::learn {

KeywordClassifier KeywordClassifier::parse(std::string_view text) {
  KeywordClassifier k;
  std::optional<ObjectiveClass> section;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    if (t.rfind("[keywords]", 0) == 0) {
      section = parse_objective(trim(t.substr(10)));
      if (!section)
        fail(ErrorCode::Parse, "keyword rules line " + std::to_string(lineno) + ": unknown class");
      continue;
    }
    if (!section)
      fail(ErrorCode::Parse, "keyword rules line " + std::to_string(lineno) + ": entry outside a section");
    for (auto &w : split_whitespace(t)) {
      auto c = static_cast<std::size_t>(*section);
      auto [it, inserted] = k.lookup_.emplace(w, c);
      if (!inserted && it->second != c)
        fail(ErrorCode::Parse, "keyword '" + w + "' belongs to two classes");
      if (inserted)
        k.keywords_[c].push_back(w);
    }
  }
  return k;
}

const KeywordClassifier &KeywordClassifier::builtin() {
  static const KeywordClassifier k = parse(data::keyword_rules());
  return k;
}

std::array<double, kObjectiveClassCount>
KeywordClassifier::predict_proba(std::span<const std::string> tokens) const {
  std::array<std::size_t, kObjectiveClassCount> hits{};
  for (const auto &t : tokens)
    if (auto it = lookup_.find(t); it != lookup_.end())
      ++hits[it->second];
  std::size_t best = *std::max_element(hits.begin(), hits.end());
  std::array<double, kObjectiveClassCount> p{};
  std::size_t tied = 0;
  for (auto h : hits)
    tied += (h == best) ? 1 : 0;
  for (std::size_t c = 0; c < kObjectiveClassCount; ++c)
    p[c] = hits[c] == best ? 1.0 / static_cast<double>(tied) : 0.0;
  return p;
}

} // namespace triage::learn
