#pragma once

#include "triage/textnorm.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace triage::sentiment {

struct LexEntry {
  int strength = 0;          // -5..-1 or 1..5
  double subjectivity = 0.0; // 0..1
  bool operator==(const LexEntry &) const = default;
};

class Lexicon {
public:
  /// Throws Error{InvalidArgument} on out-of-range entries or a term that is
  /// both scored and a negator.
  Lexicon(std::unordered_map<std::string, LexEntry> terms,
          std::unordered_set<std::string> negators,
          std::unordered_map<std::string, double> intensifiers);

  /// Terms, negators and intensifiers are matched in lemmatized form.
  static Lexicon parse(std::string_view text,
                       const text::Lemmatizer &lemmatizer = text::Lemmatizer::builtin());
  static const Lexicon &builtin();

  const LexEntry *find(std::string_view token) const;
  bool is_negator(std::string_view token) const;
  std::optional<double> intensifier(std::string_view token) const;
  std::size_t size() const { return terms_.size(); }

  /// Same lexicon with every strength negated.
  Lexicon mirrored() const;
  /// Stable digest of the contents.
  std::string checksum() const;

private:
  std::unordered_map<std::string, LexEntry> terms_;
  std::unordered_set<std::string> negators_;
  std::unordered_map<std::string, double> intensifiers_;
};

struct DualScore {
  int positivity = 1;
  int negativity = -1;
  bool operator==(const DualScore &) const = default;
};

struct PolarityScore {
  double polarity = 0.0;
  double subjectivity = 0.0;
};

struct SentimentScores {
  int positivity = 1;
  int negativity = -1;
  double polarity = 0.0;
  double subjectivity = 0.0;
};

/// Strongest positive and negative term strengths. A negator up to two tokens
/// before a term flips it; an intensifier in the same window scales it.
DualScore score_dual(std::span<const std::string> tokens, const Lexicon &lex = Lexicon::builtin());
PolarityScore score_polarity_subjectivity(std::span<const std::string> tokens,
                                          const Lexicon &lex = Lexicon::builtin());
SentimentScores score(std::span<const std::string> tokens, const Lexicon &lex = Lexicon::builtin());

inline DualScore score_dual(const text::TokenizedDoc &doc, const Lexicon &lex = Lexicon::builtin()) {
  return score_dual(std::span<const std::string>(doc.tokens), lex);
}
inline PolarityScore score_polarity_subjectivity(const text::TokenizedDoc &doc,
                                                 const Lexicon &lex = Lexicon::builtin()) {
  return score_polarity_subjectivity(std::span<const std::string>(doc.tokens), lex);
}

} // namespace triage::sentiment
