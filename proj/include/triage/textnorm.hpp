#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace triage::text {

enum class AbstractToken { Code, Url, Email, Path, Date, Time, User, Func, Md };
inline constexpr std::size_t kAbstractTokenCount = 9;

/// Rendered form, e.g. "<CODE>". Surfaces never match an abstraction pattern.
std::string_view surface(AbstractToken token);
std::optional<AbstractToken> parse_surface(std::string_view text);
inline bool is_abstract_token(std::string_view text) { return parse_surface(text).has_value(); }

enum class Source { Title, Description };
std::string_view to_string(Source);

struct TokenizedDoc {
  std::vector<std::string> tokens;
  Source source = Source::Description;
  bool operator==(const TokenizedDoc &) const = default;
};

struct AbstractionResult {
  std::string text;
  std::array<std::size_t, kAbstractTokenCount> counts{};
  std::size_t count(AbstractToken t) const { return counts[static_cast<std::size_t>(t)]; }
};

// Replaces code, URLs, emails, user names, paths, function calls, dates,
// times and markdown symbols with abstract tokens. Rule order is fixed:
// fenced code, inline code, URL, email, user, path, function call, date,
// time, markdown. Runs on raw text, before clean().
AbstractionResult abstract_entities_counted(std::string_view text);
std::string abstract_entities(std::string_view text);

// Drops non-ASCII bytes, punctuation (except '?', which becomes a standalone
// token) and digit-only words. Keeps casing, underscores and abstract tokens.
std::string clean(std::string_view text);

// Splits at underscores, lower-to-upper transitions and acronym-to-word
// transitions; returns lowercase parts. Abstract tokens pass through whole.
std::vector<std::string> split_identifiers(std::string_view token);

/// Suffix-stripping lemmatizer over lowercase words.
class Lemmatizer {
public:
  static const Lemmatizer &builtin();
  static Lemmatizer parse(std::string_view table);

  std::string lemma(std::string_view word) const;

private:
  std::unordered_map<std::string, std::string> irregular_;
  std::unordered_set<std::string> protected_;
};

class StopwordList {
public:
  static const StopwordList &builtin();
  static StopwordList parse(std::string_view text);

  bool contains(std::string_view lower_word) const;
  const std::unordered_set<std::string> &words() const { return words_; }

  /// Words kept by the pipeline even though they are function words.
  static const std::array<std::string_view, 6> &retained();

private:
  std::unordered_set<std::string> words_;
};

class TextPipeline {
public:
  TextPipeline(StopwordList stopwords, Lemmatizer lemmatizer)
      : stopwords_(std::move(stopwords)), lemmatizer_(std::move(lemmatizer)) {}
  static const TextPipeline &builtin();

  // abstract -> clean -> whitespace tokenize -> split identifiers ->
  // stopword removal -> lemmatize -> lowercase.
  TokenizedDoc normalize(std::string_view raw, Source source) const;

  const Lemmatizer &lemmatizer() const { return lemmatizer_; }
  const StopwordList &stopwords() const { return stopwords_; }

private:
  StopwordList stopwords_;
  Lemmatizer lemmatizer_;
};

inline TokenizedDoc normalize_pipeline(std::string_view raw, Source source) {
  return TextPipeline::builtin().normalize(raw, source);
}

} // namespace triage::text
