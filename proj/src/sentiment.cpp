#include "triage/sentiment.hpp"

#include "triage/common.hpp"
#include "triage/embedded_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace triage::sentiment {

Lexicon::Lexicon(std::unordered_map<std::string, LexEntry> terms,
                 std::unordered_set<std::string> negators,
                 std::unordered_map<std::string, double> intensifiers)
    : terms_(std::move(terms)), negators_(std::move(negators)),
      intensifiers_(std::move(intensifiers)) {
  for (const auto &[term, e] : terms_) {
    if (e.strength == 0 || e.strength < -5 || e.strength > 5)
      fail(ErrorCode::InvalidArgument, "lexicon term '" + term + "' has strength out of range");
    if (!(e.subjectivity >= 0.0 && e.subjectivity <= 1.0))
      fail(ErrorCode::InvalidArgument, "lexicon term '" + term + "' has subjectivity out of range");
    if (negators_.count(term))
      fail(ErrorCode::InvalidArgument, "lexicon term '" + term + "' is also a negator");
  }
  for (const auto &[term, m] : intensifiers_)
    if (!(m > 0.0) || !std::isfinite(m))
      fail(ErrorCode::InvalidArgument, "intensifier '" + term + "' needs a positive multiplier");
}

Lexicon Lexicon::parse(std::string_view text, const text::Lemmatizer &lemmatizer) {
  std::unordered_map<std::string, LexEntry> terms;
  std::unordered_set<std::string> negators;
  std::unordered_map<std::string, double> intensifiers;
  enum class Section { None, Terms, Negators, Intensifiers } section = Section::None;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto bad = [&](const std::string &why) {
    fail(ErrorCode::Parse, "sentiment lexicon line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    if (t == "[terms]") { section = Section::Terms; continue; }
    if (t == "[negators]") { section = Section::Negators; continue; }
    if (t == "[intensifiers]") { section = Section::Intensifiers; continue; }
    auto parts = split_whitespace(t);
    switch (section) {
    case Section::None:
      bad("entry outside a section");
      break;
    case Section::Terms: {
      if (parts.size() != 3)
        bad("expected '<term> <strength> <subjectivity>'");
      LexEntry e;
      try {
        e.strength = std::stoi(parts[1]);
        e.subjectivity = std::stod(parts[2]);
      } catch (const std::exception &) {
        bad("non-numeric value");
      }
      auto key = lemmatizer.lemma(to_lower(parts[0]));
      auto [it, inserted] = terms.emplace(key, e);
      if (!inserted && std::abs(e.strength) > std::abs(it->second.strength))
        it->second = e;
      break;
    }
    case Section::Negators:
      if (parts.size() != 1)
        bad("expected a single negator");
      negators.insert(to_lower(parts[0]));
      negators.insert(lemmatizer.lemma(to_lower(parts[0])));
      break;
    case Section::Intensifiers: {
      if (parts.size() != 2)
        bad("expected '<term> <multiplier>'");
      double m = 0;
      try {
        m = std::stod(parts[1]);
      } catch (const std::exception &) {
        bad("non-numeric multiplier");
      }
      intensifiers[to_lower(parts[0])] = m;
      intensifiers[lemmatizer.lemma(to_lower(parts[0]))] = m;
      break;
    }
    }
  }
  return Lexicon(std::move(terms), std::move(negators), std::move(intensifiers));
}

const Lexicon &Lexicon::builtin() {
  static const Lexicon lex = parse(data::sentiment_lexicon());
  return lex;
}

const LexEntry *Lexicon::find(std::string_view token) const {
  auto it = terms_.find(std::string(token));
  return it == terms_.end() ? nullptr : &it->second;
}

bool Lexicon::is_negator(std::string_view token) const {
  return negators_.count(std::string(token)) > 0;
}

std::optional<double> Lexicon::intensifier(std::string_view token) const {
  auto it = intensifiers_.find(std::string(token));
  if (it == intensifiers_.end())
    return std::nullopt;
  return it->second;
}

Lexicon Lexicon::mirrored() const {
  auto terms = terms_;
  for (auto &[k, e] : terms)
    e.strength = -e.strength;
  return Lexicon(std::move(terms), negators_, intensifiers_);
}

std::string Lexicon::checksum() const {
  std::vector<std::string> lines;
  for (const auto &[k, e] : terms_) {
    std::ostringstream os;
    os << "t " << k << ' ' << e.strength << ' ' << e.subjectivity;
    lines.push_back(os.str());
  }
  for (const auto &k : negators_)
    lines.push_back("n " + k);
  for (const auto &[k, m] : intensifiers_) {
    std::ostringstream os;
    os << "i " << k << ' ' << m;
    lines.push_back(os.str());
  }
  std::sort(lines.begin(), lines.end());
  std::string joined;
  for (const auto &l : lines)
    joined += l + "\n";
  return sha256_hex(joined);
}

namespace {

struct Hit {
  int strength;
  double subjectivity;
};

std::vector<Hit> scored_terms(std::span<const std::string> tokens, const Lexicon &lex) {
  std::vector<Hit> hits;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto *e = lex.find(tokens[i]);
    if (!e)
      continue;
    bool negated = false;
    double mult = 1.0;
    bool have_mult = false;
    for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
      const auto &prev = tokens[i - back];
      if (lex.is_negator(prev))
        negated = true;
      if (!have_mult) {
        if (auto m = lex.intensifier(prev)) {
          mult = *m;
          have_mult = true;
        }
      }
    }
    double s = static_cast<double>(e->strength) * mult;
    int magnitude = std::clamp(static_cast<int>(std::lround(std::abs(s))), 1, 5);
    int strength = e->strength > 0 ? magnitude : -magnitude;
    if (negated)
      strength = -strength;
    hits.push_back({strength, e->subjectivity});
  }
  return hits;
}

} // namespace

DualScore score_dual(std::span<const std::string> tokens, const Lexicon &lex) {
  DualScore out;
  for (const auto &h : scored_terms(tokens, lex)) {
    if (h.strength > 0)
      out.positivity = std::max(out.positivity, h.strength);
    else
      out.negativity = std::min(out.negativity, h.strength);
  }
  return out;
}

PolarityScore score_polarity_subjectivity(std::span<const std::string> tokens, const Lexicon &lex) {
  auto hits = scored_terms(tokens, lex);
  PolarityScore out;
  if (hits.empty())
    return out;
  double pol = 0.0, subj = 0.0;
  for (const auto &h : hits) {
    pol += static_cast<double>(h.strength) / 5.0;
    subj += h.subjectivity;
  }
  auto n = static_cast<double>(hits.size());
  out.polarity = std::clamp(pol / n, -1.0, 1.0);
  out.subjectivity = std::clamp(subj / n, 0.0, 1.0);
  return out;
}

SentimentScores score(std::span<const std::string> tokens, const Lexicon &lex) {
  auto d = score_dual(tokens, lex);
  auto p = score_polarity_subjectivity(tokens, lex);
  return {d.positivity, d.negativity, p.polarity, p.subjectivity};
}

} // namespace triage::sentiment
