#include "triage/textnorm.hpp"

#include "triage/common.hpp"
#include "triage/embedded_data.hpp"

#include <cctype>
#include <regex>
#include <sstream>

namespace triage::text {

namespace {

constexpr std::array<std::string_view, kAbstractTokenCount> kSurfaces = {
    "<CODE>", "<URL>", "<EMAIL>", "<PATH>", "<DATE>", "<TIME>", "<USER>", "<FUNC>", "<MD>"};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Appends `token` in place of a matched span, padding with single spaces so
// the token never fuses with neighbouring text.
void emit_token(std::string &out, std::string_view rest_after, AbstractToken token) {
  if (!out.empty() && !is_space(out.back()))
    out.push_back(' ');
  out += surface(token);
  if (!rest_after.empty() && !is_space(rest_after.front()))
    out.push_back(' ');
}

// --- procedural rules -------------------------------------------------------

std::string replace_fenced_code(std::string_view in, std::size_t &count) {
  std::string out;
  std::size_t pos = 0;
  while (pos < in.size()) {
    std::size_t open = std::string_view::npos;
    std::string_view fence;
    for (std::string_view f : {"```", "~~~"}) {
      auto p = in.find(f, pos);
      if (p < open) {
        open = p;
        fence = f;
      }
    }
    if (open == std::string_view::npos)
      break;
    auto close = in.find(fence, open + fence.size());
    // An unterminated fence swallows the rest of the text, as renderers do.
    std::size_t end = close == std::string_view::npos ? in.size() : close + fence.size();
    out.append(in.substr(pos, open - pos));
    emit_token(out, in.substr(end), AbstractToken::Code);
    ++count;
    pos = end;
  }
  out.append(in.substr(pos));
  return out;
}

std::string replace_inline_code(std::string_view in, std::size_t &count) {
  std::string out;
  std::size_t pos = 0;
  while (pos < in.size()) {
    auto open = in.find('`', pos);
    if (open == std::string_view::npos)
      break;
    auto close = in.find('`', open + 1);
    auto newline = in.find('\n', open + 1);
    if (close == std::string_view::npos || close == open + 1 || newline < close) {
      out.append(in.substr(pos, open + 1 - pos));
      pos = open + 1;
      continue;
    }
    out.append(in.substr(pos, open - pos));
    emit_token(out, in.substr(close + 1), AbstractToken::Code);
    ++count;
    pos = close + 1;
  }
  out.append(in.substr(pos));
  return out;
}

// Markdown: leading block markers (headings, quotes, bullets, numbered items,
// horizontal rules) and inline markers (**, ~~, table pipes, checkboxes).
std::string replace_markdown(std::string_view in, std::size_t &count) {
  std::string out;
  std::size_t line_start = 0;
  while (line_start <= in.size()) {
    auto nl = in.find('\n', line_start);
    std::string_view line = in.substr(line_start, nl == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : nl - line_start);
    std::string converted;
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
      converted.push_back(line[i++]);

    // Horizontal rule: three or more of the same marker and nothing else.
    {
      std::string_view body = line.substr(i);
      char marker = body.empty() ? '\0' : body.front();
      if (marker == '-' || marker == '*' || marker == '_') {
        std::size_t n = 0;
        bool only = true;
        for (char c : body) {
          if (c == marker)
            ++n;
          else if (c != ' ' && c != '\t')
            only = false;
        }
        if (only && n >= 3) {
          converted += surface(AbstractToken::Md);
          ++count;
          i = line.size();
        }
      }
    }

    for (;;) {
      std::string_view body = line.substr(i);
      std::size_t len = 0;
      if (!body.empty() && body[0] == '#') {
        while (len < body.size() && body[len] == '#')
          ++len;
        if (len > 6 || len >= body.size() || !is_space(body[len]))
          len = 0;
      } else if (!body.empty() && body[0] == '>') {
        while (len < body.size() && body[len] == '>')
          ++len;
      } else if (body.size() >= 2 && (body[0] == '-' || body[0] == '*' || body[0] == '+') &&
                 is_space(body[1])) {
        len = 1;
      } else if (!body.empty() && std::isdigit(static_cast<unsigned char>(body[0]))) {
        std::size_t d = 0;
        while (d < body.size() && d < 3 && std::isdigit(static_cast<unsigned char>(body[d])))
          ++d;
        if (d + 1 < body.size() && (body[d] == '.' || body[d] == ')') && is_space(body[d + 1]))
          len = d + 1;
      }
      if (len == 0)
        break;
      if (!converted.empty() && !is_space(converted.back()))
        converted.push_back(' ');
      converted += surface(AbstractToken::Md);
      ++count;
      i += len;
      if (i < line.size() && !is_space(line[i]))
        converted.push_back(' ');
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
        converted.push_back(line[i++]);
    }

    // Inline markers.
    while (i < line.size()) {
      std::string_view rest = line.substr(i);
      std::size_t len = 0;
      if (rest.starts_with("**") || rest.starts_with("~~"))
        len = 2;
      else if (rest.front() == '|')
        len = 1;
      else if (rest.size() >= 3 && rest[0] == '[' && rest[2] == ']' &&
               (rest[1] == ' ' || rest[1] == 'x' || rest[1] == 'X'))
        len = 3;
      if (len > 0) {
        if (!converted.empty() && !is_space(converted.back()))
          converted.push_back(' ');
        converted += surface(AbstractToken::Md);
        ++count;
        i += len;
        if (i < line.size() && !is_space(line[i]))
          converted.push_back(' ');
      } else {
        converted.push_back(line[i++]);
      }
    }
    out += converted;
    if (nl == std::string_view::npos)
      break;
    out.push_back('\n');
    line_start = nl + 1;
  }
  return out;
}

// --- regex rules ------------------------------------------------------------

struct RegexRule {
  AbstractToken token;
  std::regex pattern;
  // Characters that may not immediately precede a match.
  bool (*reject_prev)(char);
  bool trim_trailing_punct;
};

bool prev_none(char) { return false; }
bool prev_wordish(char c) { return is_word_char(c) || c == '.' || c == '/' || c == '-'; }
bool prev_alnum(char c) { return is_word_char(c); }

const std::vector<RegexRule> &regex_rules() {
  using std::regex;
  static const std::vector<RegexRule> rules = [] {
    const auto flags = regex::ECMAScript | regex::optimize;
    std::vector<RegexRule> r;
    r.push_back({AbstractToken::Url,
                 regex(R"((?:[Hh][Tt][Tt][Pp][Ss]?|[Ff][Tt][Pp])://[^\s<>"'`]+|www\.[A-Za-z0-9-]+\.[^\s<>"'`]+)", flags),
                 prev_alnum, true});
    r.push_back({AbstractToken::Email,
                 regex(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})", flags),
                 prev_none, false});
    r.push_back({AbstractToken::User, regex(R"(@[A-Za-z0-9][A-Za-z0-9-]*)", flags), prev_alnum,
                 false});
    r.push_back({AbstractToken::Path,
                 regex(R"([A-Za-z]:\\[^\s<>"'|?*]+|(?:~|\.{1,2})?/(?:[A-Za-z0-9_.-]+/)+[A-Za-z0-9_.-]*|[A-Za-z0-9_.-]+(?:/[A-Za-z0-9_.-]+)+\.[A-Za-z0-9]{1,6}\b)", flags),
                 prev_wordish, true});
    r.push_back({AbstractToken::Func,
                 regex(R"([A-Za-z_][A-Za-z0-9_]*(?:(?:\.|::|->)[A-Za-z_][A-Za-z0-9_]*)*\([^()<>\n]{0,80}\))", flags),
                 prev_wordish, false});
    r.push_back({AbstractToken::Date,
                 regex(R"(\b(?:\d{4}-\d{1,2}-\d{1,2}(?:[T ]\d{1,2}:\d{2}(?::\d{2}(?:\.\d+)?)?(?:Z|[+-]\d{2}:?\d{2})?)?|\d{1,2}[/.-]\d{1,2}[/.-]\d{4}|\d{1,2}/\d{1,2}/\d{2})\b)", flags),
                 prev_none, false});
    r.push_back({AbstractToken::Time,
                 regex(R"(\b\d{1,2}:\d{2}(?::\d{2}(?:\.\d+)?)?(?:\s?[AaPp][Mm]\b)?)", flags), prev_none,
                 false});
    return r;
  }();
  return rules;
}

std::string apply_regex_rule(const RegexRule &rule, const std::string &in, std::size_t &count) {
  std::string out;
  auto begin = in.cbegin();
  auto cursor = begin;
  auto search_from = begin;
  std::smatch m;
  while (search_from != in.cend() &&
         std::regex_search(search_from, in.cend(), m, rule.pattern)) {
    auto mb = m[0].first;
    auto me = m[0].second;
    if (mb != begin && rule.reject_prev(*(mb - 1))) {
      search_from = mb + 1;
      continue;
    }
    if (rule.trim_trailing_punct) {
      while (me > mb + 1) {
        char c = *(me - 1);
        if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')' ||
            c == ']' || c == '}' || c == '\'' || c == '"')
          --me;
        else
          break;
      }
    }
    out.append(cursor, mb);
    emit_token(out, std::string_view(&*me, static_cast<std::size_t>(in.cend() - me)),
               rule.token);
    ++count;
    cursor = me;
    search_from = me;
  }
  out.append(cursor, in.cend());
  return out;
}

AbstractionResult abstract_once(std::string_view text) {
  AbstractionResult r;
  auto &c = r.counts;
  std::string s = replace_fenced_code(text, c[static_cast<std::size_t>(AbstractToken::Code)]);
  s = replace_inline_code(s, c[static_cast<std::size_t>(AbstractToken::Code)]);
  for (const auto &rule : regex_rules())
    s = apply_regex_rule(rule, s, c[static_cast<std::size_t>(rule.token)]);
  s = replace_markdown(s, c[static_cast<std::size_t>(AbstractToken::Md)]);
  r.text = std::move(s);
  return r;
}

} // namespace

std::string_view surface(AbstractToken token) { return kSurfaces[static_cast<std::size_t>(token)]; }

std::optional<AbstractToken> parse_surface(std::string_view text) {
  for (std::size_t i = 0; i < kSurfaces.size(); ++i)
    if (kSurfaces[i] == text)
      return static_cast<AbstractToken>(i);
  return std::nullopt;
}

std::string_view to_string(Source s) { return s == Source::Title ? "title" : "description"; }

AbstractionResult abstract_entities_counted(std::string_view text) {
  AbstractionResult result = abstract_once(text);
  // Replacement padding can, in rare layouts, expose a new match; iterate to a
  // fixpoint so the operation is idempotent.
  for (int round = 0; round < 8; ++round) {
    AbstractionResult again = abstract_once(result.text);
    if (again.text == result.text)
      break;
    for (std::size_t i = 0; i < kAbstractTokenCount; ++i)
      result.counts[i] += again.counts[i];
    result.text = std::move(again.text);
  }
  return result;
}

std::string abstract_entities(std::string_view text) {
  return abstract_entities_counted(text).text;
}

std::string clean(std::string_view text) {
  std::string spaced;
  spaced.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == '<') {
      auto close = text.find('>', i);
      if (close != std::string_view::npos && close - i <= 7 &&
          is_abstract_token(text.substr(i, close - i + 1))) {
        spaced.push_back(' ');
        spaced.append(text.substr(i, close - i + 1));
        spaced.push_back(' ');
        i = close + 1;
        continue;
      }
    }
    if (c >= 0x80) {
      // non-ASCII: dropped
    } else if (std::isalnum(c) || c == '_') {
      spaced.push_back(static_cast<char>(c));
    } else if (c == '?') {
      spaced += " ? ";
    } else if (c == '\'') {
      // apostrophes join contractions: don't -> dont
    } else {
      spaced.push_back(' ');
    }
    ++i;
  }
  std::string out;
  for (auto &word : split_whitespace(spaced)) {
    bool digits_or_underscores = true;
    for (char ch : word)
      if (!std::isdigit(static_cast<unsigned char>(ch)) && ch != '_')
        digits_or_underscores = false;
    if (digits_or_underscores)
      continue;
    if (!out.empty())
      out.push_back(' ');
    out += word;
  }
  return out;
}

std::vector<std::string> split_identifiers(std::string_view token) {
  if (is_abstract_token(token))
    return {std::string(token)};
  std::vector<std::string> parts;
  std::string current;
  auto flush = [&] {
    if (!current.empty())
      parts.push_back(to_lower(current));
    current.clear();
  };
  auto upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
  auto lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
  auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t i = 0; i < token.size(); ++i) {
    char c = token[i];
    if (c == '_') {
      flush();
      continue;
    }
    if (!current.empty() && upper(c)) {
      char prev = current.back();
      bool next_lower = i + 1 < token.size() && lower(token[i + 1]);
      // fooBar | ab2Cd | HTTPServer (split before the 'S')
      if (lower(prev) || digit(prev) || (upper(prev) && next_lower))
        flush();
    }
    current.push_back(c);
  }
  flush();
  return parts;
}

// --- lemmatizer -------------------------------------------------------------

Lemmatizer Lemmatizer::parse(std::string_view table) {
  Lemmatizer lem;
  std::istringstream in{std::string(table)};
  std::string line, section;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#')
      continue;
    if (line.front() == '[') {
      section = line;
      continue;
    }
    auto words = split_whitespace(line);
    if (section == "[irregular]" && words.size() == 2)
      lem.irregular_[words[0]] = words[1];
    else if (section == "[protected]" && words.size() == 1)
      lem.protected_.insert(words[0]);
    else if (section == "[e-final]" && words.size() == 1)
      lem.irregular_.emplace("\x01" + words[0], words[0]);
    else
      fail(ErrorCode::Parse, "lemma table: bad line '" + line + "'");
  }
  return lem;
}

const Lemmatizer &Lemmatizer::builtin() {
  static const Lemmatizer lem = parse(data::lemma_exceptions());
  return lem;
}

namespace {

bool has_vowel(std::string_view s) {
  return s.find_first_of("aeiouy") != std::string_view::npos;
}

bool is_consonant(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) &&
         std::string_view("aeiou").find(c) == std::string_view::npos;
}

} // namespace

std::string Lemmatizer::lemma(std::string_view word) const {
  std::string w(word);
  if (auto it = irregular_.find(w); it != irregular_.end())
    return it->second;
  if (protected_.count(w) || w.size() <= 3)
    return w;
  for (char c : w)
    if (!std::islower(static_cast<unsigned char>(c)))
      return w;

  auto e_final = [&](const std::string &stem) { return irregular_.count("\x01" + stem) > 0; };
  // Repairs a stem left after removing -ed / -ing.
  auto fix_stem = [&](std::string stem) -> std::optional<std::string> {
    if (e_final(stem + "e"))
      return stem + "e";
    if (stem.size() < 2 || !has_vowel(stem))
      return std::nullopt;
    std::size_t n = stem.size();
    if (n >= 4 && stem[n - 1] == stem[n - 2] && is_consonant(stem[n - 1]) &&
        std::string_view("lszf").find(stem[n - 1]) == std::string_view::npos)
      stem.pop_back();
    return stem;
  };
  auto ends = [&](std::string_view suf) { return w.size() > suf.size() && w.ends_with(suf); };
  auto cut = [&](std::size_t n) { return w.substr(0, w.size() - n); };

  if (ends("ies") && w.size() > 4)
    return cut(3) + "y";
  if (ends("ied") && w.size() > 4)
    return cut(3) + "y";
  if (ends("ing")) {
    auto r = fix_stem(cut(3));
    return r ? *r : w;
  }
  if (ends("eed"))
    return w;
  if (ends("ed")) {
    auto r = fix_stem(cut(2));
    return r ? *r : w;
  }
  if (ends("sses"))
    return cut(2);
  if (ends("shes") || ends("ches") || ends("xes") || ends("zes"))
    return cut(2);
  if (ends("ss") || ends("us") || ends("is"))
    return w;
  if (ends("s"))
    return cut(1);
  if (ends("ly") && w.size() > 5) {
    if (ends("ably") || ends("ibly"))
      return cut(1) + "e";
    if (ends("ically"))
      return cut(4);
    if (ends("ily"))
      return cut(3) + "y";
    return cut(2);
  }
  return w;
}

// --- stopwords ----------------------------------------------------------------

StopwordList StopwordList::parse(std::string_view text) {
  StopwordList sw;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    for (auto &w : split_whitespace(t))
      sw.words_.insert(to_lower(w));
  }
  for (auto keep : retained())
    sw.words_.erase(std::string(keep));
  return sw;
}

const StopwordList &StopwordList::builtin() {
  static const StopwordList sw = parse(data::stopwords());
  return sw;
}

bool StopwordList::contains(std::string_view lower_word) const {
  return words_.count(std::string(lower_word)) > 0;
}

const std::array<std::string_view, 6> &StopwordList::retained() {
  static constexpr std::array<std::string_view, 6> words = {"not",  "no",     "never",
                                                            "must", "should", "cannot"};
  return words;
}

// --- pipeline ---------------------------------------------------------------

const TextPipeline &TextPipeline::builtin() {
  static const TextPipeline p{StopwordList::builtin(), Lemmatizer::builtin()};
  return p;
}

TokenizedDoc TextPipeline::normalize(std::string_view raw, Source source) const {
  TokenizedDoc doc;
  doc.source = source;
  std::string cleaned = clean(abstract_entities(raw));
  for (auto &word : split_whitespace(cleaned)) {
    for (auto &part : split_identifiers(word)) {
      if (is_abstract_token(part)) {
        doc.tokens.push_back(part);
        continue;
      }
      if (stopwords_.contains(part))
        continue;
      std::string lem = to_lower(lemmatizer_.lemma(part));
      bool digits_only = !lem.empty();
      for (char c : lem)
        if (!std::isdigit(static_cast<unsigned char>(c)))
          digits_only = false;
      if (lem.empty() || digits_only)
        continue;
      doc.tokens.push_back(std::move(lem));
    }
  }
  return doc;
}

} // namespace triage::text
