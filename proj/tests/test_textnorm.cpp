#include <doctest.h>

#include "test_util.hpp"
#include "triage/textnorm.hpp"

#include <fstream>
#include <set>

using namespace triage;
using namespace triage::text;

namespace {

std::vector<std::string> lines_of(const std::filesystem::path &p) {
  std::ifstream f(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(f, line);)
    out.push_back(line);
  return out;
}

std::string joined(const std::vector<std::string> &t) {
  std::string s;
  for (const auto &x : t)
    s += (s.empty() ? "" : " ") + x;
  return s;
}

} // namespace

TEST_SUITE("textnorm") {

TEST_CASE("golden file") {
  auto in = lines_of(testutil::data("textnorm/input.txt"));
  auto want = lines_of(testutil::data("textnorm/expected.txt"));
  REQUIRE(in.size() == 30);
  REQUIRE(want.size() == in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    INFO("line " << i + 1 << ": " << in[i]);
    CHECK(joined(normalize_pipeline(in[i], Source::Description).tokens) == want[i]);
  }
}

TEST_CASE("clean") {
  CHECK(clean("Fix this, please!!!") == "Fix this please");
  CHECK(clean("how does it work?") == "how does it work ?");
  CHECK(clean("") == "");
  CHECK(clean("build 123 failed v2") == "build failed v2");
  CHECK(clean("snake_case stays") == "snake_case stays");
  CHECK(clean("caf\xc3\xa9") == "caf");
}

TEST_CASE("abstraction") {
  CHECK(abstract_entities("see https://a.b/c for info") == "see <URL> for info");
  CHECK(abstract_entities("```int x=0;```") == "<CODE>");
  CHECK(abstract_entities("<URL>") == "<URL>");
  auto r = abstract_entities_counted("mail a@b.io or @bob, see http://x.io and `y`");
  CHECK(r.count(AbstractToken::Email) == 1);
  CHECK(r.count(AbstractToken::User) == 1);
  CHECK(r.count(AbstractToken::Url) == 1);
  CHECK(r.count(AbstractToken::Code) == 1);
  for (std::size_t i = 0; i < kAbstractTokenCount; ++i) {
    auto s = std::string(surface(static_cast<AbstractToken>(i)));
    CHECK(abstract_entities(s) == s);
    CHECK(parse_surface(s) == static_cast<AbstractToken>(i));
  }
}

TEST_CASE("identifier splitting") {
  CHECK(split_identifiers("camelCase") == std::vector<std::string>{"camel", "case"});
  CHECK(split_identifiers("parse_http_request") == std::vector<std::string>{"parse", "http", "request"});
  CHECK(split_identifiers("HTTPServer") == std::vector<std::string>{"http", "server"});
  CHECK(split_identifiers("<CODE>") == std::vector<std::string>{"<CODE>"});
  CHECK(split_identifiers("__init__") == std::vector<std::string>{"init"});
}

TEST_CASE("pipeline examples") {
  CHECK(normalize_pipeline("NOT working since update", Source::Title).tokens ==
        std::vector<std::string>{"not", "work", "since", "update"});
  CHECK(normalize_pipeline("the a an", Source::Title).tokens.empty());
  CHECK(normalize_pipeline("x", Source::Title).source == Source::Title);
}

TEST_CASE("lemmatizer") {
  const auto &l = Lemmatizer::builtin();
  CHECK(l.lemma("crashes") == "crash");
  CHECK(l.lemma("parsing") == "parse");
  CHECK(l.lemma("stopped") == "stop");
  CHECK(l.lemma("libraries") == "library");
  CHECK(l.lemma("went") == "go");
  CHECK(l.lemma("status") == "status");
  CHECK(l.lemma("class") == "class");
}

TEST_CASE("output tokens obey the invariants") {
  const char *docs[] = {"The parser does NOT handle 42 items, we must fix it!",
                        "Is this a regression? see https://x.org/a and `code` by @user",
                        "XMLParser_v2 crashed 3 times on 2021-01-01 at 10:00"};
  const auto &stop = StopwordList::builtin();
  std::set<std::string> retained;
  for (auto r : StopwordList::retained())
    retained.emplace(r);
  for (const char *d : docs) {
    auto toks = normalize_pipeline(d, Source::Description).tokens;
    std::set<std::string> before;
    for (const auto &w : split_whitespace(d))
      before.insert(w);
    std::set<std::string> after(toks.begin(), toks.end());
    CHECK(after.size() <= before.size());
    for (const auto &t : toks) {
      CHECK_FALSE(t.empty());
      CHECK(t.find(' ') == std::string::npos);
      CHECK_FALSE(std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }));
      if (!retained.count(t))
        CHECK_FALSE(stop.contains(t));
    }
  }
  for (auto r : StopwordList::retained())
    CHECK_FALSE(stop.contains(r));
}

}
