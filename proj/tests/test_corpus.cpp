#include <doctest.h>

#include "test_util.hpp"
#include "triage/corpus.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>

using namespace triage;
using testutil::make_issue;

namespace {

Corpus sample_corpus() {
  Corpus c;
  auto a = make_issue("o/r#1", "App crashes on start", "Stack trace attached", {"bug", "priority: high"});
  a.comments.push_back({"bob", "same here", parse_timestamp("2021-01-01T05:00:00Z")});
  a.events.push_back({"labeled", parse_timestamp("2021-01-01T01:00:00Z")});
  a.closer_login = "bob";
  a.updated_at = parse_timestamp("2021-01-03T00:00:00Z");
  auto b = make_issue("o/r#2", "Add dark theme", "Would be nice", {"enhancement"});
  b.state = IssueState::Open;
  b.closed_at.reset();
  c.issues = {a, b};
  c.provenance = {"unit test", "2021-05-05T00:00:00Z"};
  return c;
}

} // namespace

TEST_SUITE("corpus") {

TEST_CASE("save and load round-trip") {
  auto dir = testutil::temp_dir("corpus_rt");
  auto c = sample_corpus();
  save_corpus(c, dir / "c.jsonl");
  CHECK(std::filesystem::exists(sidecar_path(dir / "c.jsonl")));
  auto r = load_corpus(dir / "c.jsonl");
  CHECK(r.errors.empty());
  CHECK(r.corpus == c);
}

TEST_CASE("unknown keys survive a round trip") {
  auto line = issue_to_json(sample_corpus().issues[0]);
  auto j = nlohmann::json::parse(line);
  j["reactions"] = {{"+1", 3}};
  auto back = issue_from_json(j.dump());
  REQUIRE(back.extra.count("reactions") == 1);
  CHECK(nlohmann::json::parse(issue_to_json(back))["reactions"]["+1"] == 3);
}

TEST_CASE("schema violations are rejected") {
  auto good = nlohmann::json::parse(issue_to_json(sample_corpus().issues[0]));
  auto bad = [&](auto mutate) {
    auto j = good;
    mutate(j);
    return j.dump();
  };
  CHECK_THROWS_AS(issue_from_json(bad([](auto &j) { j.erase("title"); })), Error);
  CHECK_THROWS_AS(issue_from_json(bad([](auto &j) { j["state"] = "merged"; })), Error);
  CHECK_THROWS_AS(issue_from_json(bad([](auto &j) { j["closed_at"] = "2020-01-01T00:00:00Z"; })), Error);
  CHECK_THROWS_AS(issue_from_json(bad([](auto &j) { j["labels"] = {"Bug", "bug"}; })), Error);
  CHECK_THROWS_AS(issue_from_json(bad([](auto &j) { j["author"]["followers"] = -1; })), Error);
  CHECK_THROWS_AS(issue_from_json(bad([](auto &j) { j["author"]["association"] = "Boss"; })), Error);
  CHECK_THROWS_AS(issue_from_json(bad([](auto &j) { j["comments"][0]["created_at"] = "2020-01-01T00:00:00Z"; })),
                  Error);
  CHECK_THROWS_AS(issue_from_json("{not json"), Error);
}

TEST_CASE("malformed lines: collected, or fatal in strict mode") {
  auto dir = testutil::temp_dir("corpus_bad");
  auto p = dir / "c.jsonl";
  {
    std::ofstream f(p);
    f << issue_to_json(sample_corpus().issues[0]) << "\n{broken\n" << issue_to_json(sample_corpus().issues[1])
      << "\n";
  }
  auto r = load_corpus(p);
  CHECK(r.corpus.issues.size() == 2);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].line == 2);
  CHECK_THROWS_AS(load_corpus(p, true), Error);
}

TEST_CASE("sidecar schema version is enforced") {
  auto dir = testutil::temp_dir("corpus_schema");
  save_corpus(sample_corpus(), dir / "c.jsonl");
  write_file_atomic(sidecar_path(dir / "c.jsonl"), R"({"schema_version": 2, "provenance": {}})");
  try {
    load_corpus(dir / "c.jsonl");
    FAIL("expected a schema error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::Schema);
  }
  CHECK_THROWS_AS(load_corpus(dir / "nothing.jsonl"), Error);
}

TEST_CASE("duplicate ids") {
  auto c = sample_corpus();
  c.issues[1].id = c.issues[0].id;
  CHECK_THROWS_AS(save_corpus(c, testutil::temp_dir("corpus_dup") / "c.jsonl"), Error);
}

TEST_CASE("empty file is an empty corpus") {
  auto dir = testutil::temp_dir("corpus_empty");
  write_file_atomic(dir / "c.jsonl", "");
  auto r = load_corpus(dir / "c.jsonl");
  CHECK(r.corpus.issues.empty());
}

TEST_CASE("filter rules apply in order and are counted once") {
  Corpus c;
  c.issues.push_back(make_issue("1", "ok", "long enough text", {"bug"}));               // short title
  c.issues.push_back(make_issue("2", "Real title", "Real description", {"duplicate"})); // excluded label
  c.issues.push_back(make_issue("3", "\xe6\x97\xa5\xe6\x9c\xac\xe8\xaa\x9e\xe3\x81\xae",
                                "\xe8\xaa\xac\xe6\x98\x8e\xe3\x81\xa7\xe3\x81\x99", {"bug"})); // non-English
  c.issues.push_back(make_issue("4", "Crash on save", "Steps to reproduce", {"bug"}));
  c.issues.push_back(make_issue("5", "tiny", "Du", {"status: duplicate"})); // short description first
  auto [kept, rep] = filter_corpus(c);
  REQUIRE(kept.issues.size() == 1);
  CHECK(kept.issues[0].id == "4");
  CHECK(rep.input == 5);
  CHECK(rep.short_text == 2);
  CHECK(rep.excluded_label == 1);
  CHECK(rep.non_english == 1);
  CHECK(rep.removed() == 4);
  CHECK(rep.excluded_by_cluster.at("duplicate") == 1);

  FilterConfig unknown;
  unknown.excluded_clusters = {"no such cluster"};
  CHECK_THROWS_AS(filter_corpus(c, unknown), Error);
}

TEST_CASE("non-ASCII fraction ignores whitespace") {
  CHECK(non_ascii_fraction("") == 0.0);
  CHECK(non_ascii_fraction("ab  cd") == 0.0);
  CHECK(non_ascii_fraction("a \xc3\xa9") == doctest::Approx(0.5));
}

TEST_CASE("stratified split keeps class shares and is seeded") {
  std::vector<int> y;
  for (int i = 0; i < 37; ++i)
    y.push_back(0);
  for (int i = 0; i < 13; ++i)
    y.push_back(1);
  y.push_back(2); // singleton
  auto s = stratified_split_indices(y, 0.8, 7);
  std::map<int, int> train;
  for (auto i : s.train)
    ++train[y[i]];
  CHECK(train[0] == 30);
  CHECK(train[1] == 10);
  CHECK(train[2] == 1);
  CHECK(s.undersized_classes == std::vector<int>{2});
  CHECK(s.train.size() + s.test.size() == y.size());
  CHECK(std::is_sorted(s.train.begin(), s.train.end()));
  auto again = stratified_split_indices(y, 0.8, 7);
  CHECK(again.train == s.train);
  auto other = stratified_split_indices(y, 0.8, 8);
  CHECK(other.train != s.train);
}

TEST_CASE("stratified folds balance classes") {
  std::vector<int> y(50, 0);
  for (int i = 0; i < 20; ++i)
    y[i] = 1;
  auto f = stratified_folds(y, 5, 3);
  std::map<std::pair<std::size_t, int>, int> n;
  for (std::size_t i = 0; i < y.size(); ++i)
    ++n[{f[i], y[i]}];
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(n[{k, 1}] == 4);
    CHECK(n[{k, 0}] == 6);
  }
}

TEST_CASE("corpus split by priority target") {
  Corpus c;
  for (int i = 0; i < 10; ++i)
    c.issues.push_back(make_issue(std::to_string(i), "title", "desc", {i < 4 ? "priority: high" : "low priority"}));
  auto s = stratified_split(c, priority_target(), 0.5, 1);
  CHECK(s.train.issues.size() == 5);
  c.issues.push_back(make_issue("x", "title", "desc", {"bug"}));
  CHECK_THROWS_AS(stratified_split(c, priority_target(), 0.5, 1), Error);
  CHECK_THROWS_AS(stratified_split(c, priority_target(), 1.0, 1), Error);
}

TEST_CASE("class name round trips") {
  for (auto c : kObjectiveClasses)
    CHECK(parse_objective(to_string(c)) == c);
  for (auto c : kPriorityClasses)
    CHECK(parse_priority(to_string(c)) == c);
  CHECK(parse_priority("HP") == PriorityClass::High);
  CHECK(parse_priority("l") == PriorityClass::Low);
  CHECK_FALSE(parse_priority("medium").has_value());
}

}
