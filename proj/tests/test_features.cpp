#include <doctest.h>

#include "test_util.hpp"
#include "triage/features.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <random>

using namespace triage;
using namespace triage::features;

namespace {

using Docs = std::vector<std::vector<std::string>>;

// Direct evaluation of smoothed tf-idf with L2 normalization.
std::map<std::string, double> tfidf_oracle(const Docs &corpus, const std::vector<std::string> &doc,
                                           const std::vector<std::string> &vocab) {
  double n = static_cast<double>(corpus.size());
  std::map<std::string, double> out;
  double norm = 0.0;
  for (const auto &term : vocab) {
    double df = 0.0;
    for (const auto &d : corpus) {
      auto g = ngrams(d, 1, 2);
      df += std::find(g.begin(), g.end(), term) != g.end() ? 1.0 : 0.0;
    }
    auto g = ngrams(doc, 1, 2);
    double tf = static_cast<double>(std::count(g.begin(), g.end(), term));
    double v = tf * (std::log((1.0 + n) / (1.0 + df)) + 1.0);
    if (v != 0.0)
      out[term] = v;
    norm += v * v;
  }
  for (auto &[k, v] : out)
    v /= std::sqrt(norm);
  return out;
}

} // namespace

TEST_SUITE("features") {

TEST_CASE("ngrams") {
  std::vector<std::string> t = {"a", "b", "c"};
  CHECK(ngrams(t, 1, 2) == std::vector<std::string>{"a", "b", "c", "a b", "b c"});
  CHECK(ngrams(t, 2, 3) == std::vector<std::string>{"a b", "b c", "a b c"});
  CHECK(ngrams(std::vector<std::string>{}, 1, 2).empty());
}

TEST_CASE("tf-idf matches the formula") {
  Docs corpus = {{"app", "crash", "on", "start"}, {"crash", "report"}, {"add", "dark", "theme"}, {"app", "theme"}};
  auto m = TfidfModel::fit(corpus, 1000);
  for (const auto &doc : corpus) {
    auto oracle = tfidf_oracle(corpus, doc, m.terms());
    auto v = m.transform(doc);
    REQUIRE(v.nnz() == oracle.size());
    for (std::size_t k = 0; k < v.nnz(); ++k)
      CHECK(v.value[k] == doctest::Approx(oracle.at(m.terms()[v.index[k]])).epsilon(1e-12));
    CHECK(v.norm() == doctest::Approx(1.0));
  }
  CHECK(std::is_sorted(m.terms().begin(), m.terms().end()));
  auto unseen = m.transform(std::vector<std::string>{"zzz"});
  CHECK(unseen.nnz() == 0);
  auto counts = m.transform_counts(std::vector<std::string>{"crash", "crash", "report"});
  CHECK(counts.value == std::vector<double>{2.0, 1.0, 1.0}); // crash, crash report, report
}

TEST_CASE("vocabulary cap keeps the most frequent terms") {
  Docs corpus = {{"a", "a", "a", "b"}, {"a", "b", "c"}, {"d"}};
  auto m = TfidfModel::fit(corpus, 2, 1, 1);
  CHECK(m.terms() == std::vector<std::string>{"a", "b"});
  auto t = TfidfModel::fit(corpus, 3, 1, 1); // c and d tie at 1; c wins
  CHECK(t.terms() == std::vector<std::string>{"a", "b", "c"});
  CHECK_THROWS(TfidfModel::fit(Docs{}, 10));
}

TEST_CASE("tf-idf serialization round trip") {
  Docs corpus = {{"x", "y"}, {"y", "z"}};
  auto m = TfidfModel::fit(corpus, 100);
  auto back = TfidfModel::from_json(m.to_json());
  CHECK(back == m);
  CHECK(back.fingerprint() == m.fingerprint());
  auto j = m.to_json();
  j["idf"].erase(0);
  CHECK_THROWS(TfidfModel::from_json(j));
}

TEST_CASE("metadata extraction") {
  auto issue = testutil::make_issue("1", "Crash on start", "It fails. `x` see https://a.io and https://b.io",
                                    {"bug", "stale"});
  issue.created_at = parse_timestamp("2021-01-10T00:00:00Z");
  issue.closed_at = parse_timestamp("2021-01-20T00:00:00Z");
  issue.comments = {{"bob", "abc", parse_timestamp("2021-01-10T06:00:00Z")},
                    {"carol", "abcdefg", parse_timestamp("2021-01-11T00:00:00Z")},
                    {"bob", "\xc3\xa9\xc3\xa9", parse_timestamp("2021-01-10T12:00:00Z")}};
  issue.events = {{"labeled", issue.created_at}, {"closed", *issue.closed_at}};
  issue.assignee_present = true;
  issue.referenced_commit = true;
  issue.author.followers = 5;
  issue.author.association = Association::Member;
  issue.author.account_created_at = parse_timestamp("2020-12-31T00:00:00Z");
  issue.closer_login = "alice";
  auto m = extract_metadata(issue);
  CHECK(get(m, Nf::TitleWords) == 3);
  CHECK(get(m, Nf::DescWords) == 7);
  CHECK(get(m, Nf::Code) == 1);
  CHECK(get(m, Nf::Url) == 2);
  CHECK(get(m, Nf::Comments) == 3);
  CHECK(get(m, Nf::CmMeanLen) == doctest::Approx(4.0));
  CHECK(get(m, Nf::CmDevelopersRatio) == doctest::Approx(1.5));
  CHECK(get(m, Nf::TimeToDiscuss) == doctest::Approx(24.0));
  CHECK(get(m, Nf::Events) == 2);
  CHECK(get(m, Nf::Assigned) == 1);
  CHECK(get(m, Nf::IsPullRequest) == 0);
  CHECK(get(m, Nf::HasCommit) == 1);
  CHECK(get(m, Nf::Labels) == 2);
  CHECK(get(m, Nf::AuthorFollowers) == 5);
  CHECK(get(m, Nf::AuthorAccountAge) == doctest::Approx(10.0));
  CHECK(get(m, Nf::Association) == 3);
  CHECK(get(m, Nf::SameAuthorCloser) == 1);
  CHECK(get(m, Nf::DescNegativity) <= -1);
  CHECK(metadata_names()[0] == "title_words");
  CHECK(metadata_names().size() == 28);
}

TEST_CASE("no comments leaves comment features at zero") {
  auto m = extract_metadata(testutil::make_issue("1", "t", "d"));
  CHECK(get(m, Nf::CmMeanLen) == 0.0);
  CHECK(get(m, Nf::CmDevelopersRatio) == 0.0);
  CHECK(get(m, Nf::TimeToDiscuss) == 0.0);
}

TEST_CASE("min-max scaler") {
  std::vector<MetadataFeatures> rows(3);
  for (std::size_t j = 0; j < kMetadataCount; ++j) {
    rows[0][j] = 1.0;
    rows[1][j] = 3.0;
    rows[2][j] = j == 5 ? 1.0 : 2.0;
  }
  for (auto &r : rows)
    r[7] = 4.0; // constant column
  auto s = ScalerParams::fit(rows);
  auto a = s.scale(rows[0]);
  auto b = s.scale(rows[1]);
  CHECK(a[0] == 0.0);
  CHECK(b[0] == 1.0);
  CHECK(s.scale(rows[2])[0] == doctest::Approx(0.5));
  CHECK(a[7] == 0.0);
  MetadataFeatures wild{};
  wild.fill(99.0);
  wild[1] = -99.0;
  auto w = s.scale(wild);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 0.0);
  CHECK(ScalerParams::from_json(s.to_json()) == s);
  CHECK_THROWS(ScalerParams::fit(std::vector<MetadataFeatures>{}));
  rows[0][3] = std::nan("");
  CHECK_THROWS(ScalerParams::fit(rows));
}

TEST_CASE("assembled vector layout") {
  Docs titles = {{"crash"}, {"theme"}};
  Docs descs = {{"stack", "trace"}, {"dark", "mode"}};
  auto tm = TfidfModel::fit(titles, 100);
  auto dm = TfidfModel::fit(descs, 100);
  std::vector<MetadataFeatures> raw(2);
  raw[1].fill(2.0);
  auto sc = ScalerParams::fit(raw);
  text::TokenizedDoc t{{"crash"}, text::Source::Title};
  text::TokenizedDoc d{{"stack", "trace"}, text::Source::Description};
  std::vector<std::string> labels = {"bug"};
  std::array<double, 3> probs = {0.7, 0.2, 0.1};
  auto fv = assemble(t, d, labels, raw[1], tm, dm, sc, probs);
  auto layout = FeatureLayout::of(tm, dm);
  CHECK(layout.total() == tm.size() + dm.size() + 3 + 66 + 28);
  auto flat = flatten(fv, layout);
  auto names = layout.names(tm, dm);
  CHECK(names.size() == layout.total());
  CHECK(names[layout.title_dim + layout.desc_dim] == "objective:Bug");
  CHECK(names.back() == "desc_subjectivity");
  RowView rv{flat.index, flat.value};
  CHECK(rv.at(static_cast<std::uint32_t>(layout.title_dim + layout.desc_dim)) == 0.7);
  auto bug = labels::ClusterTable::builtin().cluster_of("bug");
  REQUIRE(bug);
  CHECK(rv.at(static_cast<std::uint32_t>(layout.lf_offset() + *bug)) == 1.0);
  CHECK(rv.at(static_cast<std::uint32_t>(layout.nf_offset())) == 1.0);

  std::array<double, 3> bad = {0.7, 0.2, 0.2};
  CHECK_THROWS(assemble(t, d, labels, raw[1], tm, dm, sc, bad));

  std::vector<std::string> ids = {"o/r#1"};
  std::vector<FeatureVector> rows = {fv};
  auto csv = feature_matrix_csv(ids, rows);
  auto parsed = parse_csv(csv);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].front() == "id");
  CHECK(parsed[0].back() == "tf");
  CHECK(parsed[0].size() == 1 + 28 + 66 + 1);
}

}
