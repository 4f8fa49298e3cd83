#include <doctest.h>

#include "triage/agreement.hpp"

#include <nlohmann/json.hpp>

using namespace triage::agreement;

namespace {

RatingMatrix matrix(std::vector<std::vector<int>> cells) {
  RatingMatrix m;
  for (std::size_t r = 0; r < cells.at(0).size(); ++r)
    m.raters.push_back("r" + std::to_string(r));
  for (std::size_t i = 0; i < cells.size(); ++i)
    m.items.push_back("i" + std::to_string(i));
  m.cells = std::move(cells);
  return m;
}

} // namespace

TEST_SUITE("agreement") {

TEST_CASE("item agreement") {
  std::vector<int> row = {0, 0, 0, 0, 1};
  CHECK(item_agreement(row, 2) == doctest::Approx(0.6));
  CHECK(item_agreement(row, 2, ItemAgreement::Majority) == doctest::Approx(0.8));
  std::vector<int> gaps = {0, kMissing, 0};
  CHECK(item_agreement(gaps, 2) == 1.0);
}

TEST_CASE("free-marginal kappa") {
  CHECK(randolph_kappa(0.853, 2) == doctest::Approx(0.706));
  CHECK(randolph_kappa(0.5, 2) == doctest::Approx(0.0));
  CHECK(randolph_kappa(1.0, 3) == doctest::Approx(1.0));
  auto m = matrix({{0, 0, 0}, {0, 0, 1}});
  CHECK(percent_agreement(m) == doctest::Approx(2.0 / 3.0));
  CHECK(randolph_kappa(m) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("bands") {
  CHECK(band_of(-0.2) == Band::Poor);
  CHECK(band_of(0.0) == Band::Slight);
  CHECK(band_of(0.005) == Band::Slight);
  CHECK(band_of(0.21) == Band::Fair);
  CHECK(band_of(0.41) == Band::Moderate);
  CHECK(band_of(0.61) == Band::Substantial);
  CHECK(band_of(0.706) == Band::Substantial);
  CHECK(band_of(0.81) == Band::AlmostPerfect);
  CHECK(to_string(Band::AlmostPerfect) == "almost perfect");
}

TEST_CASE("fleiss kappa by hand") {
  auto m = matrix({{0, 0, 0}, {0, 0, 1}, {1, 1, 1}, {0, 1, 1}});
  auto f = fleiss_kappa(m);
  CHECK(f.p_bar == doctest::Approx(2.0 / 3.0));
  CHECK(f.p_e == doctest::Approx(0.5));
  CHECK(f.kappa == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(f.degenerate_marginals);
}

TEST_CASE("fleiss skips partly rated items") {
  auto m = matrix({{0, 0, 0}, {0, kMissing, 1}, {1, 1, 1}, {0, 1, 1}});
  auto f = fleiss_kappa(m);
  CHECK(f.excluded_items == std::vector<std::string>{"i1"});
  auto none = matrix({{0, kMissing, 0}});
  CHECK_THROWS(fleiss_kappa(none));
}

TEST_CASE("one category everywhere is degenerate") {
  auto f = fleiss_kappa(matrix({{0, 0}, {0, 0}}));
  CHECK(f.degenerate_marginals);
  CHECK(f.kappa == 1.0);
}

TEST_CASE("majority labels and outliers") {
  auto m = matrix({{0, 0, 1}, {1, 1, 0}, {0, 1, kMissing}, {0, 0, 1}});
  auto maj = majority_labels(m);
  CHECK(maj[0].label == 0);
  CHECK(maj[1].label == 1);
  CHECK(maj[2].tie);
  CHECK_FALSE(maj[2].label);
  CHECK(outlier_raters(m) == std::vector<std::string>{"r2"});
}

TEST_CASE("validation") {
  CHECK_THROWS(matrix({{0, 0}, {0}}).validate());
  CHECK_THROWS(matrix({{0, 2}}).validate());
  CHECK_THROWS(matrix({{0, kMissing}}).validate());
  auto m = matrix({{0, 0}});
  m.categories = {"only"};
  CHECK_THROWS(m.validate());
}

TEST_CASE("csv parsing and grouped report") {
  auto m = parse_ratings_csv("issue,project,ann1,ann2,ann3\n"
                             "a#1,a,H,H,L\n"
                             "a#2,a,low,L,L\n"
                             "b#1,b,High,,h\n");
  CHECK(m.raters == std::vector<std::string>{"ann1", "ann2", "ann3"});
  CHECK(m.items[2] == "b#1");
  CHECK(m.groups[2] == "b");
  CHECK(m.cells[2] == std::vector<int>{0, kMissing, 0});
  auto full = analyze_all(m);
  CHECK(full.by_group.size() == 2);
  CHECK(full.by_group.at("a").items == 2);
  CHECK(full.overall.percent_agreement == doctest::Approx((1.0 / 3 + 1 + 1) / 3));
  auto j = full.to_json(m);
  CHECK(j.contains("overall"));
  CHECK(full.to_table().find("randolph") != std::string::npos);
  CHECK_THROWS(parse_ratings_csv("r1,r2\nH,X\n"));
}

}
