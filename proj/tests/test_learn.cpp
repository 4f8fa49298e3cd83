#include <doctest.h>

#include "triage/learn.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numeric>
#include <random>

using namespace triage;
using namespace triage::learn;

namespace {

Dataset dense(const std::vector<std::vector<double>> &rows, std::vector<int> y, std::size_t k) {
  Dataset d{CsrMatrix(rows.empty() ? 0 : rows[0].size()), std::move(y), k};
  for (const auto &r : rows)
    d.X.add_dense_row(r);
  return d;
}

// Two well separated blobs, one per class.
Dataset blobs(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      double centre = c == 0 ? 1.0 : 3.0;
      rows.push_back({centre + noise(rng), centre + noise(rng), noise(rng) + 2.0});
      y.push_back(c);
    }
  return dense(rows, y, 2);
}

double accuracy(const Estimator &m, const Dataset &d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    ok += static_cast<int>(argmax(predict_proba(m, d.X.row(i)))) == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(d.size());
}

SparseVector sv(std::vector<double> dense_values) {
  SparseVector v;
  for (std::size_t i = 0; i < dense_values.size(); ++i)
    if (dense_values[i] != 0.0) {
      v.index.push_back(static_cast<std::uint32_t>(i));
      v.value.push_back(dense_values[i]);
    }
  return v;
}

} // namespace

TEST_SUITE("learn") {

TEST_CASE("class weights") {
  std::vector<int> y = {0, 0, 0, 1};
  auto w = ClassWeights::compute(y, 2);
  CHECK(w.of(0) == doctest::Approx(4.0 / 3.0));
  CHECK(w.of(1) == doctest::Approx(4.0));
  CHECK_THROWS(ClassWeights::compute(y, 3));
  auto o = ClassWeights::priority_override(3);
  CHECK(o.of(0) == doctest::Approx(0.3));
  CHECK(o.of(1) == doctest::Approx(0.7));
  CHECK_THROWS(ClassWeights::priority_override(0));
  CHECK_THROWS(ClassWeights::priority_override(10));
}

TEST_CASE("keyword classifier") {
  auto k = KeywordClassifier::parse("[keywords] Bug\ncrash error\n[keywords] Enhancement\nfeature\n"
                                    "[keywords] SupportDoc\nhow\n");
  std::vector<std::string> a = {"app", "crash", "error", "feature"};
  CHECK(k.predict_proba(a) == std::array<double, 3>{1.0, 0.0, 0.0});
  std::vector<std::string> b = {"crash", "feature"};
  CHECK(k.predict_proba(b) == std::array<double, 3>{0.5, 0.5, 0.0});
  auto u = k.predict_proba(std::vector<std::string>{});
  CHECK(u[2] == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS(KeywordClassifier::parse("crash\n"));
  CHECK_THROWS(KeywordClassifier::parse("[keywords] Bug\nx\n[keywords] Enhancement\nx\n"));
  CHECK_FALSE(KeywordClassifier::builtin().keywords(ObjectiveClass::Bug).empty());
}

TEST_CASE("naive bayes by hand") {
  // class 0: counts (2,0) ; class 1: counts (0,1), (1,1)
  auto d = dense({{2, 0}, {0, 1}, {1, 1}}, {0, 1, 1}, 2);
  auto m = fit_multinomial_nb(d, 1.0);
  // likelihoods: c0 = (3/4, 1/4), c1 = (2/5, 3/5); priors 1/3, 2/3
  auto p = m.predict_proba(d.X.row(0));
  double a = (1.0 / 3) * std::pow(0.75, 2), b = (2.0 / 3) * std::pow(0.4, 2);
  CHECK(p[0] == doctest::Approx(a / (a + b)).epsilon(1e-12));
  CHECK(p[0] + p[1] == doctest::Approx(1.0));
  CHECK_THROWS(fit_multinomial_nb(dense({{-1, 0}}, {0}, 2)));
}

TEST_CASE("naive bayes with an absent class never predicts it") {
  auto d = dense({{1, 0}, {0, 1}}, {0, 0}, 2);
  auto m = fit_multinomial_nb(d);
  auto p = m.predict_proba(d.X.row(1));
  CHECK(p[1] == 0.0);
  CHECK(p[0] == doctest::Approx(1.0));
}

TEST_CASE("logistic regression descends and separates") {
  auto d = blobs(40, 1);
  auto cw = ClassWeights::uniform(2);
  auto m = fit_logreg(d, cw, {0.5, 1e-4, 150}, 7);
  REQUIRE(m.loss_history.size() >= 2);
  for (std::size_t i = 1; i < m.loss_history.size(); ++i)
    CHECK(m.loss_history[i] <= m.loss_history[i - 1] + 1e-12);
  CHECK(accuracy(Estimator{m}, d) >= 0.95);
}

TEST_CASE("logistic regression loss at zero") {
  auto d = dense({{1, 0}, {0, 1}, {1, 1}}, {0, 1, 2}, 3);
  std::vector<double> w(6, 0.0), b(3, 0.0);
  auto lg = logreg_loss_and_gradient(d, ClassWeights::uniform(3), 0.0, w, b);
  CHECK(lg.loss == doctest::Approx(std::log(3.0)));
  CHECK(std::accumulate(lg.grad_bias.begin(), lg.grad_bias.end(), 0.0) == doctest::Approx(0.0));
}

TEST_CASE("gini") {
  std::vector<double> even = {1, 1}, pure = {3, 0}, none = {0, 0};
  CHECK(gini(even) == doctest::Approx(0.5));
  CHECK(gini(pure) == 0.0);
  CHECK(gini(none) == 0.0);
}

TEST_CASE("forest is deterministic and accurate on blobs") {
  auto d = blobs(50, 3);
  ForestParams p;
  p.n_trees = 20;
  p.threads = 2;
  auto a = fit_random_forest(d, ClassWeights::uniform(2), p, 11);
  p.threads = 1;
  auto b = fit_random_forest(d, ClassWeights::uniform(2), p, 11);
  CHECK(estimator_to_json(a) == estimator_to_json(b));
  CHECK(accuracy(Estimator{a}, d) >= 0.95);
  auto imp = a.feature_importance();
  CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0));
  CHECK(imp[2] < imp[0] + imp[1]);
}

TEST_CASE("knn votes") {
  auto d = dense({{0, 0}, {0, 1}, {5, 5}}, {0, 0, 1}, 2);
  auto m = fit_knn(d, 1);
  auto q = sv({4, 4});
  CHECK(m.predict_proba(RowView{q.index, q.value}) == std::vector<double>{0.0, 1.0});
  auto m3 = fit_knn(d, 3);
  auto p = m3.predict_proba(RowView{q.index, q.value});
  CHECK(p[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("nearest neighbours break ties by index") {
  std::vector<SparseVector> rows = {sv({0, 0}), sv({1, 0}), sv({0, 1}), sv({-1, 0})};
  CHECK(nearest_neighbors(rows, 0, 2) == std::vector<std::size_t>{1, 2});
  CHECK(nearest_neighbors(rows, 0, 10).size() == 3);
}

TEST_CASE("smote interpolates between minority neighbours") {
  std::vector<SparseVector> minority = {sv({0, 0}), sv({1, 0}), sv({0, 2})};
  auto r = smote(minority, 10, 2, 5);
  REQUIRE(r.points.size() == 7);
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto &o = r.origins[i];
    CHECK(o.base != o.neighbor);
    CHECK(o.lambda >= 0.0);
    CHECK(o.lambda <= 1.0);
    CsrMatrix m(2);
    m.add_row(r.points[i]);
    for (std::uint32_t c = 0; c < 2; ++c) {
      double x = RowView{minority[o.base].index, minority[o.base].value}.at(c);
      double n = RowView{minority[o.neighbor].index, minority[o.neighbor].value}.at(c);
      CHECK(m.row(0).at(c) == doctest::Approx(x + o.lambda * (n - x)));
    }
  }
  CHECK(smote(minority, 3, 2, 5).points.empty());
}

TEST_CASE("smote balance equalizes classes") {
  auto d = dense({{1, 0}, {2, 0}, {3, 0}, {4, 0}, {0, 1}, {0, 2}}, {0, 0, 0, 0, 1, 1}, 2);
  auto b = smote_balance(d, 1, 9);
  CHECK(b.size() == 8);
  CHECK(std::count(b.y.begin(), b.y.end(), 1) == 4);
  auto again = smote_balance(d, 1, 9);
  CHECK(again.y == b.y);
  CHECK(again.X.dense_row(7) == b.X.dense_row(7));
}

TEST_CASE("random search") {
  SearchSpace s{{{"a", 0.0, 1.0, false, false}, {"n", 1, 5, true, false}}};
  std::size_t calls = 0;
  auto r = random_search(s, 12, 4, [&](const Hyperparams &h) {
    ++calls;
    CHECK(h.at("n") == std::round(h.at("n")));
    return -std::abs(h.at("a") - 0.5);
  });
  CHECK(calls == 12);
  CHECK(r.trace.size() == 12);
  for (const auto &t : r.trace)
    CHECK(t.score <= r.best_score);
  auto again = random_search(s, 12, 4, [](const Hyperparams &h) { return -std::abs(h.at("a") - 0.5); });
  CHECK(again.best == r.best);
  auto flat = random_search(s, 5, 4, [](const Hyperparams &) { return 1.0; });
  CHECK(flat.best == flat.trace.front().params);
  CHECK_THROWS(SearchSpace{{{"x", 2.0, 1.0, false, false}}}.validate());
  CHECK_THROWS(SearchSpace{{{"x", 0.0, 1.0, false, true}}}.validate());
  CHECK_NOTHROW(SearchSpace::forest_default().validate());
}

TEST_CASE("median rank baseline") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  std::vector<double> v = {1, 2, 3, 4};
  auto r = rank_by_median(v, false);
  CHECK(r == std::vector<PriorityClass>{PriorityClass::Low, PriorityClass::Low, PriorityClass::High,
                                        PriorityClass::High});
  auto low = rank_by_median(v, true);
  CHECK(low[0] == PriorityClass::High);
  CHECK(parse_rank_field("comments") == RankField::Comments);
  CHECK_FALSE(parse_rank_field("stars"));
}

TEST_CASE("estimators survive a JSON round trip") {
  auto d = blobs(15, 5);
  auto cw = ClassWeights::compute(d.y, 2);
  Hyperparams hp = {{"n_trees", 5}, {"epochs", 30}, {"k", 3}};
  for (auto kind : {ModelKind::NaiveBayes, ModelKind::LogReg, ModelKind::Forest, ModelKind::Knn}) {
    INFO(to_string(kind));
    auto m = train_estimator(kind, d, cw, hp, 3);
    auto back = estimator_from_json(nlohmann::json::parse(estimator_to_json(m).dump()));
    CHECK(kind_of(back) == kind);
    CHECK(n_features_of(back) == 3);
    for (std::size_t i = 0; i < d.size(); ++i)
      CHECK(predict_proba(back, d.X.row(i)) == predict_proba(m, d.X.row(i)));
  }
  CHECK_THROWS(estimator_from_json(nlohmann::json{{"kind", "svm"}}));
}

}
