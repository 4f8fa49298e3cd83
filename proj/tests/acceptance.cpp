// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "triage/agreement.hpp"
#include "triage/corpus.hpp"
#include "triage/evalkit.hpp"
#include "triage/features.hpp"
#include "triage/labelmap.hpp"
#include "triage/learn.hpp"
#include "triage/pipeline.hpp"
#include "triage/textnorm.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace triage;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure messages of one criterion.
class Check {
public:
  void expect(bool ok, const std::string &what) {
    if (ok)
      return;
    ++failures_;
    if (failures_ <= 3)
      detail_ += (detail_.empty() ? "" : "; ") + what;
  }
  void note(const std::string &s) { note_ = s; }
  Outcome done() const {
    if (failures_ == 0)
      return {true, note_};
    return {false, std::to_string(failures_) + " failure(s): " + detail_};
  }

private:
  std::size_t failures_ = 0;
  std::string detail_;
  std::string note_;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path &p) {
  std::ifstream f(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(f, line);)
    out.push_back(line);
  return out;
}

fs::path data(const std::string &rel) { return fs::path(TRIAGE_TEST_DATA) / rel; }

fs::path scratch(const std::string &name) {
  auto p = fs::temp_directory_path() / ("triage_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const std::vector<pipeline::PreparedIssue> &planted() {
  static const std::vector<pipeline::PreparedIssue> issues = [] {
    auto loaded = load_corpus(data("planted/corpus.jsonl"), true);
    return pipeline::prepare(filter_corpus(loaded.corpus).first);
  }();
  return issues;
}

// --- AC1 --------------------------------------------------------------------

Outcome ac01() {
  Check c;
  double kappa = agreement::randolph_kappa(0.853, 2);
  c.expect(std::abs(kappa - 0.706) <= 0.005, "kappa " + num(kappa));
  c.note("kappa " + num(kappa));
  return c.done();
}

// --- AC2 --------------------------------------------------------------------

Outcome ac02() {
  Check c;
  std::mt19937_64 rng(2);
  for (int inst = 0; inst < 1000; ++inst) {
    std::size_t k = 2 + rng() % 2;
    std::size_t n = rng() % 40;
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng() % k);
      pred[i] = static_cast<int>(rng() % k);
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i)
      names.push_back("c" + std::to_string(i));
    auto r = eval::report(eval::ConfusionMatrix::from_pairs(truth, pred, k), names);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i)
      correct += truth[i] == pred[i];
    double acc = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
    c.expect(std::abs(r.accuracy - acc) <= 1e-12, "accuracy mismatch");
    double f1_sum = 0.0;
    for (std::size_t cls = 0; cls < k; ++cls) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        bool t = truth[i] == static_cast<int>(cls), p = pred[i] == static_cast<int>(cls);
        tp += t && p;
        fp += !t && p;
        fn += t && !p;
      }
      double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      f1_sum += f1;
      const auto &cr = r.classes[cls];
      c.expect(std::abs(cr.precision - prec) <= 1e-12, "precision mismatch");
      c.expect(std::abs(cr.recall - rec) <= 1e-12, "recall mismatch");
      c.expect(std::abs(cr.f1 - f1) <= 1e-12, "f1 mismatch");
      c.expect(cr.support == static_cast<std::size_t>(tp + fn), "support mismatch");
    }
    c.expect(std::abs(r.macro_f1 - f1_sum / static_cast<double>(k)) <= 1e-12, "macro f1 mismatch");
  }
  c.note("1000 instances");
  return c.done();
}

// --- AC3 --------------------------------------------------------------------

Outcome ac03() {
  Check c;
  using features::MetadataFeatures;
  using features::kMetadataCount;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::size_t columns = 0;
  for (int batch = 0; batch < 4; ++batch) {
    std::size_t n = 5 + rng() % 30;
    std::vector<MetadataFeatures> rows(n), scaled_rows(n);
    std::array<double, kMetadataCount> factor{};
    for (auto &f : factor)
      f = std::exp(std::uniform_real_distribution<double>(-5.0, 5.0)(rng));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < kMetadataCount; ++j) {
        rows[i][j] = u(rng);
        scaled_rows[i][j] = rows[i][j] * factor[j];
      }
    auto s = features::ScalerParams::fit(rows);
    auto s2 = features::ScalerParams::fit(scaled_rows);
    for (std::size_t j = 0; j < kMetadataCount; ++j, ++columns) {
      std::size_t lo = 0, hi = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (rows[i][j] < rows[lo][j])
          lo = i;
        if (rows[i][j] > rows[hi][j])
          hi = i;
      }
      c.expect(std::abs(s.scale(rows[lo])[j]) <= 1e-9, "min does not map to 0");
      c.expect(std::abs(s.scale(rows[hi])[j] - 1.0) <= 1e-9, "max does not map to 1");
      for (std::size_t i = 0; i < n; ++i) {
        double a = s.scale(rows[i])[j], b = s2.scale(scaled_rows[i])[j];
        c.expect(a >= 0.0 && a <= 1.0, "output outside [0,1]");
        c.expect(std::abs(a - b) <= 1e-9, "not invariant to positive rescaling");
      }
    }
    for (int t = 0; t < 50; ++t) {
      MetadataFeatures probe{};
      for (auto &v : probe)
        v = u(rng) * 3.0;
      for (double v : s.scale(probe))
        c.expect(v >= 0.0 && v <= 1.0, "clipped output outside [0,1]");
    }
  }
  c.expect(columns >= 100, "too few columns");
  c.note(std::to_string(columns) + " columns");
  return c.done();
}

// --- AC4 --------------------------------------------------------------------

Outcome ac04() {
  Check c;
  std::vector<int> y(82719, 1);
  std::fill(y.begin(), y.begin() + 44733, 0);
  auto w = learn::ClassWeights::compute(y, 2);
  c.expect(std::abs(w.of(0) - 1.8492) <= 1e-3, "weight_HP " + num(w.of(0)));
  c.expect(std::abs(w.of(0) - 82719.0 / 44733.0) <= 1e-12, "weight_HP differs from N/freq");

  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    std::size_t k = 2 + rng() % 3;
    std::size_t n = k + rng() % 200;
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = static_cast<int>(i < k ? i : rng() % k);
    std::shuffle(labels.begin(), labels.end(), rng);
    auto cw = learn::ClassWeights::compute(labels, k);
    std::vector<double> freq(k, 0.0);
    for (int l : labels)
      ++freq[static_cast<std::size_t>(l)];
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        c.expect(std::abs(cw.w[a] / cw.w[b] - freq[b] / freq[a]) <= 1e-12, "ratio property");
  }
  c.note("weight_HP " + num(w.of(0)));
  return c.done();
}

// --- AC5 --------------------------------------------------------------------

Outcome ac05() {
  Check c;
  constexpr std::size_t V = 4;
  // every document is a 0/1 count vector over the vocabulary, with a label
  std::vector<std::pair<std::array<int, V>, int>> docs;
  for (int mask = 0; mask < 16; ++mask)
    for (int label = 0; label < 2; ++label)
      docs.push_back({{mask & 1, (mask >> 1) & 1, (mask >> 2) & 1, (mask >> 3) & 1}, label});
  std::vector<std::array<int, V>> queries;
  for (int mask = 0; mask < 16; ++mask)
    queries.push_back({mask & 1, (mask >> 1) & 1, (mask >> 2) & 1, (mask >> 3) & 1});
  queries.push_back({2, 0, 1, 3});

  std::size_t corpora = 0;
  double worst = 0.0;
  // multisets of documents, size 1..5, in non-decreasing index order
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (!pick.empty()) {
      ++corpora;
      learn::Dataset d{CsrMatrix(V), {}, 2};
      std::array<double, 2> n_c{};
      std::array<std::array<double, V>, 2> count{};
      for (auto idx : pick) {
        std::vector<double> row(docs[idx].first.begin(), docs[idx].first.end());
        d.X.add_dense_row(row);
        d.y.push_back(docs[idx].second);
        auto l = static_cast<std::size_t>(docs[idx].second);
        ++n_c[l];
        for (std::size_t t = 0; t < V; ++t)
          count[l][t] += row[t];
      }
      auto m = learn::fit_multinomial_nb(d, 1.0);
      for (const auto &q : queries) {
        std::array<double, 2> joint{};
        for (std::size_t l = 0; l < 2; ++l) {
          double total = count[l][0] + count[l][1] + count[l][2] + count[l][3];
          double p = n_c[l] / static_cast<double>(pick.size());
          for (std::size_t t = 0; t < V; ++t)
            p *= std::pow((count[l][t] + 1.0) / (total + V), q[t]);
          joint[l] = p;
        }
        double z = joint[0] + joint[1];
        std::vector<double> qv(q.begin(), q.end());
        SparseVector sv;
        for (std::uint32_t t = 0; t < V; ++t)
          if (qv[t] != 0.0) {
            sv.index.push_back(t);
            sv.value.push_back(qv[t]);
          }
        auto post = m.predict_proba(RowView{sv.index, sv.value});
        for (std::size_t l = 0; l < 2; ++l) {
          double err = std::abs(post[l] - joint[l] / z);
          worst = std::max(worst, err);
          c.expect(err <= 1e-9, "posterior differs by " + num(err));
        }
      }
    }
    if (pick.size() == 5)
      return;
    for (std::size_t i = start; i < docs.size(); ++i) {
      pick.push_back(i);
      rec(i);
      pick.pop_back();
    }
  };
  rec(0);
  c.note(std::to_string(corpora) + " corpora, max error " + num(worst));
  return c.done();
}

// --- AC6 --------------------------------------------------------------------

double sq_dist(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

Outcome ac06() {
  Check c;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  std::size_t synthetic = 0;
  double worst = 0.0;
  for (int set = 0; set < 200; ++set) {
    std::size_t dim = 2 + rng() % 5;
    std::size_t k = 1 + rng() % 5;
    std::size_t n = k + 1 + rng() % 12;
    std::size_t majority = n + 1 + rng() % 30;
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    std::vector<SparseVector> minority(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < dim; ++j) {
        pts[i][j] = g(rng);
        minority[i].index.push_back(static_cast<std::uint32_t>(j));
        minority[i].value.push_back(pts[i][j]);
      }
    // brute-force k nearest minority neighbours of every point
    std::vector<std::vector<std::size_t>> knn(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<double, std::size_t>> d;
      for (std::size_t o = 0; o < n; ++o)
        if (o != i)
          d.emplace_back(sq_dist(pts[i], pts[o]), o);
      std::sort(d.begin(), d.end());
      for (std::size_t t = 0; t < k; ++t)
        knn[i].push_back(d[t].second);
    }

    auto r = learn::smote(minority, majority, k, static_cast<std::uint64_t>(set));
    c.expect(r.points.size() == majority - n, "wrong number of synthetic points");
    for (const auto &p : r.points) {
      ++synthetic;
      std::vector<double> x(dim, 0.0);
      for (std::size_t t = 0; t < p.nnz(); ++t)
        x[p.index[t]] = p.value[t];
      // best fit over every (point, neighbour) segment
      double best = INFINITY;
      for (std::size_t i = 0; i < n; ++i)
        for (auto nb : knn[i]) {
          double num_ = 0.0, den = 0.0;
          for (std::size_t j = 0; j < dim; ++j) {
            num_ += (x[j] - pts[i][j]) * (pts[nb][j] - pts[i][j]);
            den += (pts[nb][j] - pts[i][j]) * (pts[nb][j] - pts[i][j]);
          }
          double lambda = std::clamp(num_ / den, 0.0, 1.0);
          double res = 0.0;
          for (std::size_t j = 0; j < dim; ++j) {
            double proj = pts[i][j] + lambda * (pts[nb][j] - pts[i][j]);
            res = std::max(res, std::abs(proj - x[j]));
          }
          best = std::min(best, res);
        }
      worst = std::max(worst, best);
      c.expect(best <= 1e-9, "synthetic point off every neighbour segment: " + num(best));
    }

    // balancing a two-class set equalizes the counts exactly
    learn::Dataset d{CsrMatrix(dim), {}, 2};
    for (std::size_t i = 0; i < majority; ++i) {
      std::vector<double> row(dim);
      for (auto &v : row)
        v = g(rng) + 3.0;
      d.X.add_dense_row(row);
      d.y.push_back(0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      d.X.add_dense_row(pts[i]);
      d.y.push_back(1);
    }
    auto b = learn::smote_balance(d, k, static_cast<std::uint64_t>(set));
    auto ones = static_cast<std::size_t>(std::count(b.y.begin(), b.y.end(), 1));
    c.expect(ones == majority && b.size() == 2 * majority, "class counts not equal after balancing");
  }
  c.note(std::to_string(synthetic) + " synthetic points, max residual " + num(worst));
  return c.done();
}

// --- AC7 --------------------------------------------------------------------

Outcome ac07() {
  Check c;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  double worst = 0.0;
  for (int inst = 0; inst < 25; ++inst) {
    const std::size_t n = 20, d = 10, k = 2 + static_cast<std::size_t>(inst % 2);
    learn::Dataset data{CsrMatrix(d), {}, k};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(d);
      for (auto &v : row)
        v = g(rng);
      data.X.add_dense_row(row);
      data.y.push_back(static_cast<int>(i < k ? i : rng() % k));
    }
    learn::ClassWeights cw{std::vector<double>(k)};
    for (auto &w : cw.w)
      w = u(rng);
    double l2 = u(rng) * 0.1;
    std::vector<double> W(k * d), b(k);
    for (auto &v : W)
      v = g(rng) * 0.5;
    for (auto &v : b)
      v = g(rng) * 0.5;
    auto lg = learn::logreg_loss_and_gradient(data, cw, l2, W, b);
    const double h = 1e-5;
    auto loss = [&](const std::vector<double> &w2, const std::vector<double> &b2) {
      return learn::logreg_loss_and_gradient(data, cw, l2, w2, b2).loss;
    };
    for (std::size_t p = 0; p < W.size(); ++p) {
      auto up = W, dn = W;
      up[p] += h;
      dn[p] -= h;
      double fd = (loss(up, b) - loss(dn, b)) / (2 * h);
      double err = std::abs(fd - lg.grad_weights[p]);
      worst = std::max(worst, err);
      c.expect(err <= 1e-5, "weight gradient off by " + num(err));
    }
    for (std::size_t p = 0; p < b.size(); ++p) {
      auto up = b, dn = b;
      up[p] += h;
      dn[p] -= h;
      double fd = (loss(W, up) - loss(W, dn)) / (2 * h);
      double err = std::abs(fd - lg.grad_bias[p]);
      worst = std::max(worst, err);
      c.expect(err <= 1e-5, "bias gradient off by " + num(err));
    }
  }
  c.note("max error " + num(worst));
  return c.done();
}

// --- AC8 --------------------------------------------------------------------

Outcome ac08() {
  Check c;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 2>> pts;
  std::vector<int> y;
  // separable by x0 + x1 = 0 with a margin
  for (int cls = 0; cls < 2; ++cls) {
    int have = 0;
    while (have < 250) {
      std::array<double, 2> p = {u(rng), u(rng)};
      double s = p[0] + p[1];
      if (std::abs(s) < 0.05 || (s > 0) != (cls == 0))
        continue;
      pts.push_back(p);
      y.push_back(cls);
      ++have;
    }
  }
  auto split = stratified_split_indices(y, 0.8, 8);
  auto make = [&](const std::vector<std::size_t> &idx) {
    learn::Dataset d{CsrMatrix(2), {}, 2};
    for (auto i : idx) {
      d.X.add_dense_row(pts[i]);
      d.y.push_back(y[i]);
    }
    return d;
  };
  auto train = make(split.train), test = make(split.test);
  learn::ForestParams p;
  auto fit = [&] { return learn::fit_random_forest(train, learn::ClassWeights::uniform(2), p, 8); };
  auto model = fit();
  std::size_t ok = 0;
  std::vector<int> counts(2, 0);
  for (int l : train.y)
    ++counts[static_cast<std::size_t>(l)];
  int majority = counts[1] > counts[0] ? 1 : 0;
  std::size_t base_ok = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    ok += static_cast<int>(learn::argmax(model.predict_proba(test.X.row(i)))) == test.y[i];
    base_ok += test.y[i] == majority;
  }
  double acc = static_cast<double>(ok) / static_cast<double>(test.size());
  double base = static_cast<double>(base_ok) / static_cast<double>(test.size());
  c.expect(acc >= 0.95, "held-out accuracy " + num(acc));
  c.expect(std::abs(base - 0.5) <= 1e-12, "majority baseline " + num(base));
  c.expect(learn::estimator_to_json(fit()) == learn::estimator_to_json(model), "forest not deterministic");
  c.note("accuracy " + num(acc) + ", baseline " + num(base));
  return c.done();
}

// --- AC9 --------------------------------------------------------------------

Outcome ac09() {
  Check c;
  const auto &issues = planted();
  pipeline::TrainConfig cfg;
  cfg.kind = learn::ModelKind::Forest;
  pipeline::EvalOptions o;
  o.mode = pipeline::EvalMode::CrossProject;
  o.train_ratio = 0.8;
  auto out = pipeline::evaluate(issues, pipeline::ObjectiveSource::keyword(), cfg, o);
  double acc = out.report.at("result").at("report").at("accuracy").get<double>();
  double base = out.report.at("baselines").at("comments").at("accuracy").get<double>();
  c.expect(acc >= base + 0.10, "accuracy " + num(acc) + " vs comments baseline " + num(base));
  auto test_repos = out.report.at("result").at("test_repositories").get<std::vector<std::string>>();
  c.note(std::to_string(issues.size()) + " issues, accuracy " + num(acc) + ", comments baseline " +
         num(base) + ", test repos " + std::to_string(test_repos.size()));
  return c.done();
}

// --- AC10 -------------------------------------------------------------------

Outcome ac10() {
  Check c;
  std::mt19937_64 rng(10);
  for (int t = 0; t < 100; ++t) {
    std::size_t k = 2 + rng() % 2;
    std::size_t n = 10 + rng() % 300;
    std::vector<int> y(n);
    for (auto &v : y)
      v = static_cast<int>(rng() % 10 < 7 ? 0 : 1 + rng() % (k - 1));
    auto s = stratified_split_indices(y, 0.8, rng());
    c.expect(s.train.size() + s.test.size() == n, "split loses items");
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    c.expect(all.size() == n, "split overlaps");
    for (std::size_t cls = 0; cls < k; ++cls) {
      double total = 0, train = 0;
      for (int v : y)
        total += v == static_cast<int>(cls);
      for (auto i : s.train)
        train += y[i] == static_cast<int>(cls);
      c.expect(std::abs(train - 0.8 * total) <= 1.0, "class deviation above one sample");
    }
  }
  for (int t = 0; t < 300; ++t) {
    std::size_t n_repos = 2 + rng() % 8;
    std::size_t n = n_repos + rng() % 200;
    std::vector<std::string> repos(n);
    for (std::size_t i = 0; i < n; ++i)
      repos[i] = "org/r" + std::to_string(i < n_repos ? i : rng() % n_repos);
    double ratio = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    auto s = eval::cross_project_split(repos, ratio, rng());
    std::set<std::string> train_repos, test_repos;
    for (auto i : s.train)
      train_repos.insert(repos[i]);
    for (auto i : s.test)
      test_repos.insert(repos[i]);
    bool disjoint = std::none_of(test_repos.begin(), test_repos.end(),
                                 [&](const auto &r) { return train_repos.count(r) > 0; });
    c.expect(disjoint, "repository on both sides");
    c.expect(s.train.size() + s.test.size() == n, "cross-project split loses items");
    c.expect(!s.train.empty() && !s.test.empty(), "empty side");
  }
  c.note("100 stratified corpora, 300 cross-project inputs");
  return c.done();
}

// --- AC11 -------------------------------------------------------------------

Outcome ac11() {
  Check c;
  const auto &T = labels::LabelTables::builtin();
  std::map<ObjectiveClass, std::vector<std::string>> objective = {
      {ObjectiveClass::Bug, {"bug", "defect", "kind/bug", "type: bug"}},
      {ObjectiveClass::Enhancement,
       {"enhancement", "kind/enhancement", "type: enhancement", "type: improvement", "improvement",
        "feature request", "feature", "kind/feature", "type: new feature", "new feature"}},
      {ObjectiveClass::SupportDoc,
       {"help wanted", "status: help wanted", "type: support", "supports", "question", "type: question",
        "kind/question", "docs", "documentation", "type: documentation", "kind/documentation", "information",
        "more info needed", "more info required", "more-information-needed", "need more info", "needs info",
        "needs more info", "needs-info", "needs-details"}}};
  std::map<std::string, std::vector<std::string>> clusters = {
      {"duplicate",
       {"duplicate", "status/duplicate", "status: duplicate", "status:duplicate", "status=duplicate",
        "status-duplicate", "type:duplicate", "was:duplicate", "resolution:duplicate", "resolution/duplicate",
        "duplicate issue", "t-duplicate", "r: duplicate", "closed: duplicate", "kind/duplicate",
        "type: duplicate"}},
      {"won't fix",
       {"won't fix", "wont fix", "wontfix", "wont-fix", "status: won't fix", "will not fix",
        "resolution:won't fix", "status=will-not-fix", "closed: won't fix", "state:wont-fix",
        "status: will not fix", "won't-fix", "will-not-fix", "cant-fix", "cantfix", "can't fix"}}};
  std::map<PriorityClass, std::vector<std::string>> priority = {
      {PriorityClass::High,
       {"p0", "priority: p0", "p1", "priority 1", "priority: p1", "priority 2", "critical", "criticalpriority",
        "priority-critical", "critical priority", "priority:critical", "priority critical", "priority: critical",
        "priority - critical", "critical-priority", "priority/critical", "urgent", "priority/urgent",
        "priority/blocker", "priority: blocker", "important", "priority/important", "priority: major",
        "highpriority", "priority-high", "high priority", "priority:high", "priority high", "priority: high",
        "priority - high", "high-priority", "priority/high", "is:priority"}},
      {PriorityClass::Low,
       {"p3", "priority: p3", "priority 4", "priority: minor", "lowpriority", "priority-low", "low priority",
        "priority:low", "priority low", "priority: low", "priority - low", "low-priority", "priority/low",
        "is:no-priority"}}};

  std::size_t entries = 0;
  for (const auto &[cls, list] : objective)
    for (const auto &l : list) {
      ++entries;
      c.expect(T.objective.class_of(l) == cls, "objective label '" + l + "'");
      std::vector<std::string> one = {l, "some other label"};
      c.expect(labels::objective_of(one, T.objective) == cls, "mono-label rule on '" + l + "'");
    }
  for (const auto &[rep, list] : clusters) {
    auto idx = T.clusters.index_of_representative(rep);
    c.expect(idx.has_value(), "cluster '" + rep + "' missing");
    for (const auto &l : list) {
      ++entries;
      c.expect(idx && T.clusters.cluster_of(l) == idx, "cluster label '" + l + "'");
    }
  }
  for (const auto &[cls, list] : priority)
    for (const auto &l : list) {
      ++entries;
      c.expect(T.priority.class_of(l) == cls, "priority label '" + l + "'");
    }

  std::mt19937_64 rng(11);
  std::vector<std::string> pool;
  for (const auto &cl : T.clusters.clusters())
    pool.insert(pool.end(), cl.members.begin(), cl.members.end());
  pool.push_back("not a known label");
  for (int t = 0; t < 500; ++t) {
    std::vector<std::string> ls;
    std::size_t n = rng() % 8;
    for (std::size_t i = 0; i < n; ++i)
      ls.push_back(pool[rng() % pool.size()]);
    auto v = labels::label_features(ls, T.clusters);
    c.expect(v.size() == 66, "LF vector not 66-dim");
    for (auto b : v)
      c.expect(b == 0 || b == 1, "LF vector not binary");
    std::size_t ones = 0;
    for (auto b : v)
      ones += b;
    std::set<std::size_t> distinct;
    for (const auto &l : ls)
      if (auto i = T.clusters.cluster_of(l))
        distinct.insert(*i);
    c.expect(ones == distinct.size(), "LF vector does not mark exactly the matched clusters");
    auto shuffled = ls;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    c.expect(labels::label_features(shuffled, T.clusters) == v, "LF vector depends on label order");
  }
  c.note(std::to_string(entries) + " table entries, 500 LF vectors");
  return c.done();
}

// --- AC12 -------------------------------------------------------------------

Outcome ac12() {
  Check c;
  auto in = lines_of(data("textnorm/input.txt"));
  auto want = lines_of(data("textnorm/expected.txt"));
  c.expect(in.size() == 30 && want.size() == 30, "golden file is not 30 cases");
  for (std::size_t i = 0; i < std::min(in.size(), want.size()); ++i) {
    std::string got;
    for (const auto &t : text::normalize_pipeline(in[i], text::Source::Description).tokens)
      got += (got.empty() ? "" : " ") + t;
    c.expect(got == want[i], "golden line " + std::to_string(i + 1) + ": got '" + got + "'");
  }

  const std::vector<std::string> pieces = {
      "crash", "when", "parsing", "the", "file", "?", "NOT", "MUST", "getUserName", "snake_case_name",
      "https://github.com/org/repo/issues/12", "www.example.org/page", "a.b@mail.com", "@octocat", "/usr/lib/x.so",
      "C:\\temp\\log.txt", "src/main.cpp", "foo.bar(1, 2)", "init()", "2021-03-04", "12/31/2020", "10:45",
      "3:05 pm", "`inline code`", "```\nint x = 1;\n```", "**bold**", "# Heading", "- item", "<CODE>", "<URL>",
      "<USER>", "<", ">", "`", "```", ":", "/", "(", ")", "naïve", "42", "\n", "\t", "  "};
  std::mt19937_64 rng(12);
  for (int t = 0; t < 500; ++t) {
    std::string s;
    std::size_t n = rng() % 15;
    for (std::size_t i = 0; i < n; ++i) {
      s += pieces[rng() % pieces.size()];
      if (rng() % 3)
        s += ' ';
    }
    auto once = text::abstract_entities(s);
    c.expect(text::abstract_entities(once) == once, "abstraction not idempotent on '" + s + "'");
  }
  c.note("30 goldens, 500 random texts");
  return c.done();
}

// --- AC13 -------------------------------------------------------------------

std::map<std::string, std::string> tree_bytes(const fs::path &root) {
  std::map<std::string, std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file())
      out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

Outcome ac13() {
  Check c;
  const auto &issues = planted();
  pipeline::TrainConfig obj_cfg;
  obj_cfg.kind = learn::ModelKind::LogReg;
  obj_cfg.search_budget = 2;
  pipeline::TrainConfig pri_cfg;
  pri_cfg.kind = learn::ModelKind::Forest;
  pri_cfg.hyperparams = {{"n_trees", 30}};
  pri_cfg.balancing = pipeline::Balancing::Smote;

  std::vector<std::map<std::string, std::string>> runs;
  std::vector<std::string> reports;
  for (int run = 0; run < 2; ++run) {
    auto dir = scratch("determinism_" + std::to_string(run));
    auto obj = pipeline::ObjectiveModel::train(issues, obj_cfg);
    obj.save(dir / "objective");
    auto pri = pipeline::PriorityModel::train(issues, pipeline::ObjectiveSource::model(obj), pri_cfg);
    pri.save(dir / "priority");
    auto pred = pipeline::predict_priority(pri, issues);
    std::ofstream(dir / "predictions.csv", std::ios::binary)
        << pipeline::predictions_csv(pred, pipeline::priority_class_names(), pri.fingerprint());
    runs.push_back(tree_bytes(dir));

    std::string report;
    for (auto mode : {pipeline::EvalMode::CrossValidation, pipeline::EvalMode::ProjectBased,
                      pipeline::EvalMode::CrossProject}) {
      pipeline::EvalOptions o;
      o.mode = mode;
      o.folds = 3;
      o.weight_sweep = std::vector<int>{3, 7};
      auto out = pipeline::evaluate(issues, pipeline::ObjectiveSource::keyword(), pri_cfg, o);
      report += out.report.dump(2) + out.table + out.csv;
    }
    reports.push_back(report);
  }
  c.expect(!runs[0].empty(), "no artifacts written");
  c.expect(runs[0].size() == runs[1].size(), "different artifact sets");
  for (const auto &[name, bytes] : runs[0]) {
    auto it = runs[1].find(name);
    c.expect(it != runs[1].end() && it->second == bytes, "artifact differs: " + name);
  }
  c.expect(reports[0] == reports[1], "evaluation reports differ");
  c.note(std::to_string(runs[0].size()) + " artifacts, 3 evaluation modes");
  return c.done();
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC01 agreement kappa from reported agreement", ac01},
      {"AC02 metrics equal brute-force confusion counting", ac02},
      {"AC03 min-max scaling properties", ac03},
      {"AC04 inverse-frequency class weights", ac04},
      {"AC05 naive Bayes against exhaustive Bayes oracle", ac05},
      {"AC06 SMOTE points lie on neighbour segments", ac06},
      {"AC07 logistic-regression gradient against finite differences", ac07},
      {"AC08 random forest on separable data", ac08},
      {"AC09 planted-signal corpus beats comments baseline", ac09},
      {"AC10 stratified and cross-project splits", ac10},
      {"AC11 label tables and label feature vector", ac11},
      {"AC12 tokenizer goldens and abstraction idempotence", ac12},
      {"AC13 byte-identical reruns", ac13},
  };
  int failed = 0;
  for (const auto &[name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %s%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.empty() ? "" : " -- ",
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
