#include "triage/agreement.hpp"

#include "triage/common.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace triage::agreement {

using nlohmann::json;

void RatingMatrix::validate() const {
  if (k() < 2)
    fail(ErrorCode::InvalidArgument, "ratings need at least two categories");
  if (items.size() != cells.size())
    fail(ErrorCode::InvalidArgument, "item names and rows differ in length");
  if (!groups.empty() && groups.size() != cells.size())
    fail(ErrorCode::InvalidArgument, "group column length differs from the row count");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].size() != raters.size())
      fail(ErrorCode::InvalidArgument, "item '" + items[i] + "' has the wrong number of cells");
    std::size_t rated = 0;
    for (int c : cells[i]) {
      if (c != kMissing && (c < 0 || static_cast<std::size_t>(c) >= k()))
        fail(ErrorCode::InvalidArgument, "item '" + items[i] + "' holds an unknown category");
      rated += c != kMissing;
    }
    if (rated < 2)
      fail(ErrorCode::InvalidArgument, "item '" + items[i] + "' has fewer than two ratings");
  }
}

RatingMatrix RatingMatrix::subset(const std::vector<std::size_t> &rows) const {
  RatingMatrix s;
  s.raters = raters;
  s.categories = categories;
  for (auto r : rows) {
    s.items.push_back(items[r]);
    s.cells.push_back(cells[r]);
    if (!groups.empty())
      s.groups.push_back(groups[r]);
  }
  return s;
}

RatingMatrix parse_ratings_csv(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty())
    fail(ErrorCode::Parse, "ratings file is empty");
  RatingMatrix m;
  std::optional<std::size_t> id_col, group_col;
  std::vector<std::size_t> rater_cols;
  for (std::size_t c = 0; c < rows[0].size(); ++c) {
    auto h = trim(rows[0][c]);
    auto l = to_lower(h);
    if (!id_col && (l == "issue" || l == "id" || l == "item"))
      id_col = c;
    else if (!group_col && (l == "project" || l == "group" || l == "repo"))
      group_col = c;
    else {
      if (h.empty())
        fail(ErrorCode::Parse, "ratings header has an empty rater id");
      m.raters.push_back(h);
      rater_cols.push_back(c);
    }
  }
  if (m.raters.size() < 2)
    fail(ErrorCode::Parse, "ratings need at least two rater columns");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    auto where = "ratings row " + std::to_string(r + 1);
    if (row.size() != rows[0].size())
      fail(ErrorCode::Parse, where + ": wrong number of columns");
    m.items.push_back(id_col ? trim(row[*id_col]) : std::to_string(r));
    if (group_col)
      m.groups.push_back(trim(row[*group_col]));
    std::vector<int> cells;
    for (auto c : rater_cols) {
      auto v = to_lower(trim(row[c]));
      if (v.empty())
        cells.push_back(kMissing);
      else if (v == "h" || v == "high" || v == "hp")
        cells.push_back(0);
      else if (v == "l" || v == "low" || v == "lp")
        cells.push_back(1);
      else
        fail(ErrorCode::Parse, where + ": unknown rating '" + row[c] + "'");
    }
    m.cells.push_back(std::move(cells));
  }
  m.validate();
  return m;
}

namespace {

std::vector<std::size_t> category_counts(const std::vector<int> &row, std::size_t k) {
  std::vector<std::size_t> n(k, 0);
  for (int c : row)
    if (c != kMissing)
      ++n[static_cast<std::size_t>(c)];
  return n;
}

} // namespace

double item_agreement(const std::vector<int> &row, std::size_t k, ItemAgreement mode) {
  auto n = category_counts(row, k);
  std::size_t total = 0;
  for (auto v : n)
    total += v;
  if (total < 2)
    fail(ErrorCode::InvalidArgument, "an item needs at least two ratings");
  if (mode == ItemAgreement::Majority)
    return static_cast<double>(*std::max_element(n.begin(), n.end())) / static_cast<double>(total);
  double agree = 0.0;
  for (auto v : n)
    agree += static_cast<double>(v) * static_cast<double>(v - (v > 0 ? 1 : 0)) / 2.0;
  double pairs = static_cast<double>(total) * static_cast<double>(total - 1) / 2.0;
  return agree / pairs;
}

double percent_agreement(const RatingMatrix &m, ItemAgreement mode) {
  m.validate();
  if (m.cells.empty())
    fail(ErrorCode::InvalidArgument, "no rated items");
  double s = 0.0;
  for (const auto &row : m.cells)
    s += item_agreement(row, m.k(), mode);
  return s / static_cast<double>(m.cells.size());
}

double randolph_kappa(double observed, std::size_t k) {
  if (k < 2)
    fail(ErrorCode::InvalidArgument, "kappa needs at least two categories");
  double chance = 1.0 / static_cast<double>(k);
  return (observed - chance) / (1.0 - chance);
}

double randolph_kappa(const RatingMatrix &m) { return randolph_kappa(percent_agreement(m), m.k()); }

FleissResult fleiss_kappa(const RatingMatrix &m) {
  m.validate();
  FleissResult r;
  std::vector<const std::vector<int> *> complete;
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    bool full = std::none_of(m.cells[i].begin(), m.cells[i].end(), [](int c) { return c == kMissing; });
    if (full)
      complete.push_back(&m.cells[i]);
    else
      r.excluded_items.push_back(m.items[i]);
  }
  if (complete.empty())
    fail(ErrorCode::InvalidArgument, "Fleiss' kappa needs items rated by every rater");
  const double n = static_cast<double>(m.raters.size());
  const double N = static_cast<double>(complete.size());
  std::vector<double> p(m.k(), 0.0);
  double p_sum = 0.0;
  for (const auto *row : complete) {
    auto counts = category_counts(*row, m.k());
    double agree = 0.0;
    for (std::size_t j = 0; j < m.k(); ++j) {
      double c = static_cast<double>(counts[j]);
      p[j] += c;
      agree += c * (c - 1.0);
    }
    p_sum += agree / (n * (n - 1.0));
  }
  r.p_bar = p_sum / N;
  for (auto &v : p) {
    v /= N * n;
    r.p_e += v * v;
  }
  if (std::abs(1.0 - r.p_e) < 1e-12) {
    r.degenerate_marginals = true;
    r.kappa = 1.0;
    return r;
  }
  r.kappa = (r.p_bar - r.p_e) / (1.0 - r.p_e);
  return r;
}

std::vector<MajorityLabel> majority_labels(const RatingMatrix &m) {
  m.validate();
  std::vector<MajorityLabel> out;
  for (const auto &row : m.cells) {
    auto counts = category_counts(row, m.k());
    auto best = *std::max_element(counts.begin(), counts.end());
    auto winners = std::count(counts.begin(), counts.end(), best);
    MajorityLabel l;
    if (winners == 1)
      l.label = static_cast<int>(std::find(counts.begin(), counts.end(), best) - counts.begin());
    else
      l.tie = true;
    out.push_back(l);
  }
  return out;
}

std::vector<std::string> outlier_raters(const RatingMatrix &m) {
  m.validate();
  std::vector<std::string> out;
  for (std::size_t r = 0; r < m.raters.size(); ++r) {
    std::size_t rated = 0, disagree = 0;
    for (const auto &row : m.cells) {
      if (row[r] == kMissing)
        continue;
      ++rated;
      std::vector<std::size_t> counts(m.k(), 0);
      for (std::size_t o = 0; o < row.size(); ++o)
        if (o != r && row[o] != kMissing)
          ++counts[static_cast<std::size_t>(row[o])];
      auto best = *std::max_element(counts.begin(), counts.end());
      if (best == 0 || std::count(counts.begin(), counts.end(), best) > 1)
        continue;
      auto majority = static_cast<int>(std::find(counts.begin(), counts.end(), best) - counts.begin());
      disagree += row[r] != majority;
    }
    if (rated > 0 && 2 * disagree > rated)
      out.push_back(m.raters[r]);
  }
  return out;
}

Band band_of(double kappa) {
  constexpr double eps = 1e-9;
  if (kappa < 0.0 - eps)
    return Band::Poor;
  if (kappa < 0.21 - eps)
    return Band::Slight;
  if (kappa < 0.41 - eps)
    return Band::Fair;
  if (kappa < 0.61 - eps)
    return Band::Moderate;
  if (kappa < 0.81 - eps)
    return Band::Substantial;
  return Band::AlmostPerfect;
}

std::string_view to_string(Band b) {
  switch (b) {
  case Band::Poor: return "poor";
  case Band::Slight: return "slight";
  case Band::Fair: return "fair";
  case Band::Moderate: return "moderate";
  case Band::Substantial: return "substantial";
  case Band::AlmostPerfect: return "almost perfect";
  }
  return "?";
}

AgreementReport analyze(const RatingMatrix &m, ItemAgreement mode) {
  m.validate();
  AgreementReport r;
  r.items = m.cells.size();
  r.raters = m.raters.size();
  for (const auto &row : m.cells)
    r.per_item.push_back(item_agreement(row, m.k(), mode));
  double s = 0.0;
  for (double v : r.per_item)
    s += v;
  r.percent_agreement = r.items ? s / static_cast<double>(r.items) : 0.0;
  r.randolph_kappa = randolph_kappa(r.percent_agreement, m.k());
  r.band = band_of(r.randolph_kappa);
  try {
    r.fleiss = fleiss_kappa(m);
  } catch (const Error &e) {
    r.fleiss_error = e.what();
  }
  r.majority = majority_labels(m);
  r.outliers = outlier_raters(m);
  return r;
}

FullReport analyze_all(const RatingMatrix &m, ItemAgreement mode) {
  FullReport f;
  f.mode = mode;
  f.overall = analyze(m, mode);
  if (!m.groups.empty()) {
    std::map<std::string, std::vector<std::size_t>> rows;
    for (std::size_t i = 0; i < m.groups.size(); ++i)
      rows[m.groups[i]].push_back(i);
    for (const auto &[g, idx] : rows)
      f.by_group[g] = analyze(m.subset(idx), mode);
  }
  return f;
}

namespace {

json report_json(const AgreementReport &r, const RatingMatrix &m, const std::vector<std::string> &items) {
  json j = {{"items", r.items},
            {"raters", r.raters},
            {"percent_agreement", r.percent_agreement},
            {"randolph_kappa", r.randolph_kappa},
            {"band", std::string(to_string(r.band))},
            {"outlier_raters", r.outliers}};
  if (r.fleiss)
    j["fleiss"] = {{"kappa", r.fleiss->kappa},
                   {"p_bar", r.fleiss->p_bar},
                   {"p_e", r.fleiss->p_e},
                   {"degenerate_marginals", r.fleiss->degenerate_marginals},
                   {"excluded_items", r.fleiss->excluded_items}};
  else
    j["fleiss"] = {{"error", r.fleiss_error}};
  json per = json::array();
  for (std::size_t i = 0; i < r.per_item.size(); ++i) {
    const auto &ml = r.majority[i];
    per.push_back({{"item", i < items.size() ? items[i] : std::to_string(i)},
                   {"agreement", r.per_item[i]},
                   {"majority", ml.label ? json(m.categories[static_cast<std::size_t>(*ml.label)]) : json(nullptr)},
                   {"tie", ml.tie}});
  }
  j["per_item"] = per;
  return j;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

void table_line(std::ostringstream &os, const std::string &name, const AgreementReport &r) {
  os << std::left << std::setw(24) << name << std::right << std::setw(7) << r.items << std::setw(10)
     << fmt(r.percent_agreement) << std::setw(10) << fmt(r.randolph_kappa) << std::setw(10)
     << (r.fleiss ? fmt(r.fleiss->kappa) : std::string("n/a")) << "  " << to_string(r.band) << "\n";
}

} // namespace

json FullReport::to_json(const RatingMatrix &m) const {
  json j = {{"mode", mode == ItemAgreement::Pairwise ? "pairwise" : "majority"},
            {"categories", m.categories},
            {"overall", report_json(overall, m, m.items)}};
  if (!by_group.empty()) {
    json g = json::object();
    for (const auto &[name, r] : by_group) {
      std::vector<std::string> items;
      for (std::size_t i = 0; i < m.groups.size(); ++i)
        if (m.groups[i] == name)
          items.push_back(m.items[i]);
      g[name] = report_json(r, m, items);
    }
    j["groups"] = g;
  }
  return j;
}

std::string FullReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(24) << "scope" << std::right << std::setw(7) << "items" << std::setw(10)
     << "P_o" << std::setw(10) << "randolph" << std::setw(10) << "fleiss" << "  band\n";
  table_line(os, "overall", overall);
  for (const auto &[name, r] : by_group)
    table_line(os, name, r);
  if (!overall.outliers.empty()) {
    os << "outlier raters:";
    for (const auto &o : overall.outliers)
      os << " " << o;
    os << "\n";
  }
  return os.str();
}

} // namespace triage::agreement
