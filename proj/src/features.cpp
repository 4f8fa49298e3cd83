#include "triage/features.hpp"

#include "triage/common.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace triage::features {

using nlohmann::json;

std::vector<std::string> ngrams(std::span<const std::string> tokens, std::size_t lo, std::size_t hi) {
  std::vector<std::string> out;
  for (std::size_t n = lo; n <= hi; ++n) {
    if (n == 0 || tokens.size() < n)
      continue;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t k = 1; k < n; ++k) {
        g += ' ';
        g += tokens[i + k];
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

// --- TF-IDF -----------------------------------------------------------------

TfidfModel TfidfModel::fit(std::span<const std::vector<std::string>> docs, std::size_t max_features,
                           std::size_t ngram_lo, std::size_t ngram_hi) {
  if (docs.empty())
    fail(ErrorCode::InvalidArgument, "cannot fit TF-IDF on an empty corpus");
  if (ngram_lo == 0 || ngram_lo > ngram_hi)
    fail(ErrorCode::InvalidArgument, "invalid n-gram range");
  if (max_features == 0)
    fail(ErrorCode::InvalidArgument, "max_features must be positive");

  std::unordered_map<std::string, std::size_t> total, df;
  for (const auto &doc : docs) {
    auto grams = ngrams(doc, ngram_lo, ngram_hi);
    std::set<std::string_view> seen;
    for (const auto &g : grams) {
      ++total[g];
      if (seen.insert(g).second)
        ++df[g];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(total.begin(), total.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_features)
    ranked.resize(max_features);

  TfidfModel m;
  m.max_features_ = max_features;
  m.ngram_lo_ = ngram_lo;
  m.ngram_hi_ = ngram_hi;
  m.n_docs_ = docs.size();
  for (auto &r : ranked)
    m.terms_.push_back(r.first);
  std::sort(m.terms_.begin(), m.terms_.end());
  const double n = static_cast<double>(docs.size());
  for (const auto &t : m.terms_)
    m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0);
  m.build_index();
  return m;
}

void TfidfModel::build_index() {
  index_.clear();
  for (std::size_t i = 0; i < terms_.size(); ++i)
    index_.emplace(terms_[i], i);
}

std::optional<std::size_t> TfidfModel::index_of(const std::string &term) const {
  auto it = index_.find(term);
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

std::unordered_map<std::string, std::size_t>
TfidfModel::counts_in_vocab(std::span<const std::string> tokens) const {
  std::unordered_map<std::string, std::size_t> counts;
  for (auto &g : ngrams(tokens, ngram_lo_, ngram_hi_))
    if (index_.count(g))
      ++counts[g];
  return counts;
}

SparseVector TfidfModel::transform_counts(std::span<const std::string> tokens) const {
  std::vector<std::pair<std::uint32_t, double>> cells;
  for (const auto &[g, c] : counts_in_vocab(tokens))
    cells.emplace_back(static_cast<std::uint32_t>(index_.at(g)), static_cast<double>(c));
  std::sort(cells.begin(), cells.end());
  SparseVector v;
  for (auto &[i, x] : cells) {
    v.index.push_back(i);
    v.value.push_back(x);
  }
  return v;
}

SparseVector TfidfModel::transform(std::span<const std::string> tokens) const {
  auto v = transform_counts(tokens);
  for (std::size_t k = 0; k < v.index.size(); ++k)
    v.value[k] *= idf_[v.index[k]];
  double norm = v.norm();
  if (norm > 0.0)
    for (auto &x : v.value)
      x /= norm;
  return v;
}

json TfidfModel::to_json() const {
  return {{"terms", terms_},
          {"idf", idf_},
          {"max_features", max_features_},
          {"ngram_range", {ngram_lo_, ngram_hi_}},
          {"documents", n_docs_}};
}

TfidfModel TfidfModel::from_json(const json &j) {
  TfidfModel m;
  try {
    m.terms_ = j.at("terms").get<std::vector<std::string>>();
    m.idf_ = j.at("idf").get<std::vector<double>>();
    m.max_features_ = j.at("max_features").get<std::size_t>();
    m.ngram_lo_ = j.at("ngram_range").at(0).get<std::size_t>();
    m.ngram_hi_ = j.at("ngram_range").at(1).get<std::size_t>();
    m.n_docs_ = j.at("documents").get<std::size_t>();
  } catch (const json::exception &e) {
    fail(ErrorCode::Schema, std::string("TF-IDF model: ") + e.what());
  }
  if (m.terms_.size() != m.idf_.size() || m.terms_.size() > m.max_features_)
    fail(ErrorCode::Schema, "TF-IDF model: inconsistent vocabulary");
  for (double v : m.idf_)
    if (!(v > 0.0))
      fail(ErrorCode::Schema, "TF-IDF model: idf must be positive");
  m.build_index();
  return m;
}

std::string TfidfModel::fingerprint() const { return sha256_hex(to_json().dump()); }

// --- metadata ---------------------------------------------------------------

const std::array<std::string_view, kMetadataCount> &metadata_names() {
  static const std::array<std::string_view, kMetadataCount> names = {
      "title_words",         "desc_words",          "code",
      "url",                 "comments",            "cm_mean_len",
      "cm_developers_ratio", "time_to_discuss",     "events",
      "assigned",            "is_pull_request",     "has_commit",
      "has_milestone",       "labels",              "author_followers",
      "author_following",    "author_public_repos", "author_public_gists",
      "author_issue_counts", "author_github_cntrb", "author_account_age",
      "author_repo_cntrb",   "association",         "same_author_closer",
      "desc_positivity",     "desc_negativity",     "desc_pos_polarity",
      "desc_subjectivity"};
  return names;
}

MetadataFeatures extract_metadata(const IssueRecord &issue, const text::TokenizedDoc &description_doc,
                                  const sentiment::Lexicon &lex) {
  MetadataFeatures m{};
  auto set = [&m](Nf f, double v) { m[static_cast<std::size_t>(f)] = v; };
  auto d = [](auto v) { return static_cast<double>(v); };

  auto abstraction = text::abstract_entities_counted(issue.description);
  set(Nf::TitleWords, d(split_whitespace(issue.title).size()));
  set(Nf::DescWords, d(split_whitespace(issue.description).size()));
  set(Nf::Code, d(abstraction.count(text::AbstractToken::Code)));
  set(Nf::Url, d(abstraction.count(text::AbstractToken::Url)));

  set(Nf::Comments, d(issue.comments.size()));
  if (!issue.comments.empty()) {
    double len = 0.0;
    std::set<std::string> commenters;
    Timestamp last = issue.comments.front().created_at;
    for (const auto &c : issue.comments) {
      len += d(utf8_length(c.body));
      commenters.insert(c.author_login);
      last = std::max(last, c.created_at);
    }
    set(Nf::CmMeanLen, len / d(issue.comments.size()));
    set(Nf::CmDevelopersRatio, d(issue.comments.size()) / d(commenters.size()));
    set(Nf::TimeToDiscuss, std::max(0.0, hours_between(issue.created_at, last)));
  }

  set(Nf::Events, d(issue.events.size()));
  set(Nf::Assigned, issue.assignee_present ? 1.0 : 0.0);
  set(Nf::IsPullRequest, issue.is_pull_request ? 1.0 : 0.0);
  set(Nf::HasCommit, issue.referenced_commit ? 1.0 : 0.0);
  set(Nf::HasMilestone, issue.milestone_present ? 1.0 : 0.0);
  set(Nf::Labels, d(issue.labels.size()));

  const auto &a = issue.author;
  set(Nf::AuthorFollowers, d(a.followers));
  set(Nf::AuthorFollowing, d(a.following));
  set(Nf::AuthorPublicRepos, d(a.public_repos));
  set(Nf::AuthorPublicGists, d(a.public_gists));
  set(Nf::AuthorIssueCounts, d(a.issue_count));
  set(Nf::AuthorGithubCntrb, d(a.github_contributions));
  set(Nf::AuthorAccountAge, std::max(0.0, days_between(a.account_created_at, issue.created_at)));
  set(Nf::AuthorRepoCntrb, d(a.repo_contributions));
  set(Nf::Association, d(static_cast<int>(a.association)));
  set(Nf::SameAuthorCloser, issue.closer_login && *issue.closer_login == a.login ? 1.0 : 0.0);

  auto s = sentiment::score(description_doc.tokens, lex);
  set(Nf::DescPositivity, d(s.positivity));
  set(Nf::DescNegativity, d(s.negativity));
  set(Nf::DescPosPolarity, std::max(s.polarity, 0.0));
  set(Nf::DescSubjectivity, s.subjectivity);
  return m;
}

MetadataFeatures extract_metadata(const IssueRecord &issue) {
  return extract_metadata(issue, text::normalize_pipeline(issue.description, text::Source::Description));
}

// --- scaling ----------------------------------------------------------------

ScalerParams ScalerParams::fit(std::span<const MetadataFeatures> rows) {
  if (rows.empty())
    fail(ErrorCode::InvalidArgument, "cannot fit a scaler on an empty training set");
  ScalerParams p;
  p.min_ = rows.front();
  p.max_ = rows.front();
  for (const auto &r : rows)
    for (std::size_t j = 0; j < kMetadataCount; ++j) {
      if (!std::isfinite(r[j]))
        fail(ErrorCode::Numeric, "non-finite value in metadata column " +
                                     std::string(metadata_names()[j]));
      p.min_[j] = std::min(p.min_[j], r[j]);
      p.max_[j] = std::max(p.max_[j], r[j]);
    }
  return p;
}

MetadataFeatures ScalerParams::scale(const MetadataFeatures &row) const {
  MetadataFeatures out{};
  for (std::size_t j = 0; j < kMetadataCount; ++j) {
    double range = max_[j] - min_[j];
    if (!(range > 0.0)) {
      out[j] = 0.0;
      continue;
    }
    out[j] = std::clamp((row[j] - min_[j]) / range, 0.0, 1.0);
  }
  return out;
}

json ScalerParams::to_json() const {
  json cols = json::array();
  for (std::size_t j = 0; j < kMetadataCount; ++j)
    cols.push_back({{"name", metadata_names()[j]}, {"min", min_[j]}, {"max", max_[j]}});
  return {{"columns", cols}};
}

ScalerParams ScalerParams::from_json(const json &j) {
  ScalerParams p;
  try {
    const auto &cols = j.at("columns");
    if (cols.size() != kMetadataCount)
      fail(ErrorCode::Schema, "scaler: expected 28 columns");
    for (std::size_t k = 0; k < kMetadataCount; ++k) {
      if (cols[k].at("name").get<std::string>() != metadata_names()[k])
        fail(ErrorCode::Schema, "scaler: column order mismatch");
      p.min_[k] = cols[k].at("min").get<double>();
      p.max_[k] = cols[k].at("max").get<double>();
      if (p.min_[k] > p.max_[k])
        fail(ErrorCode::Schema, "scaler: min exceeds max");
    }
  } catch (const json::exception &e) {
    fail(ErrorCode::Schema, std::string("scaler: ") + e.what());
  }
  return p;
}

std::string ScalerParams::fingerprint() const { return sha256_hex(to_json().dump()); }

// --- assembly ---------------------------------------------------------------

std::vector<std::string> FeatureLayout::names(const TfidfModel &title, const TfidfModel &desc,
                                              const labels::ClusterTable &clusters) const {
  std::vector<std::string> out;
  out.reserve(total());
  for (const auto &t : title.terms())
    out.push_back("title:" + t);
  for (const auto &t : desc.terms())
    out.push_back("desc:" + t);
  for (auto c : kObjectiveClasses)
    out.push_back("objective:" + std::string(to_string(c)));
  for (const auto &c : clusters.clusters())
    out.push_back("label:" + c.representative);
  for (auto n : metadata_names())
    out.emplace_back(n);
  return out;
}

FeatureVector assemble(const text::TokenizedDoc &title, const text::TokenizedDoc &description,
                       std::span<const std::string> raw_labels, const MetadataFeatures &raw_metadata,
                       const TfidfModel &title_model, const TfidfModel &desc_model,
                       const ScalerParams &scaler, std::span<const double> objective_probs,
                       const labels::ClusterTable &clusters) {
  if (objective_probs.size() != kObjectiveClassCount)
    fail(ErrorCode::InvalidArgument, "expected 3 objective probabilities, got " +
                                         std::to_string(objective_probs.size()));
  double sum = 0.0;
  for (double p : objective_probs) {
    if (!(p >= 0.0 && p <= 1.0))
      fail(ErrorCode::InvalidArgument, "objective probability outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    fail(ErrorCode::InvalidArgument, "objective probabilities do not sum to 1");
  if (clusters.clusters().size() != labels::kClusterCount)
    fail(ErrorCode::InvalidArgument, "label table does not have 66 clusters");

  FeatureVector fv;
  auto t = title_model.transform(title.tokens);
  auto d = desc_model.transform(description.tokens);
  t.append_to(fv.tf, 0);
  d.append_to(fv.tf, static_cast<std::uint32_t>(title_model.size()));
  auto base = static_cast<std::uint32_t>(title_model.size() + desc_model.size());
  for (std::size_t k = 0; k < kObjectiveClassCount; ++k)
    if (objective_probs[k] != 0.0) {
      fv.tf.index.push_back(base + static_cast<std::uint32_t>(k));
      fv.tf.value.push_back(objective_probs[k]);
    }
  fv.lf = labels::label_features(raw_labels, clusters);
  fv.nf = scaler.scale(raw_metadata);
  return fv;
}

SparseVector flatten(const FeatureVector &fv, const FeatureLayout &layout) {
  SparseVector out = fv.tf;
  for (std::size_t k = 0; k < layout.lf_dim; ++k)
    if (fv.lf[k]) {
      out.index.push_back(static_cast<std::uint32_t>(layout.lf_offset() + k));
      out.value.push_back(1.0);
    }
  for (std::size_t k = 0; k < layout.nf_dim; ++k)
    if (fv.nf[k] != 0.0) {
      out.index.push_back(static_cast<std::uint32_t>(layout.nf_offset() + k));
      out.value.push_back(fv.nf[k]);
    }
  return out;
}


std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string feature_matrix_csv(std::span<const std::string> ids, std::span<const FeatureVector> rows,
                               const labels::ClusterTable &clusters) {
  if (ids.size() != rows.size())
    fail(ErrorCode::InvalidArgument, "feature dump needs one id per row");
  std::string out = "id";
  for (auto n : metadata_names())
    out += "," + std::string(n);
  for (const auto &c : clusters.clusters()) {
    out += "," + csv_escape("label:" + c.representative);
  }
  out += ",tf\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += csv_escape(ids[r]);
    for (double v : rows[r].nf)
      out += "," + format_double(v);
    for (auto b : rows[r].lf)
      out += b ? ",1" : ",0";
    out += ",";
    const auto &tf = rows[r].tf;
    for (std::size_t k = 0; k < tf.index.size(); ++k) {
      if (k)
        out += ' ';
      out += std::to_string(tf.index[k]) + ":" + format_double(tf.value[k]);
    }
    out += "\n";
  }
  return out;
}

} // namespace triage::features
