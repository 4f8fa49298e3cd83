#include "triage/pipeline.hpp"

#include "triage/common.hpp"
#include "triage/embedded_data.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

namespace triage::pipeline {

using nlohmann::json;

std::vector<PreparedIssue> prepare(const Corpus &corpus, std::size_t threads) {
  const auto &tp = text::TextPipeline::builtin();
  const auto &lex = sentiment::Lexicon::builtin();
  const auto &tables = labels::LabelTables::builtin();
  std::vector<PreparedIssue> out(corpus.issues.size());
  auto work = [&](std::size_t i) {
    const auto &issue = corpus.issues[i];
    auto &p = out[i];
    p.id = issue.id;
    p.repo = issue.repo;
    p.title = tp.normalize(issue.title, text::Source::Title);
    p.description = tp.normalize(issue.description, text::Source::Description);
    p.labels = issue.labels;
    p.metadata = features::extract_metadata(issue, p.description, lex);
    p.objective = labels::objective_of(issue.labels, tables.objective);
    p.priority = labels::priority_of(issue.labels, tables.priority);
    p.comments = issue.comments.size();
    p.created_at = issue.created_at;
    p.updated_at = issue.updated_at;
  };
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, out.size() / 64));
  if (threads <= 1) {
    for (std::size_t i = 0; i < out.size(); ++i)
      work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (auto i = next.fetch_add(1); i < out.size(); i = next.fetch_add(1))
        work(i);
    });
  for (auto &th : pool)
    th.join();
  return out;
}

std::string preprocessing_checksum() {
  static const std::string sum = sha256_hex(
      sha256_hex(data::stopwords()) + sha256_hex(data::lemma_exceptions()) +
      sentiment::Lexicon::builtin().checksum() + labels::LabelTables::builtin().checksum +
      sha256_hex(data::keyword_rules()));
  return sum;
}

std::string_view to_string(Balancing b) {
  switch (b) {
  case Balancing::None: return "none";
  case Balancing::ClassWeights: return "class_weights";
  case Balancing::Smote: return "smote";
  }
  return "?";
}

std::optional<Balancing> parse_balancing(std::string_view s) {
  for (auto b : {Balancing::None, Balancing::ClassWeights, Balancing::Smote})
    if (to_string(b) == s)
      return b;
  if (s == "weights")
    return Balancing::ClassWeights;
  return std::nullopt;
}

namespace {

json hyperparams_json(const learn::Hyperparams &hp) {
  json j = json::object();
  for (const auto &[k, v] : hp)
    j[k] = v;
  return j;
}

learn::Hyperparams hyperparams_from(const json &j) {
  learn::Hyperparams hp;
  for (auto it = j.begin(); it != j.end(); ++it)
    hp[it.key()] = it.value().get<double>();
  return hp;
}

json search_json(const learn::SearchResult &s) {
  json trace = json::array();
  for (const auto &t : s.trace)
    trace.push_back({{"params", hyperparams_json(t.params)}, {"score", t.score}});
  return {{"best", hyperparams_json(s.best)}, {"best_score", s.best_score}, {"trace", trace}};
}

learn::SearchResult search_from(const json &j) {
  learn::SearchResult s;
  s.best = hyperparams_from(j.at("best"));
  s.best_score = j.at("best_score").get<double>();
  for (const auto &t : j.at("trace"))
    s.trace.push_back({hyperparams_from(t.at("params")), t.at("score").get<double>()});
  return s;
}

TrainConfig config_from(const json &j) {
  TrainConfig c;
  auto kind = learn::parse_model_kind(j.at("kind").get<std::string>());
  auto bal = parse_balancing(j.at("balancing").get<std::string>());
  auto metric = eval::parse_metric(j.at("search_metric").get<std::string>());
  if (!kind || !bal || !metric)
    fail(ErrorCode::Schema, "model config holds an unknown enum value");
  c.kind = *kind;
  c.balancing = *bal;
  c.search_metric = *metric;
  c.hyperparams = hyperparams_from(j.at("hyperparams"));
  if (!j.at("weight_override").is_null())
    c.weight_override = j.at("weight_override").get<int>();
  c.smote_k = j.at("smote_k").get<std::size_t>();
  c.search_budget = j.at("search_budget").get<std::size_t>();
  c.search_folds = j.at("search_folds").get<std::size_t>();
  if (j.contains("search_space")) {
    learn::SearchSpace sp;
    for (const auto &r : j.at("search_space"))
      sp.ranges.push_back({r.at("name").get<std::string>(), r.at("lo").get<double>(),
                           r.at("hi").get<double>(), r.at("integer").get<bool>(),
                           r.at("log_scale").get<bool>()});
    c.search_space = sp;
  }
  c.title_max_features = j.at("title_max_features").get<std::size_t>();
  c.desc_max_features = j.at("desc_max_features").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

learn::SearchSpace default_space(learn::ModelKind k) {
  switch (k) {
  case learn::ModelKind::NaiveBayes: return learn::SearchSpace::nb_default();
  case learn::ModelKind::LogReg: return learn::SearchSpace::logreg_default();
  case learn::ModelKind::Knn: return learn::SearchSpace::knn_default();
  default: return learn::SearchSpace::forest_default();
  }
}

std::string ids_fingerprint(std::span<const PreparedIssue *const> issues) {
  std::vector<std::string> ids;
  for (const auto *p : issues)
    ids.push_back(p->id);
  std::sort(ids.begin(), ids.end());
  std::string joined;
  for (const auto &id : ids)
    joined += id + "\n";
  return sha256_hex(joined);
}

std::pair<features::TfidfModel, features::TfidfModel>
fit_text(std::span<const PreparedIssue *const> issues, const TrainConfig &cfg) {
  std::vector<std::vector<std::string>> titles, descs;
  for (const auto *p : issues) {
    titles.push_back(p->title.tokens);
    descs.push_back(p->description.tokens);
  }
  return {features::TfidfModel::fit(titles, cfg.title_max_features),
          features::TfidfModel::fit(descs, cfg.desc_max_features)};
}

learn::ClassWeights weights_for(std::span<const int> y, std::size_t K, const TrainConfig &cfg,
                                bool priority_task) {
  if (cfg.balancing != Balancing::ClassWeights)
    return learn::ClassWeights::uniform(K);
  if (priority_task && cfg.weight_override)
    return learn::ClassWeights::priority_override(*cfg.weight_override);
  // a class missing from a small training part keeps weight 1
  std::vector<double> freq(K, 0.0);
  for (int c : y)
    freq[static_cast<std::size_t>(c)] += 1.0;
  learn::ClassWeights cw;
  for (std::size_t c = 0; c < K; ++c)
    cw.w.push_back(freq[c] > 0.0 ? static_cast<double>(y.size()) / freq[c] : 1.0);
  return cw;
}

learn::Estimator fit_estimator(const TrainConfig &cfg, learn::Dataset data,
                               const learn::ClassWeights &cw) {
  if (cfg.balancing == Balancing::Smote) {
    std::vector<std::size_t> counts(data.n_classes, 0);
    for (int c : data.y)
      ++counts[static_cast<std::size_t>(c)];
    bool can = true;
    for (auto c : counts)
      can = can && (c == 0 || c >= 2);
    if (can)
      data = learn::smote_balance(data, cfg.smote_k, mix_seed(cfg.seed, 0x5307E));
  }
  return learn::train_estimator(cfg.kind, data, cw, cfg.hyperparams, cfg.seed);
}

SparseVector concat(std::initializer_list<std::pair<const SparseVector *, std::uint32_t>> parts) {
  SparseVector out;
  for (const auto &[v, off] : parts)
    v->append_to(out, off);
  return out;
}

template <class Model, class Train>
std::optional<learn::SearchResult> run_search(std::span<const PreparedIssue *const> issues,
                                              std::span<const int> y, std::size_t K, TrainConfig &cfg,
                                              Train train_fn) {
  if (cfg.search_budget == 0)
    return std::nullopt;
  auto space = cfg.search_space.value_or(default_space(cfg.kind));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < K; ++c)
    names.push_back(std::to_string(c));
  std::size_t folds = std::clamp<std::size_t>(cfg.search_folds, 2, std::max<std::size_t>(2, y.size()));
  auto evaluator = [&](const learn::Hyperparams &hp) {
    TrainConfig inner = cfg;
    inner.search_budget = 0;
    for (const auto &[k, v] : hp)
      inner.hyperparams[k] = v;
    auto cv = eval::cross_validate(y, names, folds, cfg.seed,
                                   [&](std::span<const std::size_t> tr, std::span<const std::size_t> te) {
                                     std::vector<const PreparedIssue *> sub;
                                     for (auto i : tr)
                                       sub.push_back(issues[i]);
                                     Model m = train_fn(sub, inner);
                                     std::vector<int> pred;
                                     for (auto i : te)
                                       pred.push_back(m(issues[i]));
                                     return pred;
                                   });
    return cfg.search_metric == eval::Metric::Accuracy ? cv.summary.accuracy_mean
                                                       : cv.summary.macro_f1_mean;
  };
  auto res = learn::random_search(space, cfg.search_budget, mix_seed(cfg.seed, 0x5EA4C4), evaluator);
  for (const auto &[k, v] : res.best)
    cfg.hyperparams[k] = v;
  return res;
}

void check_format(const json &m, const char *task) {
  if (m.value("format", "") != "triage-model" || m.value("format_version", 0) != 1)
    fail(ErrorCode::Schema, "not a model artifact of a supported version");
  if (m.value("task", "") != task)
    fail(ErrorCode::Schema, std::string("model artifact is not a ") + task + " model");
  if (m.value("preprocessing_checksum", "") != preprocessing_checksum())
    fail(ErrorCode::Checksum, "checksum mismatch: preprocessing tables differ from those the model was trained with");
}

json read_json_file(const std::filesystem::path &p) {
  if (!std::filesystem::exists(p))
    fail(ErrorCode::Io, "missing model file '" + p.string() + "'");
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error &e) {
    fail(ErrorCode::Parse, "'" + p.string() + "': " + e.what());
  }
}

json verified_asset(const std::filesystem::path &dir, const json &manifest, const std::string &name) {
  auto expected = manifest.at("assets").at(name).get<std::string>();
  auto path = dir / name;
  if (!std::filesystem::exists(path))
    fail(ErrorCode::Io, "missing model asset '" + path.string() + "'");
  if (sha256_file(path) != expected)
    fail(ErrorCode::Checksum, "checksum mismatch for " + name + " in '" + dir.string() + "'");
  return read_json_file(path);
}

void write_json(const std::filesystem::path &p, const json &j) { write_file_atomic(p, j.dump() + "\n"); }

} // namespace

json TrainConfig::to_json() const {
  json j = {{"kind", std::string(learn::to_string(kind))},
            {"hyperparams", hyperparams_json(hyperparams)},
            {"balancing", std::string(pipeline::to_string(balancing))},
            {"weight_override", weight_override ? json(*weight_override) : json(nullptr)},
            {"smote_k", smote_k},
            {"search_budget", search_budget},
            {"search_folds", search_folds},
            {"search_metric", search_metric == eval::Metric::Accuracy ? "accuracy" : "macro_f1"},
            {"title_max_features", title_max_features},
            {"desc_max_features", desc_max_features},
            {"seed", seed}};
  if (search_space) {
    json sp = json::array();
    for (const auto &r : search_space->ranges)
      sp.push_back({{"name", r.name}, {"lo", r.lo}, {"hi", r.hi}, {"integer", r.integer},
                    {"log_scale", r.log_scale}});
    j["search_space"] = sp;
  }
  return j;
}

std::vector<std::string> objective_class_names() {
  std::vector<std::string> n;
  for (auto c : kObjectiveClasses)
    n.emplace_back(to_string(c));
  return n;
}

std::vector<std::string> priority_class_names() {
  std::vector<std::string> n;
  for (auto c : kPriorityClasses)
    n.emplace_back(to_string(c));
  return n;
}

// --- stage 1 ----------------------------------------------------------------

namespace {

using Predictor = std::function<int(const PreparedIssue *)>;

std::vector<const PreparedIssue *> pointers(std::span<const PreparedIssue> issues) {
  std::vector<const PreparedIssue *> out;
  for (const auto &p : issues)
    out.push_back(&p);
  return out;
}

} // namespace

ObjectiveModel ObjectiveModel::keyword() {
  ObjectiveModel m;
  m.config_.kind = learn::ModelKind::Keyword;
  m.config_.balancing = Balancing::None;
  return m;
}

ObjectiveModel ObjectiveModel::train(std::span<const PreparedIssue> issues, const TrainConfig &config) {
  auto ptrs = pointers(issues);
  return train(std::span<const PreparedIssue *const>(ptrs), config);
}

ObjectiveModel ObjectiveModel::train(std::span<const PreparedIssue *const> issues,
                                     const TrainConfig &config) {
  if (config.kind == learn::ModelKind::Keyword) {
    auto m = keyword();
    m.config_.seed = config.seed;
    return m;
  }
  std::vector<const PreparedIssue *> labelled;
  for (const auto *p : issues)
    if (p->objective)
      labelled.push_back(p);
  if (labelled.empty())
    fail(ErrorCode::InvalidArgument, "no issue carries exactly one objective label");
  std::vector<int> y;
  for (const auto *p : labelled)
    y.push_back(static_cast<int>(*p->objective));

  ObjectiveModel m;
  m.config_ = config;
  m.search_ = run_search<Predictor>(
      labelled, y, kObjectiveClassCount, m.config_,
      [](std::span<const PreparedIssue *const> sub, const TrainConfig &inner) -> Predictor {
        auto fitted = std::make_shared<ObjectiveModel>(ObjectiveModel::train(sub, inner));
        return [fitted](const PreparedIssue *p) {
          return static_cast<int>(learn::argmax(fitted->predict_proba(*p)));
        };
      });

  auto [t, d] = fit_text(labelled, m.config_);
  m.title_ = std::move(t);
  m.desc_ = std::move(d);
  learn::Dataset data{CsrMatrix(m.title_->size() + m.desc_->size()), y, kObjectiveClassCount};
  for (const auto *p : labelled)
    data.X.add_row(m.row(*p));
  auto cw = weights_for(y, kObjectiveClassCount, m.config_, false);
  m.estimator_ = fit_estimator(m.config_, std::move(data), cw);
  m.train_fingerprint_ = ids_fingerprint(labelled);
  m.train_size_ = labelled.size();
  return m;
}

SparseVector ObjectiveModel::row(const PreparedIssue &issue) const {
  bool counts = config_.kind == learn::ModelKind::NaiveBayes;
  auto t = counts ? title_->transform_counts(issue.title.tokens) : title_->transform(issue.title.tokens);
  auto d = counts ? desc_->transform_counts(issue.description.tokens)
                  : desc_->transform(issue.description.tokens);
  return concat({{&t, 0}, {&d, static_cast<std::uint32_t>(title_->size())}});
}

ObjectiveProbs ObjectiveModel::predict_proba(const PreparedIssue &issue) const {
  if (config_.kind == learn::ModelKind::Keyword) {
    std::vector<std::string> tokens = issue.title.tokens;
    tokens.insert(tokens.end(), issue.description.tokens.begin(), issue.description.tokens.end());
    return learn::KeywordClassifier::builtin().predict_proba(tokens);
  }
  auto r = row(issue);
  auto p = learn::predict_proba(*estimator_, RowView{r.index, r.value});
  ObjectiveProbs out{};
  double sum = 0.0;
  for (std::size_t c = 0; c < kObjectiveClassCount && c < p.size(); ++c)
    sum += (out[c] = std::clamp(p[c], 0.0, 1.0));
  for (auto &v : out)
    v = sum > 0.0 ? v / sum : 1.0 / static_cast<double>(kObjectiveClassCount);
  return out;
}

json ObjectiveModel::manifest() const {
  json m = {{"format", "triage-model"},
            {"format_version", 1},
            {"task", "objective"},
            {"config", config_.to_json()},
            {"classes", objective_class_names()},
            {"preprocessing_checksum", preprocessing_checksum()},
            {"train_fingerprint", train_fingerprint_},
            {"train_size", train_size_}};
  json assets = json::object();
  if (config_.kind != learn::ModelKind::Keyword) {
    assets["title_tfidf.json"] = sha256_hex(title_->to_json().dump() + "\n");
    assets["desc_tfidf.json"] = sha256_hex(desc_->to_json().dump() + "\n");
    m["estimator"] = learn::estimator_to_json(*estimator_);
  }
  m["assets"] = assets;
  if (search_)
    m["search"] = search_json(*search_);
  return m;
}

void ObjectiveModel::save(const std::filesystem::path &dir) const {
  std::filesystem::create_directories(dir);
  if (config_.kind != learn::ModelKind::Keyword) {
    write_json(dir / "title_tfidf.json", title_->to_json());
    write_json(dir / "desc_tfidf.json", desc_->to_json());
  }
  write_json(dir / "model.json", manifest());
}

ObjectiveModel ObjectiveModel::load(const std::filesystem::path &dir) {
  auto man = read_json_file(dir / "model.json");
  ObjectiveModel m;
  try {
    check_format(man, "objective");
    m.config_ = config_from(man.at("config"));
    m.train_fingerprint_ = man.at("train_fingerprint").get<std::string>();
    m.train_size_ = man.at("train_size").get<std::size_t>();
    if (man.contains("search"))
      m.search_ = search_from(man.at("search"));
    if (m.config_.kind != learn::ModelKind::Keyword) {
      m.title_ = features::TfidfModel::from_json(verified_asset(dir, man, "title_tfidf.json"));
      m.desc_ = features::TfidfModel::from_json(verified_asset(dir, man, "desc_tfidf.json"));
      m.estimator_ = learn::estimator_from_json(man.at("estimator"));
      if (learn::n_features_of(*m.estimator_) != m.title_->size() + m.desc_->size())
        fail(ErrorCode::Checksum, "estimator width does not match the stored vectorizers");
    }
  } catch (const json::exception &e) {
    fail(ErrorCode::Schema, "objective model '" + dir.string() + "': " + e.what());
  }
  return m;
}

std::string ObjectiveModel::fingerprint() const { return sha256_hex(manifest().dump() + "\n"); }

// --- objective sources ------------------------------------------------------

ObjectiveSource ObjectiveSource::keyword() { return {}; }

ObjectiveSource ObjectiveSource::model(ObjectiveModel m) {
  ObjectiveSource s;
  s.kind_ = Kind::Model;
  s.model_ = std::make_shared<const ObjectiveModel>(std::move(m));
  return s;
}

ObjectiveSource ObjectiveSource::imported(const std::filesystem::path &csv) {
  return imported(load_objective_probs(csv), csv.filename().string());
}

ObjectiveSource ObjectiveSource::imported(std::map<std::string, ObjectiveProbs> probs, std::string origin) {
  ObjectiveSource s;
  s.kind_ = Kind::Imported;
  s.imported_ = std::make_shared<const std::map<std::string, ObjectiveProbs>>(std::move(probs));
  s.origin_ = std::move(origin);
  return s;
}

ObjectiveProbs ObjectiveSource::probs(const PreparedIssue &issue) const {
  switch (kind_) {
  case Kind::Keyword:
    return ObjectiveModel::keyword().predict_proba(issue);
  case Kind::Model:
    return model_->predict_proba(issue);
  case Kind::Imported:
    if (auto it = imported_->find(issue.id); it != imported_->end())
      return it->second;
    fail(ErrorCode::InvalidArgument, "objective probability file has no row for issue '" + issue.id + "'");
  }
  return {};
}

std::string ObjectiveSource::kind() const {
  switch (kind_) {
  case Kind::Keyword: return "keyword";
  case Kind::Model: return "model";
  case Kind::Imported: return "imported";
  }
  return "?";
}

json ObjectiveSource::describe() const {
  json j = {{"kind", kind()}};
  if (kind_ == Kind::Model) {
    j["model_kind"] = std::string(learn::to_string(model_->kind()));
    j["fingerprint"] = model_->fingerprint();
  }
  if (kind_ == Kind::Imported) {
    j["file"] = origin_;
    j["rows"] = imported_->size();
  }
  return j;
}

std::map<std::string, ObjectiveProbs> load_objective_probs(const std::filesystem::path &csv) {
  if (!std::filesystem::exists(csv))
    fail(ErrorCode::Io, "objective probability file '" + csv.string() + "' does not exist");
  auto rows = parse_csv(read_file(csv));
  if (rows.empty())
    fail(ErrorCode::Parse, "objective probability file is empty");
  const auto &header = rows.front();
  std::optional<std::size_t> id_col;
  std::array<std::optional<std::size_t>, kObjectiveClassCount> cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto h = trim(header[i]);
    if (to_lower(h) == "id" || to_lower(h) == "issue")
      id_col = i;
    else if (auto c = parse_objective(h))
      cols[static_cast<std::size_t>(*c)] = i;
  }
  if (!id_col || !cols[0] || !cols[1] || !cols[2])
    fail(ErrorCode::Parse, "objective probability header must be id,Bug,Enhancement,SupportDoc");
  std::map<std::string, ObjectiveProbs> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    auto where = "objective probability row " + std::to_string(r + 1);
    if (row.size() != header.size())
      fail(ErrorCode::Parse, where + ": wrong number of columns");
    ObjectiveProbs p{};
    double sum = 0.0;
    for (std::size_t c = 0; c < kObjectiveClassCount; ++c) {
      try {
        std::size_t used = 0;
        auto cell = trim(row[*cols[c]]);
        p[c] = std::stod(cell, &used);
        if (used != cell.size())
          throw std::invalid_argument("trailing characters");
      } catch (const std::exception &) {
        fail(ErrorCode::Parse, where + ": probability is not a number");
      }
      if (!(p[c] >= 0.0 && p[c] <= 1.0))
        fail(ErrorCode::Parse, where + ": probability outside [0,1]");
      sum += p[c];
    }
    if (std::abs(sum - 1.0) > 1e-6)
      fail(ErrorCode::Parse, where + ": probabilities do not sum to 1");
    for (auto &v : p)
      v /= sum;
    auto id = trim(row[*id_col]);
    if (!out.emplace(id, p).second)
      fail(ErrorCode::Parse, where + ": duplicate id '" + id + "'");
  }
  return out;
}

// --- stage 2 ----------------------------------------------------------------

features::FeatureLayout PriorityModel::layout() const { return features::FeatureLayout::of(*title_, *desc_); }

std::vector<std::string> PriorityModel::feature_names() const { return layout().names(*title_, *desc_); }

SparseVector PriorityModel::row(const PreparedIssue &issue, const ObjectiveProbs &objective) const {
  auto fv = features::assemble(issue.title, issue.description, issue.labels, issue.metadata, *title_,
                               *desc_, *scaler_, objective);
  if (config_.kind == learn::ModelKind::NaiveBayes) {
    // count-valued text block for multinomial NB
    SparseVector tf;
    auto t = title_->transform_counts(issue.title.tokens);
    auto d = desc_->transform_counts(issue.description.tokens);
    t.append_to(tf, 0);
    d.append_to(tf, static_cast<std::uint32_t>(title_->size()));
    for (std::size_t k = 0; k < fv.tf.index.size(); ++k)
      if (fv.tf.index[k] >= title_->size() + desc_->size()) {
        tf.index.push_back(fv.tf.index[k]);
        tf.value.push_back(fv.tf.value[k]);
      }
    fv.tf = std::move(tf);
  }
  return features::flatten(fv, layout());
}

PriorityModel PriorityModel::train(std::span<const PreparedIssue> issues, const ObjectiveSource &source,
                                   const TrainConfig &config) {
  auto ptrs = pointers(issues);
  return train(std::span<const PreparedIssue *const>(ptrs), source, config);
}

PriorityModel PriorityModel::train(std::span<const PreparedIssue *const> issues,
                                   const ObjectiveSource &source, const TrainConfig &config) {
  if (config.kind == learn::ModelKind::Keyword)
    fail(ErrorCode::InvalidArgument, "the keyword baseline only predicts objectives");
  std::vector<const PreparedIssue *> labelled;
  for (const auto *p : issues)
    if (p->priority)
      labelled.push_back(p);
  if (labelled.empty())
    fail(ErrorCode::InvalidArgument, "no issue carries a priority label");
  std::vector<int> y;
  for (const auto *p : labelled)
    y.push_back(static_cast<int>(*p->priority));

  PriorityModel m;
  m.config_ = config;
  m.search_ = run_search<Predictor>(
      labelled, y, kPriorityClassCount, m.config_,
      [&source](std::span<const PreparedIssue *const> sub, const TrainConfig &inner) -> Predictor {
        auto fitted = std::make_shared<PriorityModel>(PriorityModel::train(sub, source, inner));
        return [fitted, &source](const PreparedIssue *p) {
          return static_cast<int>(learn::argmax(fitted->predict_proba(*p, source.probs(*p))));
        };
      });

  auto [t, d] = fit_text(labelled, m.config_);
  m.title_ = std::move(t);
  m.desc_ = std::move(d);
  std::vector<features::MetadataFeatures> raw;
  for (const auto *p : labelled)
    raw.push_back(p->metadata);
  m.scaler_ = features::ScalerParams::fit(raw);

  auto lay = m.layout();
  learn::Dataset data{CsrMatrix(lay.total()), y, kPriorityClassCount};
  for (const auto *p : labelled)
    data.X.add_row(m.row(*p, source.probs(*p)));
  m.weights_ = weights_for(y, kPriorityClassCount, m.config_, true);
  m.estimator_ = fit_estimator(m.config_, std::move(data), m.weights_);
  m.objective_kind_ = source.kind();
  m.objective_description_ = source.describe();
  if (const auto *om = source.model_ptr())
    m.objective_ = *om;
  m.train_fingerprint_ = ids_fingerprint(labelled);
  m.train_size_ = labelled.size();
  return m;
}

PriorityProbs PriorityModel::predict_proba(const PreparedIssue &issue, const ObjectiveProbs &objective) const {
  auto r = row(issue, objective);
  auto p = learn::predict_proba(*estimator_, RowView{r.index, r.value});
  PriorityProbs out{};
  double sum = 0.0;
  for (std::size_t c = 0; c < kPriorityClassCount && c < p.size(); ++c)
    sum += (out[c] = std::clamp(p[c], 0.0, 1.0));
  for (auto &v : out)
    v = sum > 0.0 ? v / sum : 0.5;
  return out;
}

json PriorityModel::manifest() const {
  json m = {{"format", "triage-model"},
            {"format_version", 1},
            {"task", "priority"},
            {"config", config_.to_json()},
            {"classes", priority_class_names()},
            {"class_weights", weights_.w},
            {"preprocessing_checksum", preprocessing_checksum()},
            {"train_fingerprint", train_fingerprint_},
            {"train_size", train_size_},
            {"objective_source", objective_description_},
            {"estimator", learn::estimator_to_json(*estimator_)}};
  json assets = {{"title_tfidf.json", sha256_hex(title_->to_json().dump() + "\n")},
                 {"desc_tfidf.json", sha256_hex(desc_->to_json().dump() + "\n")},
                 {"scaler.json", sha256_hex(scaler_->to_json().dump() + "\n")}};
  if (objective_)
    assets["objective/model.json"] = objective_->fingerprint();
  m["assets"] = assets;
  if (search_)
    m["search"] = search_json(*search_);
  return m;
}

void PriorityModel::save(const std::filesystem::path &dir) const {
  std::filesystem::create_directories(dir);
  write_json(dir / "title_tfidf.json", title_->to_json());
  write_json(dir / "desc_tfidf.json", desc_->to_json());
  write_json(dir / "scaler.json", scaler_->to_json());
  if (objective_)
    objective_->save(dir / "objective");
  write_json(dir / "model.json", manifest());
}

PriorityModel PriorityModel::load(const std::filesystem::path &dir) {
  auto man = read_json_file(dir / "model.json");
  PriorityModel m;
  try {
    check_format(man, "priority");
    m.config_ = config_from(man.at("config"));
    m.weights_.w = man.at("class_weights").get<std::vector<double>>();
    m.train_fingerprint_ = man.at("train_fingerprint").get<std::string>();
    m.train_size_ = man.at("train_size").get<std::size_t>();
    m.objective_description_ = man.at("objective_source");
    m.objective_kind_ = m.objective_description_.at("kind").get<std::string>();
    if (man.contains("search"))
      m.search_ = search_from(man.at("search"));
    m.title_ = features::TfidfModel::from_json(verified_asset(dir, man, "title_tfidf.json"));
    m.desc_ = features::TfidfModel::from_json(verified_asset(dir, man, "desc_tfidf.json"));
    m.scaler_ = features::ScalerParams::from_json(verified_asset(dir, man, "scaler.json"));
    if (man.at("assets").contains("objective/model.json")) {
      m.objective_ = ObjectiveModel::load(dir / "objective");
      if (m.objective_->fingerprint() != man.at("assets").at("objective/model.json").get<std::string>())
        fail(ErrorCode::Checksum, "checksum mismatch for the embedded objective model");
    }
    m.estimator_ = learn::estimator_from_json(man.at("estimator"));
    if (learn::n_features_of(*m.estimator_) != m.layout().total())
      fail(ErrorCode::Checksum, "estimator width does not match the stored vectorizers");
  } catch (const json::exception &e) {
    fail(ErrorCode::Schema, "priority model '" + dir.string() + "': " + e.what());
  }
  return m;
}

std::string PriorityModel::fingerprint() const { return sha256_hex(manifest().dump() + "\n"); }

// --- predictions and evaluation ---------------------------------------------

std::string predictions_csv(std::span<const Prediction> rows, std::span<const std::string> class_names,
                            const std::string &fingerprint) {
  std::string out = "id,predicted";
  for (const auto &c : class_names)
    out += ",p_" + c;
  out += ",model_fingerprint\n";
  for (const auto &r : rows) {
    out += csv_escape(r.id) + "," + r.predicted;
    for (double p : r.probs)
      out += "," + features::format_double(p);
    out += "," + fingerprint + "\n";
  }
  return out;
}

std::optional<EvalMode> parse_eval_mode(std::string_view s) {
  if (s == "cv" || s == "cross-validation")
    return EvalMode::CrossValidation;
  if (s == "project" || s == "project-based")
    return EvalMode::ProjectBased;
  if (s == "cross" || s == "cross-project")
    return EvalMode::CrossProject;
  return std::nullopt;
}

std::string_view to_string(EvalMode m) {
  switch (m) {
  case EvalMode::CrossValidation: return "cv";
  case EvalMode::ProjectBased: return "project-based";
  case EvalMode::CrossProject: return "cross-project";
  }
  return "?";
}

eval::EvalReport rank_baseline_report(std::span<const PreparedIssue> issues, learn::RankField field) {
  std::vector<double> values;
  std::vector<int> truth;
  for (const auto &p : issues) {
    if (!p.priority)
      continue;
    truth.push_back(static_cast<int>(*p.priority));
    switch (field) {
    case learn::RankField::Comments: values.push_back(static_cast<double>(p.comments)); break;
    case learn::RankField::CreatedAt:
      values.push_back(static_cast<double>(p.created_at.time_since_epoch().count()));
      break;
    case learn::RankField::UpdatedAt:
      values.push_back(static_cast<double>(p.updated_at.value_or(p.created_at).time_since_epoch().count()));
      break;
    }
  }
  auto pred = learn::rank_by_median(values, field == learn::RankField::CreatedAt);
  std::vector<int> predicted;
  for (auto c : pred)
    predicted.push_back(static_cast<int>(c));
  auto names = priority_class_names();
  auto r = eval::report(eval::ConfusionMatrix::from_pairs(truth, predicted, kPriorityClassCount), names);
  r.metadata["baseline"] = std::string(learn::to_string(field));
  return r;
}

namespace {

struct Experiment {
  std::vector<const PreparedIssue *> issues;
  std::vector<int> y;
  std::vector<std::string> repos;
  std::vector<std::string> names;
};

Experiment experiment_for(std::span<const PreparedIssue> issues, EvalOptions::Task task) {
  Experiment e;
  e.names = task == EvalOptions::Task::Priority ? priority_class_names() : objective_class_names();
  for (const auto &p : issues) {
    std::optional<int> label;
    if (task == EvalOptions::Task::Priority && p.priority)
      label = static_cast<int>(*p.priority);
    if (task == EvalOptions::Task::Objective && p.objective)
      label = static_cast<int>(*p.objective);
    if (!label)
      continue;
    e.issues.push_back(&p);
    e.y.push_back(*label);
    e.repos.push_back(p.repo);
  }
  if (e.issues.empty())
    fail(ErrorCode::InvalidArgument, "no labelled issues for this task");
  return e;
}

std::vector<PreparedIssue> gather(const Experiment &e, std::span<const std::size_t> idx) {
  std::vector<PreparedIssue> out;
  for (auto i : idx)
    out.push_back(*e.issues[i]);
  return out;
}

} // namespace

EvaluationOutput evaluate(std::span<const PreparedIssue> issues, const ObjectiveSource &source,
                          const TrainConfig &config, const EvalOptions &options) {
  auto e = experiment_for(issues, options.task);
  const bool priority = options.task == EvalOptions::Task::Priority;
  std::shared_ptr<PriorityModel> last_priority;

  auto make_fit = [&](const TrainConfig &cfg) -> eval::FitPredict {
    return [&, cfg](std::span<const std::size_t> train, std::span<const std::size_t> test) {
      std::vector<const PreparedIssue *> tr;
      for (auto i : train)
        tr.push_back(e.issues[i]);
      std::vector<int> pred;
      if (priority) {
        auto m = std::make_shared<PriorityModel>(PriorityModel::train(tr, source, cfg));
        for (auto i : test)
          pred.push_back(static_cast<int>(learn::argmax(m->predict_proba(*e.issues[i], source.probs(*e.issues[i])))));
        last_priority = m;
      } else {
        auto m = ObjectiveModel::train(tr, cfg);
        for (auto i : test)
          pred.push_back(static_cast<int>(learn::argmax(m.predict_proba(*e.issues[i]))));
      }
      return pred;
    };
  };

  EvaluationOutput out;
  json &r = out.report;
  r["task"] = priority ? "priority" : "objective";
  r["mode"] = std::string(to_string(options.mode));
  r["config"] = config.to_json();
  r["seed"] = options.seed;
  r["issues"] = e.issues.size();
  if (priority)
    r["objective_source"] = source.describe();
  std::ostringstream table;
  table << (priority ? "priority" : "objective") << " / " << to_string(options.mode) << " / "
        << learn::to_string(config.kind) << "  (" << e.issues.size() << " issues)\n";

  std::vector<std::size_t> test_part;
  switch (options.mode) {
  case EvalMode::CrossValidation: {
    auto cv = eval::cross_validate(e.y, e.names, options.folds, options.seed, make_fit(config));
    json folds = json::array();
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
      folds.push_back(cv.folds[f].to_json());
      table << "fold " << f << ": accuracy " << features::format_double(cv.folds[f].accuracy) << "\n";
    }
    r["folds"] = folds;
    r["accuracy_mean"] = cv.summary.accuracy_mean;
    r["accuracy_std"] = cv.summary.accuracy_std;
    r["macro_f1_mean"] = cv.summary.macro_f1_mean;
    r["warnings"] = cv.warnings;
    table << "mean accuracy " << features::format_double(cv.summary.accuracy_mean) << " (sd "
          << features::format_double(cv.summary.accuracy_std) << ")\n";
    for (const auto &w : cv.warnings)
      table << "warning: " << w << "\n";
    break;
  }
  case EvalMode::ProjectBased: {
    auto pb = eval::evaluate_project_based(e.repos, e.y, e.names, options.train_ratio, options.seed,
                                           make_fit(config));
    r["result"] = pb.to_json();
    table << pb.to_table();
    out.csv = pb.to_csv();
    break;
  }
  case EvalMode::CrossProject: {
    auto cp = eval::evaluate_cross_project(e.repos, e.y, e.names, options.train_ratio, options.seed,
                                           make_fit(config));
    r["result"] = cp.to_json();
    table << "train repos: " << cp.split.train_repos.size() << "  test repos: "
          << cp.split.test_repos.size() << "\n"
          << cp.report.to_table();
    test_part = cp.split.test;
    break;
  }
  }

  if (priority && options.mode == EvalMode::CrossProject) {
    auto test = gather(e, test_part);
    json baselines = json::object();
    for (auto f : {learn::RankField::Comments, learn::RankField::CreatedAt, learn::RankField::UpdatedAt}) {
      auto b = rank_baseline_report(test, f);
      baselines[std::string(learn::to_string(f))] = b.to_json();
      table << "baseline " << learn::to_string(f) << ": accuracy " << features::format_double(b.accuracy)
            << "\n";
    }
    r["baselines"] = baselines;
    if (last_priority && learn::kind_of(last_priority->estimator()) == learn::ModelKind::Forest) {
      auto names = last_priority->feature_names();
      auto imp = eval::feature_importance(last_priority->estimator(), names);
      r["feature_importance_top"] = json::array();
      for (std::size_t i = 0; i < imp.ranked.size() && i < options.importance_top; ++i)
        r["feature_importance_top"].push_back({{"feature", imp.ranked[i].first}, {"importance", imp.ranked[i].second}});
      // the 28 metadata features on their own, renormalized
      eval::FeatureImportanceReport nf;
      double total = 0.0;
      std::set<std::string> meta(features::metadata_names().begin(), features::metadata_names().end());
      for (const auto &[n, v] : imp.ranked)
        if (meta.count(n)) {
          nf.ranked.emplace_back(n, v);
          total += v;
        }
      if (total > 0.0)
        for (auto &[n, v] : nf.ranked)
          v /= total;
      r["metadata_importance"] = nf.to_json();
      table << "metadata feature importance (top " << options.importance_top << "):\n"
            << nf.to_table(options.importance_top);
    }
  }

  if (priority && options.weight_sweep && !options.weight_sweep->empty()) {
    json sweep = json::array();
    table << "class-weight sweep (High 0.1*i, Low 0.1*(10-i)):\n";
    for (int i : *options.weight_sweep) {
      TrainConfig cfg = config;
      cfg.balancing = Balancing::ClassWeights;
      cfg.weight_override = i;
      double acc;
      if (options.mode == EvalMode::CrossValidation)
        acc = eval::cross_validate(e.y, e.names, options.folds, options.seed, make_fit(cfg)).summary.accuracy_mean;
      else if (options.mode == EvalMode::ProjectBased)
        acc = eval::evaluate_project_based(e.repos, e.y, e.names, options.train_ratio, options.seed, make_fit(cfg))
                  .mean.accuracy_mean;
      else
        acc = eval::evaluate_cross_project(e.repos, e.y, e.names, options.train_ratio, options.seed, make_fit(cfg))
                  .report.accuracy;
      sweep.push_back({{"i", i}, {"accuracy", acc}});
      table << "  i=" << i << "  accuracy " << features::format_double(acc) << "\n";
    }
    r["weight_sweep"] = sweep;
  }
  out.table = table.str();
  return out;
}

// --- prediction and export ------------------------------------------------

TrainConfig TrainConfig::from_json(const json &j) {
  if (!j.is_object())
    fail(ErrorCode::InvalidArgument, "training config must be a JSON object");
  TrainConfig c;
  auto str = [&](const std::string &k) { return j.at(k).get<std::string>(); };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto &k = it.key();
    const auto &v = it.value();
    try {
      if (k == "kind") {
        auto m = learn::parse_model_kind(str(k));
        if (!m)
          fail(ErrorCode::InvalidArgument, "unknown classifier kind '" + str(k) + "'");
        c.kind = *m;
      } else if (k == "balancing") {
        auto b = parse_balancing(str(k));
        if (!b)
          fail(ErrorCode::InvalidArgument, "unknown balancing mode '" + str(k) + "'");
        c.balancing = *b;
      } else if (k == "search_metric") {
        auto m = eval::parse_metric(str(k));
        if (!m)
          fail(ErrorCode::InvalidArgument, "unknown metric '" + str(k) + "'");
        c.search_metric = *m;
      } else if (k == "hyperparams") {
        c.hyperparams = hyperparams_from(v);
      } else if (k == "weight_override") {
        if (!v.is_null()) {
          int i = v.get<int>();
          if (i < 1 || i > 9)
            fail(ErrorCode::InvalidArgument, "weight_override must be in 1..9");
          c.weight_override = i;
        }
      } else if (k == "smote_k") {
        c.smote_k = v.get<std::size_t>();
      } else if (k == "search_budget") {
        c.search_budget = v.get<std::size_t>();
      } else if (k == "search_folds") {
        c.search_folds = v.get<std::size_t>();
      } else if (k == "search_space") {
        learn::SearchSpace sp;
        for (const auto &r : v)
          sp.ranges.push_back({r.at("name").get<std::string>(), r.at("lo").get<double>(), r.at("hi").get<double>(),
                               r.value("integer", false), r.value("log_scale", false)});
        sp.validate();
        c.search_space = sp;
      } else if (k == "title_max_features") {
        c.title_max_features = v.get<std::size_t>();
      } else if (k == "desc_max_features") {
        c.desc_max_features = v.get<std::size_t>();
      } else if (k == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else {
        fail(ErrorCode::InvalidArgument, "unknown training option '" + k + "'");
      }
    } catch (const json::exception &e) {
      fail(ErrorCode::InvalidArgument, "training option '" + k + "': " + e.what());
    }
  }
  if (c.search_folds < 2 && c.search_budget > 0)
    fail(ErrorCode::InvalidArgument, "search_folds must be at least 2");
  return c;
}

std::vector<Prediction> predict_objective(const ObjectiveModel &m, std::span<const PreparedIssue> issues) {
  std::vector<Prediction> out;
  auto names = objective_class_names();
  for (const auto &issue : issues) {
    auto p = m.predict_proba(issue);
    auto c = learn::argmax(p);
    out.push_back({issue.id, names[c], std::vector<double>(p.begin(), p.end())});
  }
  return out;
}

namespace {

ObjectiveSource source_for(const PriorityModel &m, const ObjectiveSource *source) {
  if (source)
    return *source;
  if (const auto *obj = m.embedded_objective())
    return ObjectiveSource::model(*obj);
  if (m.objective_kind() == "keyword")
    return ObjectiveSource::keyword();
  fail(ErrorCode::InvalidArgument,
       "the model was trained on imported objective probabilities; supply them again for prediction");
}

} // namespace

std::vector<Prediction> predict_priority(const PriorityModel &m, std::span<const PreparedIssue> issues,
                                         const ObjectiveSource *source) {
  auto src = source_for(m, source);
  std::vector<Prediction> out;
  auto names = priority_class_names();
  for (const auto &issue : issues) {
    auto p = m.predict_proba(issue, src.probs(issue));
    auto c = learn::argmax(p);
    out.push_back({issue.id, names[c], std::vector<double>(p.begin(), p.end())});
  }
  return out;
}

std::string feature_table_csv(std::span<const PreparedIssue> issues, const ObjectiveSource &source,
                              const PriorityModel *model, const TrainConfig &config) {
  std::vector<std::string> ids;
  std::vector<features::FeatureVector> rows;
  if (issues.empty())
    return features::feature_matrix_csv(ids, rows);
  std::optional<features::TfidfModel> title, desc;
  std::optional<features::ScalerParams> scaler;
  if (model) {
    title = model->title_model();
    desc = model->desc_model();
    scaler = model->scaler();
  } else {
    auto ptrs = pointers(issues);
    auto [t, d] = fit_text(ptrs, config);
    title = std::move(t);
    desc = std::move(d);
    std::vector<features::MetadataFeatures> raw;
    for (const auto &i : issues)
      raw.push_back(i.metadata);
    scaler = features::ScalerParams::fit(raw);
  }
  for (const auto &i : issues) {
    auto probs = source.probs(i);
    ids.push_back(i.id);
    rows.push_back(features::assemble(i.title, i.description, i.labels, i.metadata, *title, *desc, *scaler, probs));
  }
  return features::feature_matrix_csv(ids, rows);
}

} // namespace triage::pipeline
