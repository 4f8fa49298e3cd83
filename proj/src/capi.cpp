#include "triage/triage.h"

#include "triage/agreement.hpp"
#include "triage/common.hpp"
#include "triage/corpus.hpp"
#include "triage/ingest.hpp"
#include "triage/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <cstring>
#include <mutex>
#include <new>
#include <optional>

using nlohmann::json;
using namespace triage;

struct triage_corpus {
  Corpus corpus;
  mutable std::once_flag once;
  mutable std::vector<pipeline::PreparedIssue> prepared;

  const std::vector<pipeline::PreparedIssue> &issues() const {
    std::call_once(once, [&] { prepared = pipeline::prepare(corpus); });
    return prepared;
  }
};

struct triage_objective_model {
  pipeline::ObjectiveModel model;
};

struct triage_objective_source {
  pipeline::ObjectiveSource source;
};

struct triage_priority_model {
  pipeline::PriorityModel model;
};

namespace {

thread_local std::string g_last_error;

triage_status status_of(ErrorCode c) { return static_cast<triage_status>(static_cast<int>(c)); }

template <class Fn> triage_status guarded(Fn &&fn) {
  try {
    fn();
    g_last_error.clear();
    return TRIAGE_OK;
  } catch (const Error &e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception &e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return TRIAGE_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return TRIAGE_ERR_RUNTIME;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return TRIAGE_ERR_RUNTIME;
  }
}

void require(const void *p, const char *what) {
  if (!p)
    fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char *dup(const std::string &s) {
  auto *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out)
    throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void give(char **out, const std::string &s) {
  if (out)
    *out = dup(s);
}

json options(const char *text) {
  if (!text || !*text)
    return json::object();
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    fail(ErrorCode::InvalidArgument, "options must be a JSON object");
  return j;
}

void reject_unknown(const json &j, std::initializer_list<const char *> known, const char *what) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::none_of(known.begin(), known.end(), [&](const char *k) { return it.key() == k; }))
      fail(ErrorCode::InvalidArgument, std::string("unknown ") + what + " option '" + it.key() + "'");
}

FilterConfig filter_config(const json &j) {
  reject_unknown(j, {"min_text_length", "non_english_threshold", "excluded_clusters"}, "filter");
  FilterConfig f;
  f.min_text_length = j.value("min_text_length", f.min_text_length);
  f.non_english_threshold = j.value("non_english_threshold", f.non_english_threshold);
  if (j.contains("excluded_clusters"))
    f.excluded_clusters = j.at("excluded_clusters").get<std::vector<std::string>>();
  if (f.non_english_threshold < 0.0 || f.non_english_threshold > 1.0)
    fail(ErrorCode::InvalidArgument, "non_english_threshold must be in [0,1]");
  return f;
}

pipeline::EvalOptions eval_options(const json &j) {
  reject_unknown(j, {"task", "mode", "folds", "train_ratio", "seed", "weight_sweep", "importance_top"},
                 "evaluation");
  pipeline::EvalOptions o;
  auto task = j.value("task", std::string("priority"));
  if (task == "priority")
    o.task = pipeline::EvalOptions::Task::Priority;
  else if (task == "objective")
    o.task = pipeline::EvalOptions::Task::Objective;
  else
    fail(ErrorCode::InvalidArgument, "task must be priority or objective");
  if (j.contains("mode")) {
    auto m = pipeline::parse_eval_mode(j.at("mode").get<std::string>());
    if (!m)
      fail(ErrorCode::InvalidArgument, "unknown evaluation mode '" + j.at("mode").get<std::string>() + "'");
    o.mode = *m;
  }
  o.folds = j.value("folds", o.folds);
  o.train_ratio = j.value("train_ratio", o.train_ratio);
  o.seed = j.value("seed", o.seed);
  o.importance_top = j.value("importance_top", o.importance_top);
  if (j.contains("weight_sweep") && !j.at("weight_sweep").is_null()) {
    auto v = j.at("weight_sweep").get<std::vector<int>>();
    for (int i : v)
      if (i < 1 || i > 9)
        fail(ErrorCode::InvalidArgument, "weight sweep indices must be in 1..9");
    o.weight_sweep = v;
  }
  if (o.folds < 2)
    fail(ErrorCode::InvalidArgument, "folds must be at least 2");
  if (!(o.train_ratio > 0.0 && o.train_ratio < 1.0))
    fail(ErrorCode::InvalidArgument, "train_ratio must be in (0,1)");
  return o;
}

} // namespace

extern "C" {

const char *triage_version(void) { return "1.0.0"; }

const char *triage_last_error(void) { return g_last_error.c_str(); }

const char *triage_status_name(triage_status status) {
  if (status == TRIAGE_OK)
    return "ok";
  if (status < TRIAGE_ERR_INVALID_ARGUMENT || status > TRIAGE_ERR_RUNTIME)
    return "unknown";
  return to_string(static_cast<ErrorCode>(status)).data();
}

void triage_string_free(char *s) { std::free(s); }

triage_status triage_file_sha256(const char *path, char **out_hex) {
  return guarded([&] {
    require(path, "path");
    give(out_hex, sha256_file(path));
  });
}

triage_status triage_preprocessing_checksum(char **out_hex) {
  return guarded([&] { give(out_hex, pipeline::preprocessing_checksum()); });
}

triage_status triage_corpus_load(const char *path, int strict, triage_corpus **out, char **out_errors_json) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto r = load_corpus(path, strict != 0);
    json errors = json::array();
    for (const auto &e : r.errors)
      errors.push_back({{"line", e.line}, {"message", e.message}});
    auto *c = new triage_corpus;
    c->corpus = std::move(r.corpus);
    *out = c;
    give(out_errors_json, errors.dump());
  });
}

triage_status triage_corpus_save(const triage_corpus *corpus, const char *path) {
  return guarded([&] {
    require(corpus, "corpus");
    require(path, "path");
    save_corpus(corpus->corpus, path);
  });
}

size_t triage_corpus_size(const triage_corpus *corpus) { return corpus ? corpus->corpus.issues.size() : 0; }

void triage_corpus_free(triage_corpus *corpus) { delete corpus; }

triage_status triage_corpus_filter(const triage_corpus *corpus, const char *rules_json, triage_corpus **out,
                                   char **out_report_json) {
  return guarded([&] {
    require(corpus, "corpus");
    require(out, "out");
    auto [kept, rep] = filter_corpus(corpus->corpus, filter_config(options(rules_json)));
    json j = {{"input", rep.input},
              {"kept", rep.kept},
              {"removed", rep.removed()},
              {"short_text", rep.short_text},
              {"excluded_label", rep.excluded_label},
              {"non_english", rep.non_english},
              {"excluded_by_cluster", rep.excluded_by_cluster}};
    auto *c = new triage_corpus;
    c->corpus = std::move(kept);
    *out = c;
    give(out_report_json, j.dump());
  });
}

triage_status triage_fetch(const char *client_json, const char *query_json, triage_corpus **out,
                           char **out_report_json) {
  return guarded([&] {
    require(out, "out");
    auto cj = options(client_json);
    reject_unknown(cj,
                   {"base_url", "auth_token_env", "max_parallel_requests", "cache_dir", "retry_attempts",
                    "backoff_base_seconds", "refresh", "per_page"},
                   "client");
    ingest::ClientConfig cfg;
    cfg.base_url = cj.value("base_url", cfg.base_url);
    cfg.auth_token_env = cj.value("auth_token_env", cfg.auth_token_env);
    cfg.max_parallel_requests = cj.value("max_parallel_requests", cfg.max_parallel_requests);
    cfg.cache_dir = cj.value("cache_dir", cfg.cache_dir.string());
    cfg.retry.max_attempts = cj.value("retry_attempts", cfg.retry.max_attempts);
    cfg.retry.backoff_base_seconds = cj.value("backoff_base_seconds", cfg.retry.backoff_base_seconds);
    cfg.refresh = cj.value("refresh", cfg.refresh);
    cfg.per_page = cj.value("per_page", cfg.per_page);

    auto qj = options(query_json);
    reject_unknown(qj, {"repos", "state", "created_before", "include_pull_requests", "hydrate"}, "query");
    auto repos = qj.value("repos", std::vector<std::string>{});
    if (repos.empty())
      fail(ErrorCode::InvalidArgument, "fetch needs at least one repository");
    ingest::FetchQuery q;
    if (qj.contains("state")) {
      auto s = ingest::parse_state_filter(qj.at("state").get<std::string>());
      if (!s)
        fail(ErrorCode::InvalidArgument, "state must be open, closed or all");
      q.state = *s;
    }
    if (qj.contains("created_before") && !qj.at("created_before").is_null())
      q.created_before = parse_timestamp(qj.at("created_before").get<std::string>());
    q.include_pull_requests = qj.value("include_pull_requests", q.include_pull_requests);
    bool do_hydrate = qj.value("hydrate", true);

    ingest::Client client(cfg, ingest::make_http_transport());
    std::vector<IssueRecord> all;
    json per_repo = json::object();
    for (const auto &r : repos) {
      q.repo = r;
      auto issues = client.fetch_issues(q);
      per_repo[r] = issues.size();
      for (auto &i : issues)
        all.push_back(std::move(i));
    }
    json failures = json::array();
    auto *c = new triage_corpus;
    if (do_hydrate) {
      auto h = client.hydrate(std::move(all));
      for (const auto &f : h.failures)
        failures.push_back({{"issue", f.issue_id}, {"resource", f.resource}, {"message", f.message}});
      c->corpus = std::move(h.corpus);
    } else {
      c->corpus.issues = std::move(all);
      c->corpus.provenance.source = cfg.base_url;
    }
    json rep = {{"repos", per_repo},
                {"issues", c->corpus.issues.size()},
                {"network_requests", client.network_requests()},
                {"cache_hits", client.cache_hits()},
                {"hydration_failures", failures}};
    *out = c;
    give(out_report_json, rep.dump());
  });
}

triage_status triage_objective_train(const triage_corpus *corpus, const char *config_json,
                                     triage_objective_model **out) {
  return guarded([&] {
    require(corpus, "corpus");
    require(out, "out");
    auto cfg = pipeline::TrainConfig::from_json(options(config_json));
    const auto &issues = corpus->issues();
    *out = new triage_objective_model{pipeline::ObjectiveModel::train(std::span(issues), cfg)};
  });
}

triage_status triage_objective_load(const char *dir, triage_objective_model **out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new triage_objective_model{pipeline::ObjectiveModel::load(dir)};
  });
}

triage_status triage_objective_save(const triage_objective_model *model, const char *dir) {
  return guarded([&] {
    require(model, "model");
    require(dir, "dir");
    model->model.save(dir);
  });
}

triage_status triage_objective_fingerprint(const triage_objective_model *model, char **out_hex) {
  return guarded([&] {
    require(model, "model");
    give(out_hex, model->model.fingerprint());
  });
}

triage_status triage_objective_predict(const triage_objective_model *model, const triage_corpus *corpus,
                                       char **out_csv) {
  return guarded([&] {
    require(model, "model");
    require(corpus, "corpus");
    auto rows = pipeline::predict_objective(model->model, corpus->issues());
    auto names = pipeline::objective_class_names();
    give(out_csv, pipeline::predictions_csv(rows, names, model->model.fingerprint()));
  });
}

void triage_objective_free(triage_objective_model *model) { delete model; }

triage_status triage_source_keyword(triage_objective_source **out) {
  return guarded([&] {
    require(out, "out");
    *out = new triage_objective_source{pipeline::ObjectiveSource::keyword()};
  });
}

triage_status triage_source_model(const triage_objective_model *model, triage_objective_source **out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = new triage_objective_source{pipeline::ObjectiveSource::model(model->model)};
  });
}

triage_status triage_source_imported(const char *csv_path, triage_objective_source **out) {
  return guarded([&] {
    require(csv_path, "csv_path");
    require(out, "out");
    *out = new triage_objective_source{pipeline::ObjectiveSource::imported(std::filesystem::path(csv_path))};
  });
}

void triage_source_free(triage_objective_source *source) { delete source; }

triage_status triage_priority_train(const triage_corpus *corpus, const triage_objective_source *source,
                                    const char *config_json, triage_priority_model **out) {
  return guarded([&] {
    require(corpus, "corpus");
    require(source, "source");
    require(out, "out");
    auto cfg = pipeline::TrainConfig::from_json(options(config_json));
    const auto &issues = corpus->issues();
    *out = new triage_priority_model{pipeline::PriorityModel::train(std::span(issues), source->source, cfg)};
  });
}

triage_status triage_priority_load(const char *dir, triage_priority_model **out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new triage_priority_model{pipeline::PriorityModel::load(dir)};
  });
}

triage_status triage_priority_save(const triage_priority_model *model, const char *dir) {
  return guarded([&] {
    require(model, "model");
    require(dir, "dir");
    model->model.save(dir);
  });
}

triage_status triage_priority_fingerprint(const triage_priority_model *model, char **out_hex) {
  return guarded([&] {
    require(model, "model");
    give(out_hex, model->model.fingerprint());
  });
}

triage_status triage_priority_predict(const triage_priority_model *model, const triage_corpus *corpus,
                                      const triage_objective_source *source, char **out_csv) {
  return guarded([&] {
    require(model, "model");
    require(corpus, "corpus");
    auto rows = pipeline::predict_priority(model->model, corpus->issues(), source ? &source->source : nullptr);
    auto names = pipeline::priority_class_names();
    give(out_csv, pipeline::predictions_csv(rows, names, model->model.fingerprint()));
  });
}

void triage_priority_free(triage_priority_model *model) { delete model; }

triage_status triage_features_csv(const triage_corpus *corpus, const triage_objective_source *source,
                                  const triage_priority_model *model, const char *config_json, char **out_csv) {
  return guarded([&] {
    require(corpus, "corpus");
    require(source, "source");
    auto cfg = pipeline::TrainConfig::from_json(options(config_json));
    give(out_csv, pipeline::feature_table_csv(corpus->issues(), source->source, model ? &model->model : nullptr, cfg));
  });
}

triage_status triage_evaluate(const triage_corpus *corpus, const triage_objective_source *source,
                              const char *config_json, const char *options_json, char **out_report_json,
                              char **out_table, char **out_csv) {
  return guarded([&] {
    require(corpus, "corpus");
    require(source, "source");
    auto cfg = pipeline::TrainConfig::from_json(options(config_json));
    auto opts = eval_options(options(options_json));
    auto r = pipeline::evaluate(corpus->issues(), source->source, cfg, opts);
    give(out_report_json, r.report.dump(2) + "\n");
    give(out_table, r.table);
    give(out_csv, r.csv);
  });
}

triage_status triage_agreement(const char *ratings_csv, int majority, char **out_report_json, char **out_table) {
  return guarded([&] {
    require(ratings_csv, "ratings_csv");
    auto m = agreement::parse_ratings_csv(ratings_csv);
    auto mode = majority ? agreement::ItemAgreement::Majority : agreement::ItemAgreement::Pairwise;
    auto r = agreement::analyze_all(m, mode);
    give(out_report_json, r.to_json(m).dump(2) + "\n");
    give(out_table, r.to_table());
  });
}

} // extern "C"
