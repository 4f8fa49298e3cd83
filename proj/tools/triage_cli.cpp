// triage: command-line front end over the libtriage C API.

#include <triage/triage.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
  ApiError(triage_status s, const std::string &what) : std::runtime_error(what), status(s) {}
  triage_status status;
};

void check(triage_status s) {
  if (s != TRIAGE_OK)
    throw ApiError(s, triage_last_error());
}

struct StrDeleter {
  void operator()(char *p) const { triage_string_free(p); }
};
using CStr = std::unique_ptr<char, StrDeleter>;

std::string take(char *p) {
  CStr owner(p);
  return p ? std::string(p) : std::string();
}

template <class T, void (*Free)(T *)> struct HandleDeleter {
  void operator()(T *p) const { Free(p); }
};
using Corpus = std::unique_ptr<triage_corpus, HandleDeleter<triage_corpus, triage_corpus_free>>;
using ObjModel = std::unique_ptr<triage_objective_model, HandleDeleter<triage_objective_model, triage_objective_free>>;
using Source = std::unique_ptr<triage_objective_source, HandleDeleter<triage_objective_source, triage_source_free>>;
using PrioModel = std::unique_ptr<triage_priority_model, HandleDeleter<triage_priority_model, triage_priority_free>>;

std::string sha_of(const fs::path &p) {
  char *out = nullptr;
  check(triage_file_sha256(p.string().c_str(), &out));
  return take(out);
}

void write_text(const fs::path &p, const std::string &text) {
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f)
      throw ApiError(TRIAGE_ERR_IO, "cannot write '" + p.string() + "'");
    f << text;
    if (!f)
      throw ApiError(TRIAGE_ERR_IO, "cannot write '" + p.string() + "'");
  }
  fs::rename(tmp, p);
}

std::string read_text(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  if (!f)
    throw ApiError(TRIAGE_ERR_IO, "cannot read '" + p.string() + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void need_file(const std::string &p, const char *what) {
  if (p.empty())
    throw UsageError(std::string(what) + " is required");
  if (!fs::exists(p))
    throw UsageError(std::string(what) + " '" + p + "' does not exist");
}

// Reproducibility record written next to every command's outputs.
struct Manifest {
  json inputs = json::object();
  json outputs = json::object();
  json details = json::object();
  fs::path path;

  void input(const fs::path &p) {
    if (fs::is_directory(p)) {
      for (const auto &e : fs::directory_iterator(p))
        if (e.is_regular_file())
          inputs[(p / e.path().filename()).string()] = sha_of(e.path());
    } else if (fs::exists(p)) {
      inputs[p.string()] = sha_of(p);
    }
  }
  void output(const fs::path &p) {
    if (fs::is_directory(p)) {
      for (const auto &e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().filename() != "manifest.json")
          outputs[(p / e.path().filename()).string()] = sha_of(e.path());
    } else if (fs::exists(p)) {
      outputs[p.string()] = sha_of(p);
    }
  }
};

struct Globals {
  std::uint64_t seed = 42;
  bool strict = false;
  bool refresh = false;
  bool emit_csv = false;
  std::string manifest;
};

struct TrainFlags {
  std::string classifier = "forest";
  std::string balancing = "class_weights";
  int weight_override = 0;
  std::size_t smote_k = 5;
  std::size_t search_budget = 0;
  std::size_t search_folds = 3;
  std::string search_metric = "accuracy";
  std::vector<std::string> params;
  std::size_t title_features = 10000;
  std::size_t desc_features = 20000;

  void add(CLI::App *cmd) {
    cmd->add_option("--classifier", classifier, "forest, logreg, nb, knn or keyword")->capture_default_str();
    cmd->add_option("--balancing", balancing, "none, class_weights or smote")->capture_default_str();
    cmd->add_option("--weight-override", weight_override, "priority class weights High=0.1i, Low=0.1(10-i)")
        ->check(CLI::Range(0, 9));
    cmd->add_option("--smote-k", smote_k)->capture_default_str();
    cmd->add_option("--search-budget", search_budget, "random search trials (0 = off)")->capture_default_str();
    cmd->add_option("--search-folds", search_folds)->capture_default_str();
    cmd->add_option("--search-metric", search_metric, "accuracy or macro_f1")->capture_default_str();
    cmd->add_option("--param", params, "hyperparameter name=value (repeatable)");
    cmd->add_option("--title-features", title_features)->capture_default_str();
    cmd->add_option("--desc-features", desc_features)->capture_default_str();
  }

  json to_json(std::uint64_t seed) const {
    json hp = json::object();
    for (const auto &p : params) {
      auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0)
        throw UsageError("--param expects name=value, got '" + p + "'");
      try {
        std::size_t used = 0;
        auto v = std::stod(p.substr(eq + 1), &used);
        if (used != p.size() - eq - 1)
          throw std::invalid_argument(p);
        hp[p.substr(0, eq)] = v;
      } catch (const std::exception &) {
        throw UsageError("--param value is not a number: '" + p + "'");
      }
    }
    json j = {{"kind", classifier},
              {"balancing", balancing},
              {"smote_k", smote_k},
              {"search_budget", search_budget},
              {"search_folds", search_folds},
              {"search_metric", search_metric},
              {"hyperparams", hp},
              {"title_max_features", title_features},
              {"desc_max_features", desc_features},
              {"seed", seed}};
    j["weight_override"] = weight_override > 0 ? json(weight_override) : json(nullptr);
    return j;
  }
};

struct SourceFlags {
  std::string objective_probs;
  std::string objective_model;

  void add(CLI::App *cmd) {
    auto *a = cmd->add_option("--objective-probs", objective_probs, "CSV id,Bug,Enhancement,SupportDoc");
    auto *b = cmd->add_option("--objective-model", objective_model, "trained objective model directory");
    a->excludes(b);
  }

  bool given() const { return !objective_probs.empty() || !objective_model.empty(); }

  Source open(Manifest &man, json &desc) const {
    triage_objective_source *s = nullptr;
    if (!objective_probs.empty()) {
      need_file(objective_probs, "--objective-probs");
      man.input(objective_probs);
      check(triage_source_imported(objective_probs.c_str(), &s));
      desc = {{"kind", "imported"}, {"file", objective_probs}};
    } else if (!objective_model.empty()) {
      need_file(objective_model, "--objective-model");
      man.input(objective_model);
      triage_objective_model *m = nullptr;
      check(triage_objective_load(objective_model.c_str(), &m));
      ObjModel owner(m);
      check(triage_source_model(m, &s));
      desc = {{"kind", "model"}, {"dir", objective_model}};
    } else {
      check(triage_source_keyword(&s));
      desc = {{"kind", "keyword"}};
    }
    return Source(s);
  }
};

Corpus load(const std::string &path, const Globals &g, Manifest &man) {
  need_file(path, "--corpus");
  man.input(path);
  triage_corpus *c = nullptr;
  char *errors = nullptr;
  check(triage_corpus_load(path.c_str(), g.strict ? 1 : 0, &c, &errors));
  auto e = json::parse(take(errors));
  if (!e.empty()) {
    std::cerr << "warning: skipped " << e.size() << " malformed line(s) in " << path << "\n";
    man.details["skipped_lines"] = e;
  }
  return Corpus(c);
}

std::string model_task(const std::string &dir) {
  need_file(dir, "--model");
  auto p = fs::path(dir) / "model.json";
  if (!fs::exists(p))
    throw UsageError("'" + dir + "' holds no model.json");
  auto j = json::parse(read_text(p), nullptr, false);
  if (j.is_discarded() || !j.contains("task"))
    throw ApiError(TRIAGE_ERR_SCHEMA, "'" + p.string() + "' is not a model manifest");
  return j.at("task").get<std::string>();
}

fs::path sibling(const fs::path &p, const std::string &suffix) {
  auto out = p;
  out += suffix;
  return out;
}

int exit_code_for(triage_status s) {
  switch (s) {
  case TRIAGE_ERR_INVALID_ARGUMENT:
  case TRIAGE_ERR_PARSE:
  case TRIAGE_ERR_SCHEMA:
    return 1;
  default:
    return 2;
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Issue objective and priority classification"};
  app.set_config("--config", "", "key-value config file (flags override it)");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "master random seed")->capture_default_str();
  app.add_flag("--strict", g.strict, "treat malformed corpus lines as errors");
  app.add_flag("--refresh", g.refresh, "bypass the HTTP response cache");
  app.add_flag("--emit-csv", g.emit_csv, "also write CSV versions of reports");
  app.add_option("--manifest", g.manifest, "where to write the run manifest");

  // fetch
  auto *fetch = app.add_subcommand("fetch", "download issues into a corpus file");
  std::vector<std::string> repos;
  std::string fetch_out, state = "closed", created_before, base_url = "https://api.github.com",
                         token_env = "GITHUB_TOKEN", cache_dir = ".triage-cache";
  std::size_t max_parallel = 4;
  int retries = 3, per_page = 100;
  double backoff = 1.0;
  bool no_prs = false, no_hydrate = false;
  fetch->add_option("--repo", repos, "owner/name (repeatable)")->required();
  fetch->add_option("--out", fetch_out, "corpus file to write")->required();
  fetch->add_option("--state", state, "open, closed or all")->capture_default_str();
  fetch->add_option("--created-before", created_before, "YYYY-MM-DDTHH:MM:SSZ");
  fetch->add_option("--base-url", base_url)->capture_default_str();
  fetch->add_option("--token-env", token_env, "environment variable holding the token")->capture_default_str();
  fetch->add_option("--max-parallel", max_parallel)->capture_default_str()->check(CLI::PositiveNumber);
  fetch->add_option("--cache-dir", cache_dir)->capture_default_str();
  fetch->add_option("--retries", retries)->capture_default_str()->check(CLI::NonNegativeNumber);
  fetch->add_option("--backoff", backoff, "retry backoff base in seconds")->capture_default_str();
  fetch->add_option("--per-page", per_page)->capture_default_str()->check(CLI::Range(1, 100));
  fetch->add_flag("--no-pull-requests", no_prs);
  fetch->add_flag("--no-hydrate", no_hydrate, "skip comments, events and user profiles");

  // preprocess
  auto *prep = app.add_subcommand("preprocess", "filter a corpus");
  std::string prep_in, prep_out;
  std::size_t min_length = 3;
  double non_english = 0.5;
  std::vector<std::string> exclude = {"duplicate", "invalid"};
  prep->add_option("--corpus", prep_in)->required();
  prep->add_option("--out", prep_out)->required();
  prep->add_option("--min-length", min_length, "minimum title and description length")->capture_default_str();
  prep->add_option("--non-english-threshold", non_english)->capture_default_str();
  prep->add_option("--exclude-cluster", exclude, "label clusters to drop")->capture_default_str();

  // features
  auto *feat = app.add_subcommand("features", "export the stage-2 feature matrix");
  std::string feat_in, feat_out, feat_model;
  SourceFlags feat_src;
  TrainFlags feat_train;
  feat->add_option("--corpus", feat_in)->required();
  feat->add_option("--out", feat_out)->required();
  feat->add_option("--model", feat_model, "priority model whose vectorizers to reuse");
  feat->add_option("--title-features", feat_train.title_features)->capture_default_str();
  feat->add_option("--desc-features", feat_train.desc_features)->capture_default_str();
  feat_src.add(feat);

  // train-objective
  auto *tobj = app.add_subcommand("train-objective", "train the stage-1 objective classifier");
  std::string tobj_in, tobj_out;
  TrainFlags tobj_train;
  tobj_train.classifier = "nb";
  tobj->add_option("--corpus", tobj_in)->required();
  tobj->add_option("--out", tobj_out, "model directory")->required();
  tobj_train.add(tobj);

  // train-priority
  auto *tpri = app.add_subcommand("train-priority", "train the stage-2 priority classifier");
  std::string tpri_in, tpri_out;
  TrainFlags tpri_train;
  SourceFlags tpri_src;
  tpri->add_option("--corpus", tpri_in)->required();
  tpri->add_option("--out", tpri_out, "model directory")->required();
  tpri_train.add(tpri);
  tpri_src.add(tpri);

  // predict
  auto *pred = app.add_subcommand("predict", "write predictions for a corpus");
  std::string pred_in, pred_out, pred_model;
  SourceFlags pred_src;
  pred->add_option("--corpus", pred_in)->required();
  pred->add_option("--model", pred_model)->required();
  pred->add_option("--out", pred_out)->required();
  pred_src.add(pred);

  // evaluate
  auto *ev = app.add_subcommand("evaluate", "run an evaluation experiment");
  std::string ev_in, ev_out, ev_task = "priority", ev_mode = "cross-project";
  std::size_t ev_folds = 5, ev_top = 10;
  double ev_ratio = 0.8;
  std::vector<int> ev_sweep;
  TrainFlags ev_train;
  SourceFlags ev_src;
  ev->add_option("--corpus", ev_in)->required();
  ev->add_option("--out", ev_out, "report JSON")->required();
  ev->add_option("--task", ev_task, "priority or objective")->capture_default_str();
  ev->add_option("--mode", ev_mode, "cv, project-based or cross-project")->capture_default_str();
  ev->add_option("--folds", ev_folds)->capture_default_str();
  ev->add_option("--train-ratio", ev_ratio)->capture_default_str();
  ev->add_option("--weight-sweep", ev_sweep, "class weight override indices to compare");
  ev->add_option("--importance-top", ev_top)->capture_default_str();
  ev_train.add(ev);
  ev_src.add(ev);

  // agreement
  auto *agr = app.add_subcommand("agreement", "inter-rater agreement for priority ratings");
  std::string agr_in, agr_out;
  bool agr_majority = false;
  agr->add_option("--ratings", agr_in, "CSV with one column per rater")->required();
  agr->add_option("--out", agr_out, "report JSON");
  agr->add_flag("--majority", agr_majority, "per-item agreement as majority fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto *cmd = app.get_subcommands().front();
  Manifest man;
  json run = {{"tool", "triage"}, {"version", triage_version()}, {"command", cmd->get_name()}, {"seed", g.seed}};
  std::vector<std::string> args(argv + 1, argv + argc);
  run["argv"] = args;
  run["config_snapshot"] = app.config_to_str(true, false);
  {
    char *pc = nullptr;
    if (triage_preprocessing_checksum(&pc) == TRIAGE_OK)
      run["preprocessing_checksum"] = take(pc);
  }

  int code = 0;
  auto default_manifest = [&](const fs::path &out, bool dir) {
    if (!g.manifest.empty())
      man.path = g.manifest;
    else
      man.path = dir ? out / "manifest.json" : sibling(out, ".manifest.json");
  };

  try {
    if (cmd == fetch) {
      default_manifest(fetch_out, false);
      json client = {{"base_url", base_url},   {"auth_token_env", token_env}, {"max_parallel_requests", max_parallel},
                     {"cache_dir", cache_dir}, {"retry_attempts", retries},   {"backoff_base_seconds", backoff},
                     {"refresh", g.refresh},   {"per_page", per_page}};
      json query = {{"repos", repos}, {"state", state}, {"include_pull_requests", !no_prs}, {"hydrate", !no_hydrate}};
      if (!created_before.empty())
        query["created_before"] = created_before;
      run["options"] = {{"client", client}, {"query", query}};
      triage_corpus *c = nullptr;
      char *rep = nullptr;
      check(triage_fetch(client.dump().c_str(), query.dump().c_str(), &c, &rep));
      Corpus owner(c);
      auto report = json::parse(take(rep));
      check(triage_corpus_save(c, fetch_out.c_str()));
      man.details["fetch"] = report;
      man.output(fetch_out);
      std::cout << "fetched " << report["issues"] << " issues (" << report["network_requests"] << " requests, "
                << report["cache_hits"] << " cached, " << report["hydration_failures"].size()
                << " hydration failures)\n";
    } else if (cmd == prep) {
      default_manifest(prep_out, false);
      auto c = load(prep_in, g, man);
      json rules = {{"min_text_length", min_length},
                    {"non_english_threshold", non_english},
                    {"excluded_clusters", exclude}};
      run["options"] = rules;
      triage_corpus *kept = nullptr;
      char *rep = nullptr;
      check(triage_corpus_filter(c.get(), rules.dump().c_str(), &kept, &rep));
      Corpus owner(kept);
      auto report = json::parse(take(rep));
      check(triage_corpus_save(kept, prep_out.c_str()));
      auto report_path = sibling(prep_out, ".report.json");
      write_text(report_path, report.dump(2) + "\n");
      man.details["filter"] = report;
      man.output(prep_out);
      man.output(report_path);
      if (g.emit_csv) {
        auto csv_path = sibling(prep_out, ".report.csv");
        std::string csv = "rule,count\n";
        for (const char *k : {"input", "kept", "short_text", "excluded_label", "non_english"})
          csv += std::string(k) + "," + report[k].dump() + "\n";
        for (auto it = report["excluded_by_cluster"].begin(); it != report["excluded_by_cluster"].end(); ++it)
          csv += "cluster:" + it.key() + "," + it.value().dump() + "\n";
        write_text(csv_path, csv);
        man.output(csv_path);
      }
      std::cout << "kept " << report["kept"] << " of " << report["input"] << " issues\n";
    } else if (cmd == feat) {
      default_manifest(feat_out, false);
      auto c = load(feat_in, g, man);
      json sdesc;
      auto src = feat_src.open(man, sdesc);
      PrioModel model;
      if (!feat_model.empty()) {
        need_file(feat_model, "--model");
        man.input(feat_model);
        triage_priority_model *m = nullptr;
        check(triage_priority_load(feat_model.c_str(), &m));
        model.reset(m);
      }
      json cfg = {{"title_max_features", feat_train.title_features},
                  {"desc_max_features", feat_train.desc_features},
                  {"seed", g.seed}};
      run["options"] = {{"config", cfg}, {"objective_source", sdesc}, {"model", feat_model}};
      char *csv = nullptr;
      check(triage_features_csv(c.get(), src.get(), model.get(), cfg.dump().c_str(), &csv));
      write_text(feat_out, take(csv));
      man.output(feat_out);
    } else if (cmd == tobj) {
      default_manifest(tobj_out, true);
      auto c = load(tobj_in, g, man);
      auto cfg = tobj_train.to_json(g.seed);
      run["options"] = cfg;
      triage_objective_model *m = nullptr;
      check(triage_objective_train(c.get(), cfg.dump().c_str(), &m));
      ObjModel owner(m);
      check(triage_objective_save(m, tobj_out.c_str()));
      char *fp = nullptr;
      check(triage_objective_fingerprint(m, &fp));
      man.details["fingerprint"] = take(fp);
      man.output(tobj_out);
      std::cout << "objective model written to " << tobj_out << "\n";
    } else if (cmd == tpri) {
      default_manifest(tpri_out, true);
      auto c = load(tpri_in, g, man);
      json sdesc;
      auto src = tpri_src.open(man, sdesc);
      auto cfg = tpri_train.to_json(g.seed);
      run["options"] = {{"config", cfg}, {"objective_source", sdesc}};
      triage_priority_model *m = nullptr;
      check(triage_priority_train(c.get(), src.get(), cfg.dump().c_str(), &m));
      PrioModel owner(m);
      check(triage_priority_save(m, tpri_out.c_str()));
      char *fp = nullptr;
      check(triage_priority_fingerprint(m, &fp));
      man.details["fingerprint"] = take(fp);
      man.output(tpri_out);
      std::cout << "priority model written to " << tpri_out << "\n";
    } else if (cmd == pred) {
      default_manifest(pred_out, false);
      auto task = model_task(pred_model);
      man.input(pred_model);
      auto c = load(pred_in, g, man);
      run["options"] = {{"model", pred_model}, {"task", task}};
      char *csv = nullptr;
      if (task == "objective") {
        if (pred_src.given())
          throw UsageError("objective models take no stage-1 source");
        triage_objective_model *m = nullptr;
        check(triage_objective_load(pred_model.c_str(), &m));
        ObjModel owner(m);
        check(triage_objective_predict(m, c.get(), &csv));
      } else {
        triage_priority_model *m = nullptr;
        check(triage_priority_load(pred_model.c_str(), &m));
        PrioModel owner(m);
        Source src;
        if (pred_src.given()) {
          json sdesc;
          src = pred_src.open(man, sdesc);
          run["options"]["objective_source"] = sdesc;
        }
        check(triage_priority_predict(m, c.get(), src.get(), &csv));
      }
      write_text(pred_out, take(csv));
      man.output(pred_out);
    } else if (cmd == ev) {
      default_manifest(ev_out, false);
      auto c = load(ev_in, g, man);
      json sdesc;
      auto src = ev_src.open(man, sdesc);
      auto cfg = ev_train.to_json(g.seed);
      json opts = {{"task", ev_task},       {"mode", ev_mode},   {"folds", ev_folds},
                   {"train_ratio", ev_ratio}, {"seed", g.seed}, {"importance_top", ev_top}};
      if (!ev_sweep.empty())
        opts["weight_sweep"] = ev_sweep;
      run["options"] = {{"config", cfg}, {"evaluation", opts}, {"objective_source", sdesc}};
      char *rep = nullptr, *table = nullptr, *csv = nullptr;
      check(triage_evaluate(c.get(), src.get(), cfg.dump().c_str(), opts.dump().c_str(), &rep, &table, &csv));
      auto report = take(rep);
      auto tab = take(table);
      auto rows = take(csv);
      write_text(ev_out, report);
      man.output(ev_out);
      if (g.emit_csv && !rows.empty()) {
        auto csv_path = sibling(ev_out, ".csv");
        write_text(csv_path, rows);
        man.output(csv_path);
      }
      std::cout << tab;
    } else if (cmd == agr) {
      need_file(agr_in, "--ratings");
      if (!agr_out.empty())
        default_manifest(agr_out, false);
      else
        man.path = g.manifest.empty() ? fs::path("agreement.manifest.json") : fs::path(g.manifest);
      man.input(agr_in);
      run["options"] = {{"majority", agr_majority}};
      char *rep = nullptr, *table = nullptr;
      check(triage_agreement(read_text(agr_in).c_str(), agr_majority ? 1 : 0, &rep, &table));
      auto report = take(rep);
      std::cout << take(table);
      if (!agr_out.empty()) {
        write_text(agr_out, report);
        man.output(agr_out);
        if (g.emit_csv) {
          auto j = json::parse(report);
          std::string csv = "item,agreement,majority,tie\n";
          for (const auto &r : j["overall"]["per_item"])
            csv += r["item"].get<std::string>() + "," + r["agreement"].dump() + "," +
                   (r["majority"].is_null() ? std::string() : r["majority"].get<std::string>()) + "," +
                   (r["tie"].get<bool>() ? "1" : "0") + "\n";
          auto csv_path = sibling(agr_out, ".csv");
          write_text(csv_path, csv);
          man.output(csv_path);
        }
      }
    }
    run["status"] = "ok";
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n" << cmd->help();
    run["status"] = "error";
    run["error"] = e.what();
    code = 1;
  } catch (const ApiError &e) {
    std::cerr << "error (" << triage_status_name(e.status) << "): " << e.what() << "\n";
    run["status"] = "error";
    run["error"] = e.what();
    code = exit_code_for(e.status);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    run["status"] = "error";
    run["error"] = e.what();
    code = 2;
  }

  run["inputs"] = man.inputs;
  run["outputs"] = man.outputs;
  if (!man.details.empty())
    run["details"] = man.details;
  run["exit_code"] = code;
  if (man.path.empty())
    man.path = g.manifest.empty() ? fs::path("triage.manifest.json") : fs::path(g.manifest);
  try {
    write_text(man.path, run.dump(2) + "\n");
  } catch (const std::exception &e) {
    std::cerr << "warning: could not write manifest: " << e.what() << "\n";
  }
  return code;
}
