#include "triage/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace triage {

using nlohmann::json;

std::string_view to_string(ObjectiveClass c) {
  switch (c) {
  case ObjectiveClass::Bug: return "Bug";
  case ObjectiveClass::Enhancement: return "Enhancement";
  case ObjectiveClass::SupportDoc: return "SupportDoc";
  }
  return "?";
}

std::string_view to_string(PriorityClass c) {
  return c == PriorityClass::High ? "High" : "Low";
}

std::optional<ObjectiveClass> parse_objective(std::string_view s) {
  for (auto c : kObjectiveClasses)
    if (to_lower(to_string(c)) == to_lower(s))
      return c;
  return std::nullopt;
}

std::optional<PriorityClass> parse_priority(std::string_view s) {
  auto l = to_lower(s);
  if (l == "high" || l == "h" || l == "hp")
    return PriorityClass::High;
  if (l == "low" || l == "l" || l == "lp")
    return PriorityClass::Low;
  return std::nullopt;
}

std::string_view to_string(Association a) {
  switch (a) {
  case Association::None: return "None";
  case Association::Contributor: return "Contributor";
  case Association::Collaborator: return "Collaborator";
  case Association::Member: return "Member";
  case Association::Owner: return "Owner";
  }
  return "None";
}

std::optional<Association> parse_association(std::string_view s) {
  for (auto a : {Association::None, Association::Contributor, Association::Collaborator,
                 Association::Member, Association::Owner})
    if (to_lower(to_string(a)) == to_lower(s))
      return a;
  return std::nullopt;
}

namespace {

const std::set<std::string> &known_keys() {
  static const std::set<std::string> keys = {
      "id",        "repo",          "title",   "description",       "state",
      "created_at", "closed_at",    "updated_at", "labels",         "is_pull_request",
      "milestone_present", "assignee_present", "comments", "events", "author",
      "closer_login", "referenced_commit", "hydration_failed"};
  return keys;
}

[[noreturn]] void schema_error(const std::string &msg) { fail(ErrorCode::Schema, msg); }

const json &require(const json &obj, const char *key) {
  auto it = obj.find(key);
  if (it == obj.end())
    schema_error(std::string("missing key '") + key + "'");
  return *it;
}

std::string get_string(const json &obj, const char *key) {
  const auto &v = require(obj, key);
  if (!v.is_string())
    schema_error(std::string("key '") + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const json &obj, const char *key, std::optional<bool> fallback = std::nullopt) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback)
      return *fallback;
    schema_error(std::string("missing key '") + key + "'");
  }
  if (!it->is_boolean())
    schema_error(std::string("key '") + key + "' must be a boolean");
  return it->get<bool>();
}

std::uint64_t get_count(const json &obj, const char *key) {
  const auto &v = require(obj, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    schema_error(std::string("key '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

Timestamp get_time(const json &obj, const char *key) {
  auto s = get_string(obj, key);
  try {
    return parse_timestamp(s);
  } catch (const Error &e) {
    schema_error(std::string("key '") + key + "': " + e.what());
  }
}

std::optional<Timestamp> get_opt_time(const json &obj, const char *key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null())
    return std::nullopt;
  return get_time(obj, key);
}

json profile_to_json(const UserProfile &u) {
  return {{"login", u.login},
          {"followers", u.followers},
          {"following", u.following},
          {"public_repos", u.public_repos},
          {"public_gists", u.public_gists},
          {"issue_count", u.issue_count},
          {"github_contributions", u.github_contributions},
          {"account_created_at", format_timestamp(u.account_created_at)},
          {"repo_contributions", u.repo_contributions},
          {"association", std::string(to_string(u.association))}};
}

UserProfile profile_from_json(const json &j) {
  if (!j.is_object())
    schema_error("author must be an object");
  UserProfile u;
  u.login = get_string(j, "login");
  u.followers = get_count(j, "followers");
  u.following = get_count(j, "following");
  u.public_repos = get_count(j, "public_repos");
  u.public_gists = get_count(j, "public_gists");
  u.issue_count = get_count(j, "issue_count");
  u.github_contributions = get_count(j, "github_contributions");
  u.account_created_at = get_time(j, "account_created_at");
  u.repo_contributions = get_count(j, "repo_contributions");
  auto assoc = parse_association(get_string(j, "association"));
  if (!assoc)
    schema_error("association must be one of None, Contributor, Collaborator, Member, Owner");
  u.association = *assoc;
  return u;
}

} // namespace

std::string issue_to_json(const IssueRecord &issue) {
  json j = json::object();
  for (const auto &[k, v] : issue.extra)
    j[k] = json::parse(v);
  j["id"] = issue.id;
  j["repo"] = issue.repo;
  j["title"] = issue.title;
  j["description"] = issue.description;
  j["state"] = issue.state == IssueState::Open ? "open" : "closed";
  j["created_at"] = format_timestamp(issue.created_at);
  j["closed_at"] = issue.closed_at ? json(format_timestamp(*issue.closed_at)) : json(nullptr);
  j["updated_at"] = issue.updated_at ? json(format_timestamp(*issue.updated_at)) : json(nullptr);
  j["labels"] = issue.labels;
  j["is_pull_request"] = issue.is_pull_request;
  j["milestone_present"] = issue.milestone_present;
  j["assignee_present"] = issue.assignee_present;
  json comments = json::array();
  for (const auto &c : issue.comments)
    comments.push_back({{"author_login", c.author_login},
                        {"body", c.body},
                        {"created_at", format_timestamp(c.created_at)}});
  j["comments"] = std::move(comments);
  json events = json::array();
  for (const auto &e : issue.events)
    events.push_back({{"kind", e.kind}, {"created_at", format_timestamp(e.created_at)}});
  j["events"] = std::move(events);
  j["author"] = profile_to_json(issue.author);
  j["closer_login"] = issue.closer_login ? json(*issue.closer_login) : json(nullptr);
  j["referenced_commit"] = issue.referenced_commit;
  j["hydration_failed"] = issue.hydration_failed;
  return j.dump();
}

IssueRecord issue_from_json(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error &e) {
    fail(ErrorCode::Schema, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object())
    schema_error("record must be a JSON object");

  IssueRecord r;
  r.id = get_string(j, "id");
  if (r.id.empty())
    schema_error("id must be non-empty");
  r.repo = get_string(j, "repo");
  r.title = get_string(j, "title");
  r.description = get_string(j, "description");
  auto state = get_string(j, "state");
  if (state == "open")
    r.state = IssueState::Open;
  else if (state == "closed")
    r.state = IssueState::Closed;
  else
    schema_error("state must be 'open' or 'closed'");
  r.created_at = get_time(j, "created_at");
  r.closed_at = get_opt_time(j, "closed_at");
  r.updated_at = get_opt_time(j, "updated_at");
  if (r.closed_at && *r.closed_at < r.created_at)
    schema_error("closed_at precedes created_at");

  const auto &labels = require(j, "labels");
  if (!labels.is_array())
    schema_error("labels must be an array");
  std::set<std::string> folded;
  for (const auto &l : labels) {
    if (!l.is_string())
      schema_error("labels must be strings");
    auto s = l.get<std::string>();
    if (!folded.insert(to_lower(s)).second)
      schema_error("duplicate label '" + s + "'");
    r.labels.push_back(std::move(s));
  }

  r.is_pull_request = get_bool(j, "is_pull_request");
  r.milestone_present = get_bool(j, "milestone_present");
  r.assignee_present = get_bool(j, "assignee_present");

  const auto &comments = require(j, "comments");
  if (!comments.is_array())
    schema_error("comments must be an array");
  for (const auto &c : comments) {
    CommentRecord cr{get_string(c, "author_login"), get_string(c, "body"), get_time(c, "created_at")};
    if (cr.created_at < r.created_at)
      schema_error("comment precedes its issue");
    r.comments.push_back(std::move(cr));
  }
  const auto &events = require(j, "events");
  if (!events.is_array())
    schema_error("events must be an array");
  for (const auto &e : events) {
    EventRecord er{get_string(e, "kind"), get_time(e, "created_at")};
    if (er.kind.empty())
      schema_error("event kind must be non-empty");
    r.events.push_back(std::move(er));
  }
  r.author = profile_from_json(require(j, "author"));
  if (auto it = j.find("closer_login"); it != j.end() && !it->is_null()) {
    if (!it->is_string())
      schema_error("closer_login must be a string or null");
    r.closer_login = it->get<std::string>();
  }
  r.referenced_commit = get_bool(j, "referenced_commit");
  r.hydration_failed = get_bool(j, "hydration_failed", false);

  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known_keys().count(it.key()))
      r.extra[it.key()] = it.value().dump();
  return r;
}

std::filesystem::path sidecar_path(const std::filesystem::path &corpus_file) {
  auto p = corpus_file;
  p += ".meta.json";
  return p;
}

LoadResult load_corpus(const std::filesystem::path &path, bool strict) {
  if (!std::filesystem::exists(path))
    fail(ErrorCode::Io, "corpus file '" + path.string() + "' does not exist");
  LoadResult result;
  auto meta_path = sidecar_path(path);
  if (std::filesystem::exists(meta_path)) {
    json meta;
    try {
      meta = json::parse(read_file(meta_path));
    } catch (const json::parse_error &e) {
      fail(ErrorCode::Schema, "corpus metadata '" + meta_path.string() + "': " + e.what());
    }
    int version = meta.value("schema_version", -1);
    if (version != kCorpusSchemaVersion)
      fail(ErrorCode::Schema, "corpus schema version " + std::to_string(version) +
                                  " is not supported (expected " +
                                  std::to_string(kCorpusSchemaVersion) + ")");
    if (auto p = meta.find("provenance"); p != meta.end() && p->is_object()) {
      result.corpus.provenance.source = p->value("source", "");
      result.corpus.provenance.fetched_at = p->value("fetched_at", "");
    }
  }

  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (trim(line).empty())
      continue;
    try {
      auto issue = issue_from_json(line);
      if (!ids.insert(issue.id).second)
        fail(ErrorCode::Schema, "duplicate issue id '" + issue.id + "'");
      result.corpus.issues.push_back(std::move(issue));
    } catch (const Error &e) {
      if (strict)
        fail(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      result.errors.push_back({lineno, e.what()});
    }
  }
  return result;
}

void save_corpus(const Corpus &corpus, const std::filesystem::path &path) {
  std::string body;
  std::set<std::string> ids;
  for (const auto &issue : corpus.issues) {
    if (!ids.insert(issue.id).second)
      fail(ErrorCode::InvalidArgument, "duplicate issue id '" + issue.id + "'");
    body += issue_to_json(issue);
    body += '\n';
  }
  json meta = {{"schema_version", corpus.schema_version},
               {"provenance",
                {{"source", corpus.provenance.source},
                 {"fetched_at", corpus.provenance.fetched_at}}}};
  write_file_atomic(path, body);
  write_file_atomic(sidecar_path(path), meta.dump(2) + "\n");
}

double non_ascii_fraction(std::string_view text) {
  std::size_t total = 0, outside = 0;
  for (std::size_t i = 0; i < text.size();) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (c >= 0xF0)
      len = 4;
    else if (c >= 0xE0)
      len = 3;
    else if (c >= 0xC0)
      len = 2;
    if (c < 0x80 && std::isspace(c)) {
      i += 1;
      continue;
    }
    ++total;
    if (!(c >= 0x20 && c <= 0x7E))
      ++outside;
    i += len;
  }
  return total == 0 ? 0.0 : static_cast<double>(outside) / static_cast<double>(total);
}

std::pair<Corpus, FilterReport> filter_corpus(const Corpus &corpus, const FilterConfig &rules,
                                              const labels::ClusterTable &clusters) {
  std::vector<std::size_t> excluded;
  for (const auto &name : rules.excluded_clusters) {
    auto idx = clusters.index_of_representative(name);
    if (!idx)
      fail(ErrorCode::InvalidArgument, "unknown label cluster '" + name + "'");
    excluded.push_back(*idx);
  }

  FilterReport report;
  report.input = corpus.issues.size();
  Corpus out;
  out.provenance = corpus.provenance;
  out.schema_version = corpus.schema_version;
  for (const auto &issue : corpus.issues) {
    if (utf8_length(trim(issue.title)) < rules.min_text_length ||
        utf8_length(trim(issue.description)) < rules.min_text_length) {
      ++report.short_text;
      continue;
    }
    std::optional<std::size_t> hit;
    for (const auto &label : issue.labels) {
      auto c = clusters.cluster_of(label);
      if (c && std::find(excluded.begin(), excluded.end(), *c) != excluded.end()) {
        hit = c;
        break;
      }
    }
    if (hit) {
      ++report.excluded_label;
      ++report.excluded_by_cluster[clusters.clusters()[*hit].representative];
      continue;
    }
    if (non_ascii_fraction(issue.title + "\n" + issue.description) > rules.non_english_threshold) {
      ++report.non_english;
      continue;
    }
    out.issues.push_back(issue);
  }
  report.kept = out.issues.size();
  return {std::move(out), report};
}

} // namespace triage
