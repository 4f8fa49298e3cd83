#include "triage/ingest.hpp"

#include "triage/common.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <regex>
#include <set>
#include <thread>

namespace triage::ingest {

using nlohmann::json;

void ClientConfig::validate() const {
  if (max_parallel_requests < 1)
    fail(ErrorCode::InvalidArgument, "max_parallel_requests must be at least 1");
  if (retry.max_attempts < 0)
    fail(ErrorCode::InvalidArgument, "retry attempts must be non-negative");
  if (retry.backoff_base_seconds < 0)
    fail(ErrorCode::InvalidArgument, "retry backoff must be non-negative");
  if (per_page < 1 || per_page > 100)
    fail(ErrorCode::InvalidArgument, "per_page must be in 1..100");
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
    fail(ErrorCode::InvalidArgument, "base_url must start with http:// or https://");
}

std::string_view to_string(StateFilter s) {
  switch (s) {
  case StateFilter::Open: return "open";
  case StateFilter::Closed: return "closed";
  case StateFilter::All: return "all";
  }
  return "all";
}

std::optional<StateFilter> parse_state_filter(std::string_view s) {
  auto l = to_lower(s);
  if (l == "open")
    return StateFilter::Open;
  if (l == "closed")
    return StateFilter::Closed;
  if (l == "all")
    return StateFilter::All;
  return std::nullopt;
}

void FetchQuery::validate() const {
  static const std::regex shape(R"(^[A-Za-z0-9_.-]+/[A-Za-z0-9_.-]+$)");
  if (!std::regex_match(repo, shape))
    fail(ErrorCode::InvalidArgument, "repo must look like owner/name: '" + repo + "'");
}

// --- cache ------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ResponseCache::path_for(const std::string &url) const {
  return dir_ / (sha256_hex(url) + ".json");
}

std::optional<HttpResponse> ResponseCache::get(const std::string &url) const {
  auto p = path_for(url);
  std::error_code ec;
  if (!std::filesystem::exists(p, ec))
    return std::nullopt;
  auto j = json::parse(read_file(p), nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("url", "") != url)
    return std::nullopt;
  HttpResponse r;
  r.status = j.value("status", 0);
  r.body = j.value("body", "");
  if (auto it = j.find("link"); it != j.end() && it->is_string())
    r.headers["link"] = it->get<std::string>();
  return r;
}

std::mutex &ResponseCache::lock_for(const std::string &url) {
  std::lock_guard g(locks_guard_);
  auto &m = locks_[url];
  if (!m)
    m = std::make_unique<std::mutex>();
  return *m;
}

void ResponseCache::put(const std::string &url, const HttpResponse &response) {
  std::lock_guard g(lock_for(url));
  std::filesystem::create_directories(dir_);
  json j = {{"url", url}, {"status", response.status}, {"body", response.body}};
  if (auto it = response.headers.find("link"); it != response.headers.end())
    j["link"] = it->second;
  write_file_atomic(path_for(url), j.dump() + "\n");
}

// --- client -----------------------------------------------------------------

Client::Client(ClientConfig cfg, std::shared_ptr<Transport> transport, Sleeper sleeper, Clock clock)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), sleeper_(std::move(sleeper)),
      clock_(std::move(clock)), cache_(cfg_.cache_dir) {
  cfg_.validate();
  if (!transport_)
    fail(ErrorCode::InvalidArgument, "client needs a transport");
  if (!sleeper_)
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (!clock_)
    clock_ = [] {
      return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  headers_["Accept"] = "application/vnd.github+json";
  headers_["User-Agent"] = "triage-ingest/1.0";
  headers_["X-GitHub-Api-Version"] = "2022-11-28";
  if (!cfg_.auth_token_env.empty())
    if (const char *tok = std::getenv(cfg_.auth_token_env.c_str()); tok && *tok)
      headers_["Authorization"] = std::string("Bearer ") + tok;
}

std::string Client::absolute(const std::string &path_or_url) const {
  if (path_or_url.rfind("http://", 0) == 0 || path_or_url.rfind("https://", 0) == 0)
    return path_or_url;
  std::string base = cfg_.base_url;
  while (!base.empty() && base.back() == '/')
    base.pop_back();
  return base + (path_or_url.empty() || path_or_url[0] != '/' ? "/" : "") + path_or_url;
}

namespace {

std::optional<double> header_number(const HttpResponse &r, const std::string &name) {
  auto it = r.headers.find(name);
  if (it == r.headers.end())
    return std::nullopt;
  try {
    return std::stod(it->second);
  } catch (...) {
    return std::nullopt;
  }
}

bool is_rate_limited(const HttpResponse &r) {
  if (r.status == 429)
    return true;
  if (r.status != 403)
    return false;
  auto remaining = header_number(r, "x-ratelimit-remaining");
  return (remaining && *remaining == 0) || r.headers.count("retry-after") > 0;
}

std::chrono::milliseconds seconds_ms(double s) {
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(std::max(0.0, s) * 1000.0)));
}

} // namespace

HttpResponse Client::send_with_retry(const std::string &url) {
  const int attempts = cfg_.retry.max_attempts;
  auto backoff = [&](int attempt) { return seconds_ms(cfg_.retry.backoff_base_seconds * std::pow(2.0, attempt)); };
  for (int attempt = 0;; ++attempt) {
    HttpResponse r;
    {
      std::unique_lock lk(slots_mutex_);
      slots_cv_.wait(lk, [&] { return in_flight_ < cfg_.max_parallel_requests; });
      ++in_flight_;
    }
    ++network_requests_;
    std::exception_ptr err;
    try {
      r = transport_->get(url, headers_);
    } catch (...) {
      err = std::current_exception();
    }
    {
      std::lock_guard lk(slots_mutex_);
      --in_flight_;
    }
    slots_cv_.notify_one();

    if (err) {
      try {
        std::rethrow_exception(err);
      } catch (const Error &e) {
        if (e.code() != ErrorCode::Network || attempt >= attempts)
          throw;
      }
      sleeper_(backoff(attempt));
      continue;
    }
    if (is_rate_limited(r)) {
      if (attempt >= attempts)
        fail(ErrorCode::RateLimited, "rate limited: " + url);
      if (auto after = header_number(r, "retry-after"))
        sleeper_(seconds_ms(*after));
      else if (auto reset = header_number(r, "x-ratelimit-reset"))
        sleeper_(seconds_ms(*reset - static_cast<double>(clock_())));
      else
        sleeper_(backoff(attempt));
      continue;
    }
    if (r.status == 401 || r.status == 403)
      fail(ErrorCode::Auth, "authentication failed (" + std::to_string(r.status) + "): " + url);
    if (r.status >= 500 && attempt < attempts) {
      sleeper_(backoff(attempt));
      continue;
    }
    return r;
  }
}

HttpResponse Client::get(const std::string &path_or_url) {
  auto url = absolute(path_or_url);
  if (!cfg_.refresh)
    if (auto hit = cache_.get(url)) {
      ++cache_hits_;
      return *hit;
    }
  auto r = send_with_retry(url);
  if (r.status == 200 || r.status == 404)
    cache_.put(url, r);
  return r;
}

std::optional<std::string> next_link(const std::string &link_header) {
  static const std::regex part(R"re(<([^>]*)>\s*;\s*rel="?([^",;]*)"?)re");
  for (auto it = std::sregex_iterator(link_header.begin(), link_header.end(), part); it != std::sregex_iterator();
       ++it) {
    std::string rels = (*it)[2];
    for (const auto &rel : split_whitespace(rels))
      if (rel == "next")
        return (*it)[1].str();
  }
  return std::nullopt;
}

std::vector<json> Client::get_paginated(const std::string &path_or_url) {
  std::vector<json> out;
  std::optional<std::string> url = absolute(path_or_url);
  std::set<std::string> seen;
  while (url) {
    if (!seen.insert(*url).second)
      fail(ErrorCode::Parse, "pagination loop at " + *url);
    auto r = get(*url);
    if (r.status == 404)
      fail(ErrorCode::NotFound, "not found: " + *url);
    if (r.status != 200)
      fail(ErrorCode::Network, "GET " + *url + " returned " + std::to_string(r.status));
    auto j = json::parse(r.body, nullptr, false);
    if (j.is_discarded() || !j.is_array())
      fail(ErrorCode::Parse, "expected a JSON array from " + *url);
    for (auto &e : j)
      out.push_back(std::move(e));
    auto link = r.headers.find("link");
    url = link == r.headers.end() ? std::nullopt : next_link(link->second);
  }
  return out;
}

// --- mapping ----------------------------------------------------------------

namespace {

std::string str_or(const json &j, const char *key, std::string fallback = {}) {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : fallback;
}

std::uint64_t count_or_zero(const json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number())
    return 0;
  auto v = it->get<double>();
  return v > 0 ? static_cast<std::uint64_t>(v) : 0;
}

std::optional<Timestamp> time_or_none(const json &j, const char *key) {
  auto s = str_or(j, key);
  if (s.empty())
    return std::nullopt;
  return parse_timestamp(s);
}

Association association_from_api(const std::string &s) {
  if (s == "OWNER")
    return Association::Owner;
  if (s == "MEMBER")
    return Association::Member;
  if (s == "COLLABORATOR")
    return Association::Collaborator;
  if (s == "CONTRIBUTOR" || s == "FIRST_TIME_CONTRIBUTOR")
    return Association::Contributor;
  return Association::None;
}

std::string issue_number(const IssueRecord &issue) {
  auto hash = issue.id.rfind('#');
  if (hash == std::string::npos || hash + 1 == issue.id.size())
    fail(ErrorCode::InvalidArgument, "issue id '" + issue.id + "' carries no number");
  return issue.id.substr(hash + 1);
}

template <class Fn> void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(std::max<std::size_t>(1, threads));
  for (std::size_t t = 0; t < std::min(threads, n); ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i; (i = next++) < n;)
          fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
        next = n;
      }
    });
  for (auto &th : pool)
    th.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

bool is_fatal(const Error &e) { return e.code() == ErrorCode::Auth; }

} // namespace

IssueRecord issue_from_api(const json &j, const std::string &repo) {
  if (!j.is_object() || !j.contains("number"))
    fail(ErrorCode::Parse, "issue object without a number");
  IssueRecord r;
  r.repo = repo;
  r.id = repo + "#" + std::to_string(j.at("number").get<std::int64_t>());
  r.title = str_or(j, "title");
  r.description = str_or(j, "body");
  r.state = str_or(j, "state") == "open" ? IssueState::Open : IssueState::Closed;
  auto created = time_or_none(j, "created_at");
  if (!created)
    fail(ErrorCode::Parse, r.id + ": missing created_at");
  r.created_at = *created;
  r.closed_at = time_or_none(j, "closed_at");
  r.updated_at = time_or_none(j, "updated_at");
  if (auto it = j.find("labels"); it != j.end() && it->is_array())
    for (const auto &l : *it) {
      auto name = l.is_string() ? l.get<std::string>() : str_or(l, "name");
      if (!name.empty())
        r.labels.push_back(name);
    }
  r.is_pull_request = j.contains("pull_request") && !j["pull_request"].is_null();
  r.milestone_present = j.contains("milestone") && !j["milestone"].is_null();
  r.assignee_present = (j.contains("assignee") && !j["assignee"].is_null()) ||
                       (j.contains("assignees") && j["assignees"].is_array() && !j["assignees"].empty());
  if (auto it = j.find("user"); it != j.end() && it->is_object())
    r.author.login = str_or(*it, "login");
  r.author.association = association_from_api(str_or(j, "author_association"));
  if (auto it = j.find("closed_by"); it != j.end() && it->is_object())
    r.closer_login = str_or(*it, "login");
  return r;
}

std::vector<IssueRecord> Client::fetch_issues(const FetchQuery &q) {
  q.validate();
  auto path = "/repos/" + q.repo + "/issues?state=" + std::string(to_string(q.state)) +
              "&per_page=" + std::to_string(cfg_.per_page) + "&sort=created&direction=asc";
  std::vector<json> raw;
  try {
    raw = get_paginated(path);
  } catch (const Error &e) {
    if (e.code() == ErrorCode::NotFound)
      fail(ErrorCode::NotFound, "repository '" + q.repo + "' not found");
    throw;
  }
  std::vector<IssueRecord> out;
  for (const auto &j : raw) {
    auto r = issue_from_api(j, q.repo);
    if (r.is_pull_request && !q.include_pull_requests)
      continue;
    if (q.created_before && r.created_at >= *q.created_before)
      continue;
    out.push_back(std::move(r));
  }
  return out;
}

HydrateResult Client::hydrate(std::vector<IssueRecord> issues) {
  const std::size_t threads = cfg_.max_parallel_requests;
  std::vector<std::string> logins, repos;
  for (const auto &i : issues) {
    if (i.id.empty() || i.repo.empty())
      fail(ErrorCode::InvalidArgument, "hydrate needs issue id and repo");
    if (!i.author.login.empty())
      logins.push_back(i.author.login);
    repos.push_back(i.repo);
  }
  std::sort(logins.begin(), logins.end());
  logins.erase(std::unique(logins.begin(), logins.end()), logins.end());
  std::sort(repos.begin(), repos.end());
  repos.erase(std::unique(repos.begin(), repos.end()), repos.end());

  struct RepoInfo {
    std::map<std::string, std::uint64_t> contributions;
    std::string error;
  };
  std::vector<RepoInfo> repo_info(repos.size());
  parallel_for(repos.size(), threads, [&](std::size_t k) {
    try {
      for (const auto &c : get_paginated("/repos/" + repos[k] + "/contributors?per_page=" +
                                        std::to_string(cfg_.per_page)))
        repo_info[k].contributions[str_or(c, "login")] = count_or_zero(c, "contributions");
    } catch (const Error &e) {
      if (is_fatal(e))
        throw;
      repo_info[k].error = e.what();
    }
  });

  struct ProfileInfo {
    UserProfile profile;
    std::vector<std::pair<std::string, std::string>> errors; // resource, message
  };
  std::vector<ProfileInfo> profiles(logins.size());
  parallel_for(logins.size(), threads, [&](std::size_t k) {
    auto &p = profiles[k];
    p.profile.login = logins[k];
    auto total_count = [&](const std::string &resource, const std::string &path) -> std::uint64_t {
      try {
        auto r = get(path);
        if (r.status != 200)
          fail(ErrorCode::Network, "GET " + path + " returned " + std::to_string(r.status));
        auto j = json::parse(r.body, nullptr, false);
        if (j.is_discarded() || !j.is_object())
          fail(ErrorCode::Parse, "expected a JSON object from " + path);
        return count_or_zero(j, "total_count");
      } catch (const Error &e) {
        if (is_fatal(e))
          throw;
        p.errors.emplace_back(resource, e.what());
        return 0;
      }
    };
    try {
      auto r = get("/users/" + logins[k]);
      if (r.status == 404) {
        p.errors.emplace_back("user", "user '" + logins[k] + "' not found");
        return;
      }
      if (r.status != 200)
        fail(ErrorCode::Network, "GET /users/" + logins[k] + " returned " + std::to_string(r.status));
      auto j = json::parse(r.body, nullptr, false);
      if (j.is_discarded() || !j.is_object())
        fail(ErrorCode::Parse, "expected a JSON object for user " + logins[k]);
      p.profile.followers = count_or_zero(j, "followers");
      p.profile.following = count_or_zero(j, "following");
      p.profile.public_repos = count_or_zero(j, "public_repos");
      p.profile.public_gists = count_or_zero(j, "public_gists");
      if (auto t = time_or_none(j, "created_at"))
        p.profile.account_created_at = *t;
    } catch (const Error &e) {
      if (is_fatal(e))
        throw;
      p.errors.emplace_back("user", e.what());
      return;
    }
    p.profile.issue_count = total_count("issue_count", "/search/issues?q=author:" + logins[k] + "+type:issue&per_page=1");
    p.profile.github_contributions = total_count("github_contributions", "/search/commits?q=author:" + logins[k] + "&per_page=1");
  });

  std::vector<std::vector<HydrationFailure>> failures(issues.size());
  parallel_for(issues.size(), threads, [&](std::size_t i) {
    auto &issue = issues[i];
    auto base = "/repos/" + issue.repo + "/issues/" + issue_number(issue);
    auto note = [&](const std::string &resource, const std::string &message) {
      failures[i].push_back({issue.id, resource, message});
    };
    try {
      issue.comments.clear();
      for (const auto &c : get_paginated(base + "/comments?per_page=" + std::to_string(cfg_.per_page))) {
        CommentRecord cr;
        if (auto u = c.find("user"); u != c.end() && u->is_object())
          cr.author_login = str_or(*u, "login");
        cr.body = str_or(c, "body");
        cr.created_at = time_or_none(c, "created_at").value_or(issue.created_at);
        issue.comments.push_back(std::move(cr));
      }
    } catch (const Error &e) {
      if (is_fatal(e))
        throw;
      issue.comments.clear();
      note("comments", e.what());
    }
    try {
      issue.events.clear();
      for (const auto &ev : get_paginated(base + "/events?per_page=" + std::to_string(cfg_.per_page))) {
        EventRecord er;
        er.kind = str_or(ev, "event");
        er.created_at = time_or_none(ev, "created_at").value_or(issue.created_at);
        if (er.kind.empty())
          continue;
        if (er.kind == "closed")
          if (auto a = ev.find("actor"); a != ev.end() && a->is_object())
            issue.closer_login = str_or(*a, "login");
        if (auto c = ev.find("commit_id"); c != ev.end() && c->is_string())
          issue.referenced_commit = true;
        issue.events.push_back(std::move(er));
      }
    } catch (const Error &e) {
      if (is_fatal(e))
        throw;
      issue.events.clear();
      note("events", e.what());
    }

    auto assoc = issue.author.association;
    if (!issue.author.login.empty()) {
      auto k = static_cast<std::size_t>(std::lower_bound(logins.begin(), logins.end(), issue.author.login) - logins.begin());
      issue.author = profiles[k].profile;
      for (const auto &[res, msg] : profiles[k].errors)
        note(res, msg);
    } else {
      note("user", "issue has no author login");
    }
    issue.author.association = assoc;
    auto r = static_cast<std::size_t>(std::lower_bound(repos.begin(), repos.end(), issue.repo) - repos.begin());
    if (!repo_info[r].error.empty())
      note("repo_contributions", repo_info[r].error);
    else if (auto it = repo_info[r].contributions.find(issue.author.login); it != repo_info[r].contributions.end())
      issue.author.repo_contributions = it->second;
    issue.hydration_failed = !failures[i].empty();
  });

  HydrateResult out;
  out.corpus.provenance.source = cfg_.base_url;
  for (auto &f : failures)
    for (auto &x : f)
      out.failures.push_back(std::move(x));
  out.corpus.issues = std::move(issues);
  return out;
}

} // namespace triage::ingest
