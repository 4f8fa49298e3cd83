#pragma once

#include "triage/corpus_types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace triage::ingest {

struct HttpResponse {
  int status = 0;
  std::map<std::string, std::string> headers; // lower-case names
  std::string body;
};

/// One GET per call. Implementations must be safe to call concurrently.
class Transport {
public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const std::string &url, const std::map<std::string, std::string> &headers) = 0;
};

/// cpp-httplib backed transport (https via OpenSSL). Throws Error{Network}
/// when the connection fails.
std::shared_ptr<Transport> make_http_transport(std::chrono::seconds timeout = std::chrono::seconds(30));

struct RetryPolicy {
  int max_attempts = 3; // retries after the first try
  double backoff_base_seconds = 1.0;
};

struct ClientConfig {
  std::string base_url = "https://api.github.com";
  std::string auth_token_env = "GITHUB_TOKEN";
  std::size_t max_parallel_requests = 4;
  std::filesystem::path cache_dir = ".triage-cache";
  RetryPolicy retry;
  bool refresh = false; // ignore cached entries and overwrite them
  int per_page = 100;

  void validate() const;
};

enum class StateFilter { Open, Closed, All };
std::string_view to_string(StateFilter s);
std::optional<StateFilter> parse_state_filter(std::string_view s);

struct FetchQuery {
  std::string repo; // owner/name
  StateFilter state = StateFilter::Closed;
  std::optional<Timestamp> created_before;
  bool include_pull_requests = true;

  void validate() const;
};

/// One file per URL, named by the URL's sha256. Entries never expire.
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path dir);
  std::optional<HttpResponse> get(const std::string &url) const;
  void put(const std::string &url, const HttpResponse &response);
  std::filesystem::path path_for(const std::string &url) const;

private:
  std::mutex &lock_for(const std::string &url);

  std::filesystem::path dir_;
  std::mutex locks_guard_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
using Clock = std::function<std::int64_t()>; // unix seconds

struct HydrationFailure {
  std::string issue_id;
  std::string resource;
  std::string message;
};

struct HydrateResult {
  Corpus corpus;
  std::vector<HydrationFailure> failures;
};

class Client {
public:
  Client(ClientConfig cfg, std::shared_ptr<Transport> transport, Sleeper sleeper = {}, Clock clock = {});

  /// Follows `Link: rel="next"` to exhaustion. Throws Error{Auth} on 401/403,
  /// Error{NotFound} naming the repo on 404.
  std::vector<IssueRecord> fetch_issues(const FetchQuery &q);

  /// Attaches comments, events and the author profile. Issues whose
  /// sub-resources fail are kept with `hydration_failed` set. Auth failures
  /// propagate.
  HydrateResult hydrate(std::vector<IssueRecord> issues);

  /// Single GET with cache, retries and the parallelism bound.
  HttpResponse get(const std::string &path_or_url);
  std::vector<nlohmann::json> get_paginated(const std::string &path_or_url);

  std::size_t network_requests() const { return network_requests_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }
  const ClientConfig &config() const { return cfg_; }

private:
  HttpResponse send_with_retry(const std::string &url);
  std::string absolute(const std::string &path_or_url) const;

  ClientConfig cfg_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
  Clock clock_;
  ResponseCache cache_;
  std::map<std::string, std::string> headers_;
  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  std::size_t in_flight_ = 0;
  std::atomic<std::size_t> network_requests_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

/// `<url>; rel="next"` target of a Link header, if any.
std::optional<std::string> next_link(const std::string &link_header);

/// Maps one element of the issues list endpoint. `repo` fills IssueRecord::repo.
IssueRecord issue_from_api(const nlohmann::json &j, const std::string &repo);

} // namespace triage::ingest
