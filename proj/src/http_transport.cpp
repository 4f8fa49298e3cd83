#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "triage/common.hpp"
#include "triage/ingest.hpp"

namespace triage::ingest {

namespace {

class HttplibTransport final : public Transport {
public:
  explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

  HttpResponse get(const std::string &url, const std::map<std::string, std::string> &headers) override {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
      fail(ErrorCode::InvalidArgument, "not an absolute URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin = url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client cli(origin);
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    cli.set_follow_location(true);
    httplib::Headers h(headers.begin(), headers.end());
    auto res = cli.Get(path, h);
    if (!res)
      fail(ErrorCode::Network, "GET " + url + ": " + httplib::to_string(res.error()));
    HttpResponse out;
    out.status = res->status;
    out.body = res->body;
    for (const auto &[k, v] : res->headers)
      out.headers[to_lower(k)] = v;
    return out;
  }

private:
  std::chrono::seconds timeout_;
};

} // namespace

std::shared_ptr<Transport> make_http_transport(std::chrono::seconds timeout) {
  return std::make_shared<HttplibTransport>(timeout);
}

} // namespace triage::ingest
