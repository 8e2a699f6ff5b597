#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

#include "sharetrack/clock.hpp"
#include "sharetrack/error.hpp"

namespace sharetrack {

SHARETRACK_DEFINE_ERROR(FetchError);

struct FetchResponse {
  std::string url;
  int status = 0;
  std::string content_type;
  std::string body;

  bool ok() const { return status >= 200 && status < 300; }
};

// URL -> response. Transport failures throw FetchError; HTTP error statuses
// are returned, not thrown.
using Fetcher = std::function<FetchResponse(const std::string& url)>;

struct HttpFetcherOptions {
  std::chrono::milliseconds timeout{15000};
  std::string user_agent = "sharetrack/1.0";
};

// Real fetcher over cpp-httplib. Follows redirects.
class HttpFetcher {
 public:
  explicit HttpFetcher(HttpFetcherOptions options = {}) : options_(std::move(options)) {}
  FetchResponse operator()(const std::string& url) const;

 private:
  HttpFetcherOptions options_;
};

// Enforces a minimum spacing between request starts to the same host.
// Slots are reserved under a lock and slept outside it, so different hosts
// proceed concurrently.
class PoliteFetcher {
 public:
  PoliteFetcher(Fetcher fetcher, Clock& clock, std::chrono::milliseconds per_host_delay)
      : fetcher_(std::move(fetcher)), clock_(clock), delay_(per_host_delay) {}

  FetchResponse fetch(const std::string& url);
  Clock& clock() { return clock_; }

 private:
  Fetcher fetcher_;
  Clock& clock_;
  std::chrono::milliseconds delay_;
  std::mutex mu_;
  std::map<std::string, Instant> next_slot_;
};

// "http://Host:80/x" -> "host:80"; empty when there is no authority.
std::string url_authority(std::string_view url);
// path plus query of an absolute URL, "/" when empty; fragment excluded.
std::string url_path_and_query(std::string_view url);
std::string strip_fragment(std::string_view url);

}  // namespace sharetrack
