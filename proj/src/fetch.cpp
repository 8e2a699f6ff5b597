#include "sharetrack/fetch.hpp"

#include <httplib.h>

#include "sharetrack/urlnorm.hpp"

namespace sharetrack {

std::string url_authority(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos) return {};
  url.remove_prefix(sep + 3);
  auto end = url.find_first_of("/?#");
  auto authority = url.substr(0, end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  return ascii_lower(authority);
}

std::string url_path_and_query(std::string_view url) {
  auto sep = url.find("://");
  if (sep != std::string_view::npos) {
    url.remove_prefix(sep + 3);
    auto start = url.find_first_of("/?#");
    url = start == std::string_view::npos ? std::string_view{} : url.substr(start);
  }
  if (auto hash = url.find('#'); hash != std::string_view::npos) url = url.substr(0, hash);
  std::string out(url);
  if (out.empty() || out.front() != '/') out.insert(out.begin(), '/');
  return out;
}

std::string strip_fragment(std::string_view url) {
  return std::string(url.substr(0, url.find('#')));
}

FetchResponse HttpFetcher::operator()(const std::string& url) const {
  const auto sep = url.find("://");
  if (sep == std::string::npos) throw FetchError("not an absolute URL: " + url);
  const std::string scheme = ascii_lower(url.substr(0, sep));
  if (scheme != "http" && scheme != "https") throw FetchError("unsupported scheme: " + url);
  const std::string origin = scheme + "://" + url_authority(url);

  httplib::Client client(origin);
  client.set_follow_location(true);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());

  httplib::Headers headers{{"User-Agent", options_.user_agent}};
  auto res = client.Get(url_path_and_query(url), headers);
  if (!res) throw FetchError("fetch failed for " + url + ": " + httplib::to_string(res.error()));
  if (res->status < 100 || res->status > 599)
    throw FetchError("invalid HTTP status " + std::to_string(res->status) + " for " + url);
  FetchResponse out;
  out.url = url;
  out.status = res->status;
  out.content_type = res->get_header_value("Content-Type");
  out.body = std::move(res->body);
  return out;
}

FetchResponse PoliteFetcher::fetch(const std::string& url) {
  const std::string host = url_authority(url);
  Instant slot;
  {
    std::lock_guard lock(mu_);
    const Instant now = clock_.now();
    auto it = next_slot_.find(host);
    slot = (it == next_slot_.end() || it->second < now) ? now : it->second;
    next_slot_[host] = slot + delay_;
  }
  clock_.sleep_until(slot);
  return fetcher_(url);
}

}  // namespace sharetrack
