#include "sharetrack/stream.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "sharetrack/store.hpp"

namespace sharetrack {
namespace {

using nlohmann::json;

std::optional<std::string> id_field(const json& j, const char* key, bool required) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) throw MalformedEvent(std::string("missing required field ") + key);
    return std::nullopt;
  }
  std::string value;
  if (it->is_string()) {
    value = it->get<std::string>();
  } else if (it->is_number_integer()) {
    value = it->dump();
  } else {
    throw MalformedEvent(std::string("field ") + key + " must be a string or integer");
  }
  if (value.empty()) {
    if (required) throw MalformedEvent(std::string("empty required field ") + key);
    return std::nullopt;
  }
  return value;
}

}  // namespace

RawTweet parse_tweet_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedEvent(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw MalformedEvent("event is not a JSON object");

  RawTweet t;
  t.id = *id_field(j, "id", true);
  t.user_id = *id_field(j, "user_id", true);
  auto created = j.find("created_at");
  if (created == j.end() || !created->is_string()) throw MalformedEvent("missing required field created_at");
  auto ts = parse_iso8601(created->get<std::string>());
  if (!ts) throw MalformedEvent("unparseable created_at: " + created->get<std::string>());
  t.created_at = *ts;
  if (auto text = j.find("text"); text != j.end() && text->is_string()) t.text = text->get<std::string>();
  if (auto urls = j.find("urls"); urls != j.end() && !urls->is_null()) {
    if (!urls->is_array()) throw MalformedEvent("urls must be an array");
    for (const auto& u : *urls) {
      if (!u.is_string()) throw MalformedEvent("urls entries must be strings");
      t.urls.push_back(u.get<std::string>());
    }
  }
  t.retweeted_id = id_field(j, "retweeted_id", false);
  t.quoted_id = id_field(j, "quoted_id", false);
  t.replied_id = id_field(j, "replied_id", false);
  return t;
}

TweetType classify(const RawTweet& t) {
  if (t.retweeted_id) return TweetType::kRetweet;
  if (t.quoted_id) return TweetType::kQuote;
  if (t.replied_id) return TweetType::kReply;
  return TweetType::kOriginal;
}

SiteMatcher::SiteMatcher(std::span<const Site> sites) {
  for (const auto& s : sites) by_domain_.emplace(s.domain, s);
}

std::vector<const Site*> SiteMatcher::match(const CanonicalUrl& url) const {
  std::vector<const Site*> out;
  std::string_view host = url.host;
  if (auto colon = host.rfind(':'); colon != std::string_view::npos) host = host.substr(0, colon);
  while (!host.empty()) {
    if (auto it = by_domain_.find(std::string(host)); it != by_domain_.end()) out.push_back(&it->second);
    const auto dot = host.find('.');
    if (dot == std::string_view::npos) break;
    host.remove_prefix(dot + 1);
  }
  return out;
}

std::vector<UrlMatch> filter_tweet(const RawTweet& t, const SiteMatcher& sites) {
  std::vector<UrlMatch> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& raw : t.urls) {
    CanonicalUrl canon;
    try {
      canon = canonicalize(raw);
    } catch (const MalformedUrl&) {
      continue;
    }
    for (const Site* site : sites.match(canon)) {
      if (seen.emplace(canon.full, site->domain).second) out.push_back({canon, site->domain});
    }
  }
  return out;
}

std::vector<UrlMatch> filter_tweet(const RawTweet& t, std::span<const Site> sites) {
  return filter_tweet(t, SiteMatcher(sites));
}

IngestReport ingest(std::istream& source, std::span<const Site> sites, Store& store) {
  const SiteMatcher matcher(sites);
  IngestReport report;
  try {
    for (const Site& site : sites) store.put_site(site);
  } catch (const Error& e) {
    report.partial = true;
    throw IngestAborted(std::string("ingest aborted: ") + e.what(), report);
  }
  std::string line;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++report.read;
    RawTweet raw;
    try {
      raw = parse_tweet_line(line);
    } catch (const MalformedEvent&) {
      ++report.rejected_malformed;
      continue;
    }
    auto matches = filter_tweet(raw, matcher);
    if (matches.empty()) {
      ++report.dropped_no_match;
      continue;
    }
    ++report.accepted;
    TweetRecord record{raw.id, raw.created_at, raw.user_id, classify(raw), std::move(matches), 0};
    try {
      if (store.put_tweet(std::move(record)).second) ++report.inserted;
    } catch (const Error& e) {
      report.partial = true;
      throw IngestAborted(std::string("ingest aborted: ") + e.what(), report);
    }
  }
  if (source.bad()) {
    report.partial = true;
    throw IngestAborted("read error on tweet source", report);
  }
  return report;
}

IngestReport ingest_file(const std::filesystem::path& path, std::span<const Site> sites, Store& store) {
  if (path == "-") return ingest(std::cin, sites, store);
  std::ifstream in(path);
  if (!in) throw SourceUnavailable("cannot open tweet source " + path.string());
  return ingest(in, sites, store);
}

std::vector<Site> parse_sites_file(std::istream& in, Timestamp registered_at) {
  std::vector<Site> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Site s;
      s.domain = canonicalize(j.at("domain").get<std::string>()).host;
      auto cat = parse_category(j.at("category").get<std::string>());
      if (!cat) throw InvariantViolation("unknown category");
      s.category = *cat;
      if (auto rss = j.find("rss_url"); rss != j.end() && !rss->is_null()) s.rss_url = rss->get<std::string>();
      s.registered_at = registered_at;
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw InvariantViolation("sites file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace sharetrack
