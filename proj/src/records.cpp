#include "sharetrack/records.hpp"

#include <algorithm>

namespace sharetrack {
namespace {

using nlohmann::json;

Timestamp read_time(const json& j, const char* key) {
  const auto& v = j.at(key);
  auto t = parse_iso8601(v.get<std::string>());
  if (!t) throw InvariantViolation(std::string("bad timestamp in field ") + key);
  return *t;
}

std::optional<Timestamp> read_optional_time(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return read_time(j, key);
}

}  // namespace

std::string_view to_string(SiteCategory c) {
  return c == SiteCategory::kFakeNews ? "fake_news" : "fact_checking";
}

std::optional<SiteCategory> parse_category(std::string_view s) {
  if (s == "fake_news") return SiteCategory::kFakeNews;
  if (s == "fact_checking") return SiteCategory::kFactChecking;
  return std::nullopt;
}

std::string_view to_string(TweetType t) {
  switch (t) {
    case TweetType::kOriginal: return "original";
    case TweetType::kRetweet: return "retweet";
    case TweetType::kQuote: return "quote";
    case TweetType::kReply: return "reply";
  }
  return "original";
}

std::optional<TweetType> parse_tweet_type(std::string_view s) {
  if (s == "original") return TweetType::kOriginal;
  if (s == "retweet") return TweetType::kRetweet;
  if (s == "quote") return TweetType::kQuote;
  if (s == "reply") return TweetType::kReply;
  return std::nullopt;
}

void to_json(json& j, const Site& s) {
  j = json{{"domain", s.domain},
           {"category", to_string(s.category)},
           {"registered_at", format_iso8601(s.registered_at)}};
  j["rss_url"] = s.rss_url ? json(*s.rss_url) : json(nullptr);
}

void from_json(const json& j, Site& s) {
  s.domain = j.at("domain").get<std::string>();
  auto cat = parse_category(j.at("category").get<std::string>());
  if (!cat) throw InvariantViolation("unknown site category");
  s.category = *cat;
  auto rss = j.find("rss_url");
  s.rss_url = (rss == j.end() || rss->is_null()) ? std::nullopt
                                                 : std::optional<std::string>(rss->get<std::string>());
  s.registered_at = read_optional_time(j, "registered_at").value_or(Timestamp{});
}

void to_json(json& j, const ArticleRecord& a) {
  json revisions = json::array();
  for (const auto& r : a.revisions)
    revisions.push_back({{"updated_at", format_iso8601(r.updated_at)}, {"title", r.title}});
  j = json{{"canonical_url", a.canonical_url.full},
           {"site", a.site_domain},
           {"title", a.title},
           {"revisions", std::move(revisions)}};
  j["published_at"] = a.published_at ? json(format_iso8601(*a.published_at)) : json(nullptr);
}

void from_json(const json& j, ArticleRecord& a) {
  a.canonical_url = canonicalize(j.at("canonical_url").get<std::string>());
  a.site_domain = j.at("site").get<std::string>();
  a.title = j.at("title").get<std::string>();
  a.published_at = read_optional_time(j, "published_at");
  a.revisions.clear();
  for (const auto& r : j.at("revisions"))
    a.revisions.push_back({read_time(r, "updated_at"), r.at("title").get<std::string>()});
}

void to_json(json& j, const TweetRecord& t) {
  json matches = json::array();
  for (const auto& m : t.matches) matches.push_back({{"url", m.url.full}, {"site", m.site_domain}});
  j = json{{"id", t.id},
           {"created_at", format_iso8601(t.created_at)},
           {"user_id", t.user_id},
           {"type", to_string(t.type)},
           {"matches", std::move(matches)},
           {"seq", t.seq}};
}

void from_json(const json& j, TweetRecord& t) {
  t.id = j.at("id").get<std::string>();
  t.created_at = read_time(j, "created_at");
  t.user_id = j.at("user_id").get<std::string>();
  auto type = parse_tweet_type(j.at("type").get<std::string>());
  if (!type) throw InvariantViolation("unknown tweet type");
  t.type = *type;
  t.matches.clear();
  for (const auto& m : j.at("matches"))
    t.matches.push_back({canonicalize(m.at("url").get<std::string>()), m.at("site").get<std::string>()});
  t.seq = j.at("seq").get<std::uint64_t>();
}

void to_json(json& j, const SummaryStats& s) {
  j = json{{"n_sites", s.n_sites}, {"n_tweets", s.n_tweets}, {"n_users", s.n_users}, {"n_urls", s.n_urls}};
}

}  // namespace sharetrack
