#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sharetrack/error.hpp"
#include "sharetrack/time.hpp"
#include "sharetrack/urlnorm.hpp"

namespace sharetrack {

SHARETRACK_DEFINE_ERROR(InvariantViolation);

enum class SiteCategory { kFakeNews, kFactChecking };

std::string_view to_string(SiteCategory c);
// Accepts "fake_news" / "fact_checking".
std::optional<SiteCategory> parse_category(std::string_view s);

struct Site {
  std::string domain;  // canonical host
  SiteCategory category = SiteCategory::kFakeNews;
  std::optional<std::string> rss_url;
  Timestamp registered_at{};

  friend bool operator==(const Site&, const Site&) = default;
};

struct Revision {
  Timestamp updated_at{};
  std::string title;

  friend bool operator==(const Revision&, const Revision&) = default;
};

struct ArticleRecord {
  CanonicalUrl canonical_url;
  std::string site_domain;
  std::string title;
  std::optional<Timestamp> published_at;
  std::vector<Revision> revisions;  // ascending by updated_at

  friend bool operator==(const ArticleRecord&, const ArticleRecord&) = default;
};

enum class TweetType { kOriginal, kRetweet, kQuote, kReply };
inline constexpr int kTweetTypeCount = 4;

std::string_view to_string(TweetType t);
std::optional<TweetType> parse_tweet_type(std::string_view s);

struct UrlMatch {
  CanonicalUrl url;
  std::string site_domain;

  friend bool operator==(const UrlMatch&, const UrlMatch&) = default;
};

struct TweetRecord {
  std::string id;
  Timestamp created_at{};
  std::string user_id;
  TweetType type = TweetType::kOriginal;
  std::vector<UrlMatch> matches;
  std::uint64_t seq = 0;

  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

struct SummaryStats {
  std::uint64_t n_sites = 0;
  std::uint64_t n_tweets = 0;
  std::uint64_t n_users = 0;
  std::uint64_t n_urls = 0;

  friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

// nlohmann/json hooks; these define the journal and API wire formats.
void to_json(nlohmann::json& j, const Site& s);
void from_json(const nlohmann::json& j, Site& s);
void to_json(nlohmann::json& j, const ArticleRecord& a);
void from_json(const nlohmann::json& j, ArticleRecord& a);
void to_json(nlohmann::json& j, const TweetRecord& t);
void from_json(const nlohmann::json& j, TweetRecord& t);
void to_json(nlohmann::json& j, const SummaryStats& s);

}  // namespace sharetrack
