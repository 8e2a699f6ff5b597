#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <json.hpp>

#include "sharetrack/store.hpp"
#include "sharetrack/stream.hpp"
#include "support/temp_dir.hpp"

namespace sharetrack {
namespace {

std::vector<Site> monitored() {
  return {{"beforeitsnews.com", SiteCategory::kFakeNews, {}, {}},
          {"infowars.com", SiteCategory::kFakeNews, {}, {}},
          {"snopes.com", SiteCategory::kFactChecking, {}, {}}};
}

TEST(ParseTweetLine, DirectMapping) {
  const auto t = parse_tweet_line(
      R"({"id":"1","created_at":"2015-10-14T00:00:00Z","user_id":"u1","text":"","urls":["http://snopes.com/a"]})");
  EXPECT_EQ(t.id, "1");
  EXPECT_EQ(t.user_id, "u1");
  EXPECT_EQ(t.urls, std::vector<std::string>{"http://snopes.com/a"});
  EXPECT_EQ(t.created_at, Timestamp{std::chrono::sys_days{std::chrono::year{2015} / 10 / 14}});
  EXPECT_FALSE(t.retweeted_id || t.quoted_id || t.replied_id);
}

TEST(ParseTweetLine, RequiredFields) {
  EXPECT_THROW(parse_tweet_line(R"({"id":"1","created_at":"2015-10-14T00:00:00Z","urls":[]})"), MalformedEvent);
  EXPECT_THROW(parse_tweet_line(R"({"user_id":"u","created_at":"2015-10-14T00:00:00Z"})"), MalformedEvent);
  EXPECT_THROW(parse_tweet_line(R"({"id":"1","user_id":"u","created_at":"yesterday"})"), MalformedEvent);
  EXPECT_THROW(parse_tweet_line(R"({"id":"","user_id":"u","created_at":"2015-10-14T00:00:00Z"})"), MalformedEvent);
  EXPECT_THROW(parse_tweet_line("{not json"), MalformedEvent);
  EXPECT_THROW(parse_tweet_line("[1,2]"), MalformedEvent);
  EXPECT_THROW(parse_tweet_line(R"({"id":"1","user_id":"u","created_at":"2015-10-14T00:00:00Z","urls":"x"})"),
               MalformedEvent);
}

TEST(ParseTweetLine, NumericIdsAndNullOptionals) {
  const auto t = parse_tweet_line(
      R"({"id":42,"created_at":"2015-10-14T00:00:00Z","user_id":7,"retweeted_id":null,"quoted_id":"","replied_id":9})");
  EXPECT_EQ(t.id, "42");
  EXPECT_EQ(t.user_id, "7");
  EXPECT_FALSE(t.retweeted_id);
  EXPECT_FALSE(t.quoted_id);
  EXPECT_EQ(t.replied_id, "9");
  EXPECT_TRUE(t.urls.empty());
}

TEST(Classify, Precedence) {
  RawTweet t;
  EXPECT_EQ(classify(t), TweetType::kOriginal);
  t.quoted_id = "5";
  EXPECT_EQ(classify(t), TweetType::kQuote);
  t.replied_id = "8";
  EXPECT_EQ(classify(t), TweetType::kQuote);
  t.quoted_id.reset();
  EXPECT_EQ(classify(t), TweetType::kReply);
  t.retweeted_id = "9";
  EXPECT_EQ(classify(t), TweetType::kRetweet);
  const auto all = parse_tweet_line(
      R"({"id":"1","created_at":"2015-10-14T00:00:00Z","user_id":"u","retweeted_id":"1","quoted_id":"2","replied_id":"3"})");
  EXPECT_EQ(classify(all), TweetType::kRetweet);
}

TEST(FilterTweet, Examples) {
  const auto sites = monitored();
  RawTweet t;
  t.urls = {"http://age-69.beforeitsnews.com/x"};
  const auto m = filter_tweet(t, sites);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].site_domain, "beforeitsnews.com");
  EXPECT_EQ(m[0].url.full, "age-69.beforeitsnews.com/x");

  t.urls = {"http://cnn.com/x"};
  EXPECT_TRUE(filter_tweet(t, sites).empty());

  t.urls = {"http://snopes.com/a?u=1", "http://snopes.com/a#f"};
  EXPECT_EQ(filter_tweet(t, sites).size(), 1u);

  t.urls = {"http://?bad", "https://t.co/abc", "https://www.infowars.com/story", "http://notsnopes.com/"};
  const auto mixed = filter_tweet(t, sites);
  ASSERT_EQ(mixed.size(), 1u);
  EXPECT_EQ(mixed[0].url.full, "infowars.com/story");
}

TEST(FilterTweet, MostSpecificSiteFirst) {
  std::vector<Site> sites{{"example.com", SiteCategory::kFakeNews, {}, {}},
                          {"news.example.com", SiteCategory::kFactChecking, {}, {}}};
  SiteMatcher matcher(sites);
  const auto hits = matcher.match(canonicalize("http://a.news.example.com/x"));
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0]->domain, "news.example.com");
}

std::string line(const std::string& id, const std::string& user, const std::string& url,
                 const std::string& extra = "") {
  return R"({"id":")" + id + R"(","created_at":"2015-10-14T0)" + std::to_string(std::stoi(id) % 10) +
         R"(:00:00Z","user_id":")" + user + R"(","text":"t","urls":[")" + url + "\"]" + extra + "}";
}

TEST(Ingest, CountingContract) {
  testing::TempDir dir;
  Store store(dir.path());
  const auto sites = monitored();
  std::string src;
  for (int i = 0; i < 7; ++i) src += line(std::to_string(i), "u" + std::to_string(i % 3), "http://snopes.com/p" + std::to_string(i)) + "\n";
  src += line("7", "u1", "http://cnn.com/a") + "\n";
  src += line("8", "u1", "http://bbc.co.uk/a") + "\n";
  src += "{\"id\":\"9\"\n";
  std::istringstream in(src);
  const auto r = ingest(in, sites, store);
  EXPECT_EQ(r.read, 10u);
  EXPECT_EQ(r.accepted, 7u);
  EXPECT_EQ(r.dropped_no_match, 2u);
  EXPECT_EQ(r.rejected_malformed, 1u);
  EXPECT_EQ(r.inserted, 7u);
  EXPECT_FALSE(r.partial);
  EXPECT_EQ(store.tweet_count(), 7u);

  std::istringstream again(src);
  const auto r2 = ingest(again, sites, store);
  EXPECT_EQ(r2.accepted, 7u);
  EXPECT_EQ(r2.inserted, 0u);
  EXPECT_EQ(store.tweet_count(), 7u);
}

TEST(Ingest, EmptySourceAndBlankLines) {
  testing::TempDir dir;
  Store store(dir.path());
  std::istringstream empty("");
  const auto r = ingest(empty, monitored(), store);
  EXPECT_EQ(r.read + r.accepted + r.dropped_no_match + r.rejected_malformed, 0u);
  std::istringstream blanks("\n\n   \n");
  EXPECT_EQ(ingest(blanks, monitored(), store).read, 0u);
}

TEST(Ingest, StoredRecordsCarryTypeAndMatches) {
  testing::TempDir dir;
  Store store(dir.path());
  std::istringstream in(line("1", "u1", "https://www.snopes.com/2016/01/14/alan-rickman-dies-at-69/",
                             R"(,"retweeted_id":"0")") +
                        "\n");
  ingest(in, monitored(), store);
  const auto t = store.find_tweet("1");
  ASSERT_TRUE(t);
  EXPECT_EQ(t->type, TweetType::kRetweet);
  ASSERT_EQ(t->matches.size(), 1u);
  EXPECT_EQ(t->matches[0].url.full, "snopes.com/2016/01/14/alan-rickman-dies-at-69");
  EXPECT_EQ(t->matches[0].site_domain, "snopes.com");
}

TEST(Ingest, MissingFileIsSourceUnavailable) {
  testing::TempDir dir;
  Store store(dir.path());
  EXPECT_THROW(ingest_file(dir / "nope.ndjson", monitored(), store), SourceUnavailable);
}

TEST(IngestProperty, ConservationAndFilterSoundness) {
  std::mt19937_64 rng(11);
  const auto sites = monitored();
  const std::vector<std::string> hosts{"snopes.com", "www.infowars.com", "m.beforeitsnews.com", "x.beforeitsnews.com",
                                       "cnn.com", "notsnopes.com", "t.co"};
  for (int trial = 0; trial < 20; ++trial) {
    testing::TempDir dir;
    Store store(dir.path());
    std::string src;
    const int n = 50 + static_cast<int>(rng() % 200);
    for (int i = 0; i < n; ++i) {
      switch (rng() % 8) {
        case 0: src += "garbage " + std::to_string(i) + "\n"; break;
        case 1: src += R"({"id":"x","user_id":"u"})" "\n"; break;
        default: {
          nlohmann::json j{{"id", std::to_string(rng() % 100)}, {"created_at", "2016-01-14T10:00:00Z"},
                           {"user_id", "u" + std::to_string(rng() % 9)}, {"text", ""}};
          nlohmann::json urls = nlohmann::json::array();
          for (std::size_t k = 0; k < rng() % 3; ++k) urls.push_back("http://" + hosts[rng() % hosts.size()] + "/p" + std::to_string(rng() % 5));
          j["urls"] = urls;
          src += j.dump() + "\n";
        }
      }
    }
    std::istringstream in(src);
    const auto r = ingest(in, sites, store);
    EXPECT_EQ(r.read, r.accepted + r.dropped_no_match + r.rejected_malformed);
    EXPECT_EQ(r.read, static_cast<std::uint64_t>(n));
    EXPECT_LE(r.inserted, r.accepted);
    EXPECT_EQ(store.tweet_count(), r.inserted);
    for (const auto& t : store.query_tweets()) {
      ASSERT_FALSE(t.matches.empty());
      for (const auto& m : t.matches) {
        EXPECT_TRUE(store.find_site(m.site_domain));
        EXPECT_TRUE(matches_site(m.url, m.site_domain));
      }
    }
  }
}

TEST(SitesFile, ParsesAndCanonicalizes) {
  std::istringstream in(R"({"domain":"WWW.Snopes.com","category":"fact_checking","rss_url":"http://snopes.com/feed"}
{"domain":"infowars.com","category":"fake_news"}
)");
  const auto sites = parse_sites_file(in, Timestamp{});
  ASSERT_EQ(sites.size(), 2u);
  EXPECT_EQ(sites[0].domain, "snopes.com");
  EXPECT_EQ(sites[0].category, SiteCategory::kFactChecking);
  EXPECT_EQ(sites[0].rss_url, "http://snopes.com/feed");
  EXPECT_FALSE(sites[1].rss_url);
  std::istringstream bad(R"({"domain":"x.com","category":"satire"})");
  EXPECT_ANY_THROW(parse_sites_file(bad, Timestamp{}));
}

}  // namespace
}  // namespace sharetrack
