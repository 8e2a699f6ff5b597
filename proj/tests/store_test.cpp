#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sharetrack/store.hpp"
#include "sharetrack/stream.hpp"
#include "support/temp_dir.hpp"

namespace sharetrack {
namespace {

namespace fs = std::filesystem;
using namespace std::chrono_literals;

const Timestamp kT0{std::chrono::sys_days{std::chrono::year{2016} / 1 / 14}};

TweetRecord tweet(const std::string& id, const std::string& user, const std::string& url, const std::string& site,
                  Timestamp at = kT0, TweetType type = TweetType::kOriginal) {
  return {id, at, user, type, {{canonicalize(url), site}}, 0};
}

void add_sites(Store& s) {
  s.put_site({"snopes.com", SiteCategory::kFactChecking, {}, kT0});
  s.put_site({"beforeitsnews.com", SiteCategory::kFakeNews, {}, kT0});
}

TEST(Store, PutTweetIsIdempotentOnId) {
  testing::TempDir dir;
  Store s(dir.path());
  add_sites(s);
  const auto [first, inserted] = s.put_tweet(tweet("1", "u1", "snopes.com/a", "snopes.com"));
  EXPECT_TRUE(inserted);
  EXPECT_EQ(first.seq, 1u);
  const auto [second, again] = s.put_tweet(tweet("1", "u2", "snopes.com/b", "snopes.com"));
  EXPECT_FALSE(again);
  EXPECT_EQ(second, first);
  EXPECT_EQ(s.tweet_count(), 1u);
}

TEST(Store, TweetInvariants) {
  testing::TempDir dir;
  Store s(dir.path());
  add_sites(s);
  TweetRecord no_match{"9", kT0, "u", TweetType::kOriginal, {}, 0};
  EXPECT_THROW(s.put_tweet(no_match), InvariantViolation);
  EXPECT_THROW(s.put_tweet(tweet("8", "u", "cnn.com/x", "cnn.com")), InvariantViolation);
  EXPECT_THROW(s.put_tweet(tweet("7", "u", "cnn.com/x", "snopes.com")), InvariantViolation);
  EXPECT_THROW(s.put_tweet(tweet("", "u", "snopes.com/x", "snopes.com")), InvariantViolation);
  EXPECT_EQ(s.tweet_count(), 0u);
}

TEST(Store, SiteCategoryIsImmutable) {
  testing::TempDir dir;
  Store s(dir.path());
  add_sites(s);
  EXPECT_THROW(s.put_site({"snopes.com", SiteCategory::kFakeNews, {}, kT0}), InvariantViolation);
  const auto same = s.put_site({"snopes.com", SiteCategory::kFactChecking, "http://snopes.com/feed", kT0 + 1h});
  EXPECT_EQ(same.registered_at, kT0);
  EXPECT_EQ(same.rss_url, "http://snopes.com/feed");
  EXPECT_THROW(s.put_site({"WWW.Snopes.com", SiteCategory::kFactChecking, {}, kT0}), InvariantViolation);
  EXPECT_EQ(s.sites().size(), 2u);
}

TEST(Store, ArticleRevisionsAppendInOrder) {
  testing::TempDir dir;
  Store s(dir.path());
  add_sites(s);
  ArticleRecord a{canonicalize("snopes.com/a"), "snopes.com", "A", kT0, {{kT0 + 2h, "A v2"}}};
  EXPECT_EQ(s.put_article(a).revisions.size(), 1u);
  a.revisions = {{kT0 + 1h, "A v1"}};
  auto merged = s.put_article(a);
  ASSERT_EQ(merged.revisions.size(), 2u);
  EXPECT_LT(merged.revisions[0].updated_at, merged.revisions[1].updated_at);
  a.revisions = {{kT0 + 1h, "A v1 again"}};
  EXPECT_EQ(s.put_article(a).revisions.size(), 2u);
  ArticleRecord wrong_site{canonicalize("cnn.com/a"), "snopes.com", "x", {}, {{kT0, "x"}}};
  EXPECT_THROW(s.put_article(wrong_site), InvariantViolation);
}

// Ten tweets by three users over four URLs on two sites. The recount below
// reads the raw lines with a JSON parser only.
const char* kTenTweets = R"({"id":"1","created_at":"2016-01-14T10:00:00Z","user_id":"u1","urls":["http://snopes.com/2016/01/14/alan-rickman-dies-at-69/"]}
{"id":"2","created_at":"2016-01-14T11:00:00Z","user_id":"u2","urls":["https://www.snopes.com/2016/01/14/alan-rickman-dies-at-69"]}
{"id":"3","created_at":"2016-01-14T12:00:00Z","user_id":"u3","urls":["http://snopes.com/alan-rickman-potter-meme/"]}
{"id":"4","created_at":"2016-01-14T09:00:00Z","user_id":"u1","urls":["http://age-69.beforeitsnews.com/alternative/rickman"]}
{"id":"5","created_at":"2016-01-14T09:30:00Z","user_id":"u2","urls":["http://beforeitsnews.com/celebrities/bowie?x=1"]}
{"id":"6","created_at":"2016-01-14T13:00:00Z","user_id":"u3","urls":["http://beforeitsnews.com/celebrities/bowie"]}
{"id":"7","created_at":"2016-01-14T14:00:00Z","user_id":"u1","urls":["http://snopes.com/alan-rickman-potter-meme"]}
{"id":"8","created_at":"2016-01-14T15:00:00Z","user_id":"u1","urls":["http://beforeitsnews.com/celebrities/bowie#c"]}
{"id":"9","created_at":"2016-01-14T16:00:00Z","user_id":"u2","urls":["http://age-69.beforeitsnews.com/alternative/rickman/"]}
{"id":"10","created_at":"2016-01-14T08:00:00Z","user_id":"u3","urls":["http://snopes.com/alan-rickman-potter-meme"]}
)";

// Canonical keys of the fixture URLs, written out by hand.
const std::map<std::string, std::pair<std::string, SiteCategory>> kFixtureKeys = {
    {"1", {"snopes.com/2016/01/14/alan-rickman-dies-at-69", SiteCategory::kFactChecking}},
    {"2", {"snopes.com/2016/01/14/alan-rickman-dies-at-69", SiteCategory::kFactChecking}},
    {"3", {"snopes.com/alan-rickman-potter-meme", SiteCategory::kFactChecking}},
    {"4", {"age-69.beforeitsnews.com/alternative/rickman", SiteCategory::kFakeNews}},
    {"5", {"beforeitsnews.com/celebrities/bowie", SiteCategory::kFakeNews}},
    {"6", {"beforeitsnews.com/celebrities/bowie", SiteCategory::kFakeNews}},
    {"7", {"snopes.com/alan-rickman-potter-meme", SiteCategory::kFactChecking}},
    {"8", {"beforeitsnews.com/celebrities/bowie", SiteCategory::kFakeNews}},
    {"9", {"age-69.beforeitsnews.com/alternative/rickman", SiteCategory::kFakeNews}},
    {"10", {"snopes.com/alan-rickman-potter-meme", SiteCategory::kFactChecking}},
};

SummaryStats recount(std::optional<SiteCategory> category) {
  std::set<std::string> ids, users, urls;
  std::istringstream in(kTenTweets);
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    const auto& [key, cat] = kFixtureKeys.at(j["id"]);
    if (category && cat != *category) continue;
    ids.insert(j["id"]);
    users.insert(j["user_id"]);
    urls.insert(key);
  }
  return {category ? 1u : 2u, ids.size(), users.size(), urls.size()};
}

class FixtureStore : public ::testing::Test {
 protected:
  void SetUp() override {
    store = std::make_unique<Store>(dir.path());
    add_sites(*store);
    std::istringstream in(kTenTweets);
    const auto sites = store->sites();
    ingest(in, sites, *store);
  }
  testing::TempDir dir;
  std::unique_ptr<Store> store;
};

TEST_F(FixtureStore, SummaryStatsMatchesRecount) {
  EXPECT_EQ(store->summary_stats(), (SummaryStats{2, 10, 3, 4}));
  EXPECT_EQ(store->summary_stats(), recount(std::nullopt));
  EXPECT_EQ(store->summary_stats(SiteCategory::kFakeNews), recount(SiteCategory::kFakeNews));
  EXPECT_EQ(store->summary_stats(SiteCategory::kFactChecking), recount(SiteCategory::kFactChecking));
}

TEST_F(FixtureStore, KeywordQueryByCategory) {
  const auto hits = store->query_tweets({SiteCategory::kFactChecking, std::nullopt, {"alan", "rickman"}});
  std::vector<std::string> ids;
  for (const auto& t : hits) ids.push_back(t.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"10", "1", "2", "3", "7"}));
  for (const auto& t : hits) EXPECT_TRUE(t.matches[0].url.full.starts_with("snopes.com"));
  const auto fake = store->query_tweets({SiteCategory::kFakeNews, std::nullopt, {"rickman"}});
  EXPECT_EQ(fake.size(), 2u);
}

TEST_F(FixtureStore, WindowQueries) {
  const auto in_window = store->query_tweets({std::nullopt, std::make_pair(kT0 + 9h, kT0 + 12h), {}});
  std::vector<std::string> ids;
  for (const auto& t : in_window) ids.push_back(t.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"4", "5", "1", "2"}));
  EXPECT_THROW(store->query_tweets({std::nullopt, std::make_pair(kT0, kT0), {}}), BadWindow);
  EXPECT_THROW(store->query_tweets({std::nullopt, std::make_pair(kT0 + 1h, kT0), {}}), BadWindow);
}

TEST_F(FixtureStore, ReopenRestoresEverything) {
  const auto before = store->query_tweets();
  const auto stats = store->summary_stats();
  store.reset();
  Store reopened(dir.path());
  EXPECT_EQ(reopened.query_tweets(), before);
  EXPECT_EQ(reopened.summary_stats(), stats);
  EXPECT_EQ(reopened.last_seq(), 10u);
  const auto [t, ok] = reopened.put_tweet(tweet("11", "u9", "snopes.com/new", "snopes.com"));
  EXPECT_TRUE(ok);
  EXPECT_EQ(t.seq, 11u);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(Store, EmptyStore) {
  testing::TempDir dir;
  Store s(dir.path());
  EXPECT_TRUE(s.query_tweets().empty());
  EXPECT_EQ(s.summary_stats(), SummaryStats{});
}

TEST(Store, SingleWriterManyReaders) {
  testing::TempDir dir;
  Store writer(dir.path());
  EXPECT_THROW(Store second(dir.path()), StorageFailure);
  Store reader(dir.path(), {.read_only = true});
  EXPECT_THROW(reader.put_site({"x.com", SiteCategory::kFakeNews, {}, kT0}), StorageFailure);
}

TEST(Store, ReaderFollowsWriterWithRefresh) {
  testing::TempDir dir;
  Store writer(dir.path());
  add_sites(writer);
  Store reader(dir.path(), {.read_only = true});
  EXPECT_EQ(reader.sites().size(), 2u);
  writer.put_tweet(tweet("1", "u1", "snopes.com/a", "snopes.com"));
  EXPECT_EQ(reader.tweet_count(), 0u);
  reader.refresh();
  EXPECT_EQ(reader.tweet_count(), 1u);
  writer.put_tweet(tweet("2", "u1", "snopes.com/b", "snopes.com"));
  writer.compact();
  writer.put_tweet(tweet("3", "u2", "snopes.com/c", "snopes.com"));
  reader.refresh();
  EXPECT_EQ(reader.summary_stats(), writer.summary_stats());
}


TEST(Store, CompactKeepsStateAndShrinksJournals) {
  testing::TempDir dir;
  SummaryStats stats;
  std::vector<ArticleRecord> articles;
  {
    Store s(dir.path());
    add_sites(s);
    for (int i = 0; i < 20; ++i) {
      ArticleRecord a{canonicalize("snopes.com/a"), "snopes.com", "A", kT0, {{kT0 + std::chrono::hours{i}, "A"}}};
      s.put_article(a);
    }
    s.put_site({"snopes.com", SiteCategory::kFactChecking, "http://snopes.com/rss", kT0});
    for (int i = 0; i < 30; ++i) s.put_tweet(tweet(std::to_string(i), "u" + std::to_string(i % 4), "snopes.com/a", "snopes.com"));
    const auto before = file_size(dir / "articles.ndjson") + file_size(dir / "sites.ndjson");
    stats = s.summary_stats();
    articles = s.articles();
    s.compact();
    EXPECT_LT(file_size(dir / "articles.ndjson") + file_size(dir / "sites.ndjson"), before);
    EXPECT_EQ(s.summary_stats(), stats);
  }
  Store again(dir.path());
  EXPECT_EQ(again.summary_stats(), stats);
  EXPECT_EQ(again.articles(), articles);
  EXPECT_EQ(again.find_site("snopes.com")->rss_url, "http://snopes.com/rss");
}

TEST(Store, PartialTailIsDiscardedAndTruncated) {
  testing::TempDir dir;
  {
    Store s(dir.path());
    add_sites(s);
    s.put_tweet(tweet("1", "u1", "snopes.com/a", "snopes.com"));
  }
  {
    std::ofstream f(dir / "tweets.ndjson", std::ios::app);
    f << R"({"id":"2","created_at":"2016-01)";
  }
  const auto with_tail = file_size(dir / "tweets.ndjson");
  {
    Store reader(dir.path(), {.read_only = true});
    EXPECT_EQ(reader.tweet_count(), 1u);
    EXPECT_EQ(file_size(dir / "tweets.ndjson"), with_tail);
  }
  Store s(dir.path());
  EXPECT_EQ(s.tweet_count(), 1u);
  EXPECT_GT(s.recovery().discarded_bytes, 0u);
  EXPECT_LT(file_size(dir / "tweets.ndjson"), with_tail);
  s.put_tweet(tweet("2", "u1", "snopes.com/b", "snopes.com"));
  EXPECT_EQ(s.tweet_count(), 2u);
}

TEST(Store, CorruptCompleteLineIsAFailure) {
  testing::TempDir dir;
  {
    Store s(dir.path());
    add_sites(s);
  }
  {
    std::ofstream f(dir / "tweets.ndjson", std::ios::app);
    f << "{this is not json}\n";
  }
  EXPECT_THROW(Store s(dir.path()), StorageFailure);
}

TEST(StoreProperty, TruncationAtAnyOffsetRecoversAPrefix) {
  testing::TempDir dir;
  std::vector<TweetRecord> all;
  {
    Store s(dir.path());
    add_sites(s);
    for (int i = 0; i < 40; ++i)
      all.push_back(s.put_tweet(tweet(std::to_string(i), "u" + std::to_string(i % 5), "snopes.com/p" + std::to_string(i % 7),
                                      "snopes.com", kT0 + std::chrono::minutes{i}))
                        .first);
  }
  std::string journal;
  {
    std::ifstream f(dir / "tweets.ndjson", std::ios::binary);
    journal.assign(std::istreambuf_iterator<char>(f), {});
  }
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cut = static_cast<std::size_t>(rng() % (journal.size() + 1));
    {
      std::ofstream f(dir / "tweets.ndjson", std::ios::binary | std::ios::trunc);
      f.write(journal.data(), static_cast<std::streamsize>(cut));
    }
    const auto complete = static_cast<std::size_t>(std::count(journal.begin(), journal.begin() + static_cast<std::ptrdiff_t>(cut), '\n'));
    Store s(dir.path());
    const auto got = s.query_tweets();
    ASSERT_EQ(got.size(), complete) << "cut at " << cut;
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], all[i]);
  }
}

TEST(Store, ConcurrentReadersDuringWrites) {
  testing::TempDir dir;
  Store s(dir.path());
  add_sites(s);
  std::atomic<bool> done{false};
  std::atomic<int> violations{0};
  std::vector<std::jthread> readers;
  for (int r = 0; r < 4; ++r)
    readers.emplace_back([&] {
      std::uint64_t last = 0;
      while (!done) {
        const auto st = s.summary_stats();
        const auto q = s.query_tweets();
        if (st.n_tweets < last || st.n_users > st.n_tweets) ++violations;
        for (std::size_t i = 1; i < q.size(); ++i)
          if (q[i - 1].created_at > q[i].created_at) ++violations;
        last = st.n_tweets;
      }
    });
  for (int i = 0; i < 500; ++i) s.put_tweet(tweet(std::to_string(i), "u" + std::to_string(i % 17), "snopes.com/x", "snopes.com", kT0 + std::chrono::seconds{i * 7 % 311}));
  done = true;
  readers.clear();
  EXPECT_EQ(violations, 0);
  EXPECT_EQ(s.tweet_count(), 500u);
}

}  // namespace
}  // namespace sharetrack
