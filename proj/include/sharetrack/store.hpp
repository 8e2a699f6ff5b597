#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sharetrack/records.hpp"

namespace sharetrack {

SHARETRACK_DEFINE_ERROR(StorageFailure);
SHARETRACK_DEFINE_ERROR(BadWindow);

struct StoreOptions {
  // Readers never write, truncate or lock; they can follow a live writer via
  // refresh().
  bool read_only = false;
  // fsync after every append. Off by default: appends still reach the OS
  // before put_* returns, so a process crash loses nothing.
  bool sync = false;
};

struct TweetQuery {
  std::optional<SiteCategory> category;
  std::optional<std::pair<Timestamp, Timestamp>> window;  // [t0, t1)
  std::vector<std::string> url_keywords;                  // AND, on any match
};

// What the last open() found on disk.
struct RecoveryReport {
  std::uint64_t sites = 0;
  std::uint64_t articles = 0;
  std::uint64_t tweets = 0;
  std::uint64_t discarded_bytes = 0;  // partial trailing lines dropped
};

// Append-only NDJSON journals (sites.ndjson, articles.ndjson, tweets.ndjson)
// in one directory, replayed into memory on open. manifest.json records the
// counts and last sequence number at the last compaction or clean close.
//
// Single writer per directory (enforced with an advisory lock), any number
// of readers. All methods are thread-safe.
class Store {
 public:
  explicit Store(std::filesystem::path dir, StoreOptions options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // Duplicate domain with the same category returns the stored site (an
  // rss_url given for a site that had none is recorded). A different
  // category is an InvariantViolation.
  Site put_site(Site site);
  // Appends the revisions not already present (keyed by updated_at) and
  // returns the merged record.
  ArticleRecord put_article(const ArticleRecord& article);
  // Assigns seq. A duplicate id is a no-op returning the stored record and
  // false.
  std::pair<TweetRecord, bool> put_tweet(TweetRecord tweet);

  std::optional<Site> find_site(const std::string& domain) const;
  std::vector<Site> sites() const;
  std::optional<ArticleRecord> find_article(const std::string& canonical_full) const;
  std::vector<ArticleRecord> articles() const;
  std::optional<TweetRecord> find_tweet(const std::string& id) const;

  // Ordered by (created_at, seq). With a category, each record's matches are
  // narrowed to that category's sites and records left without matches are
  // excluded.
  std::vector<TweetRecord> query_tweets(const TweetQuery& query = {}) const;
  SummaryStats summary_stats(std::optional<SiteCategory> category = std::nullopt) const;

  std::uint64_t tweet_count() const;
  std::uint64_t last_seq() const;
  RecoveryReport recovery() const;

  // Rewrites every journal from memory (one line per record) and updates
  // the manifest. Writer only.
  void compact();
  // Picks up records appended by another process since the last read.
  void refresh();

  const std::filesystem::path& dir() const { return dir_; }

 private:
  class Journal;

  void load_all();
  void apply_site(Site s);
  bool apply_article(const ArticleRecord& a);
  void apply_tweet(TweetRecord t);
  void write_manifest();
  void require_writer() const;
  void read_journal(Journal& j, bool from_start);

  std::filesystem::path dir_;
  StoreOptions options_;
  int lock_fd_ = -1;

  std::unique_ptr<Journal> sites_journal_;
  std::unique_ptr<Journal> articles_journal_;
  std::unique_ptr<Journal> tweets_journal_;

  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Site> sites_;
  std::vector<std::string> site_order_;
  std::unordered_map<std::string, ArticleRecord> articles_;
  std::vector<std::string> article_order_;
  std::vector<TweetRecord> tweets_;  // seq order
  std::unordered_map<std::string, std::size_t> tweet_index_;
  std::uint64_t last_seq_ = 0;
  RecoveryReport recovery_;
};

}  // namespace sharetrack
