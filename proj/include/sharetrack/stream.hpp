#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sharetrack/error.hpp"
#include "sharetrack/records.hpp"

namespace sharetrack {

class Store;

SHARETRACK_DEFINE_ERROR(MalformedEvent);
SHARETRACK_DEFINE_ERROR(SourceUnavailable);

struct RawTweet {
  std::string id;
  Timestamp created_at{};
  std::string user_id;
  std::string text;
  std::vector<std::string> urls;
  std::optional<std::string> retweeted_id;
  std::optional<std::string> quoted_id;
  std::optional<std::string> replied_id;
};

// One NDJSON event. Ids may be JSON strings or integers; null or empty
// optional ids count as absent.
RawTweet parse_tweet_line(std::string_view line);

// retweet > quote > reply > original
TweetType classify(const RawTweet& t);

// Domain lookup for the filter: walks the host's dot-suffixes, so the cost
// per URL is independent of the number of monitored sites.
class SiteMatcher {
 public:
  explicit SiteMatcher(std::span<const Site> sites);

  // Every monitored site the URL belongs to, most specific first.
  std::vector<const Site*> match(const CanonicalUrl& url) const;

 private:
  std::unordered_map<std::string, Site> by_domain_;
};

// Canonical (url, site) pairs for the tweet's URLs; duplicates collapse and
// URLs that cannot be canonicalized are skipped. Empty means "drop".
std::vector<UrlMatch> filter_tweet(const RawTweet& t, const SiteMatcher& sites);
std::vector<UrlMatch> filter_tweet(const RawTweet& t, std::span<const Site> sites);

struct IngestReport {
  std::uint64_t read = 0;
  std::uint64_t accepted = 0;
  std::uint64_t dropped_no_match = 0;
  std::uint64_t rejected_malformed = 0;
  std::uint64_t inserted = 0;  // accepted tweets not already in the store
  bool partial = false;        // aborted by a store error
};

// Thrown when the store fails mid-ingest; carries the counts so far.
class IngestAborted : public Error {
 public:
  IngestAborted(const std::string& what, IngestReport report) : Error(what), report_(report) {}
  const IngestReport& report() const { return report_; }

 private:
  IngestReport report_;
};

// Registers `sites` in the store (a no-op for known ones), then filters the
// source line by line. Blank lines are ignored and not counted. read == accepted +
// dropped_no_match + rejected_malformed always holds.
IngestReport ingest(std::istream& source, std::span<const Site> sites, Store& store);
// "-" reads standard input.
IngestReport ingest_file(const std::filesystem::path& path, std::span<const Site> sites, Store& store);

// Parses the site registration file: one {"domain", "category", "rss_url"?}
// object per line. Domains are canonicalized.
std::vector<Site> parse_sites_file(std::istream& in, Timestamp registered_at);

}  // namespace sharetrack
