#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sharetrack/clock.hpp"
#include "sharetrack/error.hpp"
#include "sharetrack/fetch.hpp"
#include "sharetrack/records.hpp"

namespace sharetrack {

class Store;

SHARETRACK_DEFINE_ERROR(RootUnreachable);
SHARETRACK_DEFINE_ERROR(FeedUnavailable);
SHARETRACK_DEFINE_ERROR(InvalidConfig);

struct CrawlConfig {
  int max_depth = 10;
  int max_pages = 10000;
  std::chrono::milliseconds per_host_delay{1000};
  int parallel_fetches = 4;  // sites crawled concurrently by deep_crawl_all
  std::chrono::milliseconds light_interval{std::chrono::hours{2}};
  std::string user_agent = "sharetrack/1.0";
  bool honor_robots = true;

  // Throws InvalidConfig unless every limit is positive.
  void validate() const;
};

struct CrawlFailure {
  std::string url;
  std::string reason;
};

struct DeepCrawlResult {
  std::vector<ArticleRecord> articles;
  std::vector<std::string> visited;  // canonical URLs in fetch order
  std::vector<CrawlFailure> failures;
  std::optional<std::string> discovered_feed;
};

// Depth-first walk of a site's link graph from http://<domain>/. Links are
// followed only when their canonical form belongs to the site, each
// canonical URL is fetched at most once, and robots.txt prefix rules are
// honoured. The traversal order equals the recursive pre-order DFS that
// visits a page's links in document order.
DeepCrawlResult deep_crawl(const Site& site, PoliteFetcher& fetcher, const CrawlConfig& config);

// Runs deep_crawl for several sites, up to config.parallel_fetches at once.
// Result i belongs to sites[i]; a site whose root is unreachable gets a
// result with a single failure entry.
std::vector<DeepCrawlResult> deep_crawl_all(std::span<const Site> sites, PoliteFetcher& fetcher,
                                            const CrawlConfig& config);

struct LightCrawlResult {
  std::vector<ArticleRecord> changed;  // new articles and new revisions, as stored
  std::size_t items_seen = 0;
  std::vector<CrawlFailure> failures;
};

// Fetches the site's feed and stores every item that is new or carries an
// unseen revision timestamp. All items are queued before any article page
// is fetched; article pages only refine title and canonical URL.
LightCrawlResult light_crawl(const Site& site, PoliteFetcher& fetcher, Store& store);

}  // namespace sharetrack
