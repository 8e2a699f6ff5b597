#include "sharetrack/crawler.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "sharetrack/feed.hpp"
#include "sharetrack/html.hpp"
#include "sharetrack/robots.hpp"
#include "sharetrack/store.hpp"
#include "sharetrack/urlnorm.hpp"

namespace sharetrack {
namespace {

std::optional<CanonicalUrl> try_canonicalize(std::string_view url) {
  try {
    return canonicalize(url);
  } catch (const MalformedUrl&) {
    return std::nullopt;
  }
}

bool looks_like_html(const FetchResponse& r) {
  if (r.content_type.empty()) return true;
  const std::string ct = ascii_lower(r.content_type);
  return ct.find("html") != std::string::npos;
}

RobotsRules load_robots(const std::string& origin, PoliteFetcher& fetcher, const CrawlConfig& config) {
  if (!config.honor_robots) return {};
  try {
    const auto res = fetcher.fetch(origin + "/robots.txt");
    if (res.ok()) return RobotsRules::parse(res.body, config.user_agent);
  } catch (const FetchError& e) {
    spdlog::debug("robots.txt unavailable for {}: {}", origin, e.what());
  }
  return {};
}

}  // namespace

void CrawlConfig::validate() const {
  if (max_depth <= 0 || max_pages <= 0 || per_host_delay.count() <= 0 || parallel_fetches <= 0 ||
      light_interval.count() <= 0)
    throw InvalidConfig("crawl limits must all be positive");
}

DeepCrawlResult deep_crawl(const Site& site, PoliteFetcher& fetcher, const CrawlConfig& config) {
  config.validate();
  const std::string origin = "http://" + site.domain;
  const std::string root = origin + "/";
  if (auto c = try_canonicalize(root); !c || !matches_site(*c, site.domain))
    throw InvalidConfig("site domain " + site.domain + " does not name a crawlable host");
  const RobotsRules robots = load_robots(origin, fetcher, config);

  struct Frame {
    std::string url;
    int depth;
  };
  DeepCrawlResult result;
  std::unordered_set<std::string> visited;
  std::unordered_set<std::string> recorded;
  std::vector<Frame> stack{{root, 0}};
  int fetched = 0;
  bool root_done = false;

  while (!stack.empty() && fetched < config.max_pages) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const auto canon = try_canonicalize(frame.url);
    if (!canon || visited.contains(canon->full) || !matches_site(*canon, site.domain)) continue;
    visited.insert(canon->full);
    const bool is_root = !root_done;
    root_done = true;
    if (!robots.allowed(url_path_and_query(frame.url))) {
      if (is_root) throw RootUnreachable("site root " + root + " is disallowed by robots.txt");
      continue;
    }

    const std::string target = strip_fragment(frame.url);
    FetchResponse res;
    ++fetched;
    try {
      res = fetcher.fetch(target);
    } catch (const FetchError& e) {
      if (is_root) throw RootUnreachable("site root " + root + " unreachable: " + e.what());
      result.failures.push_back({target, e.what()});
      continue;
    }
    if (!res.ok()) {
      const std::string reason = "HTTP " + std::to_string(res.status);
      if (is_root) throw RootUnreachable("site root " + root + " returned " + reason);
      result.failures.push_back({target, reason});
      continue;
    }
    result.visited.push_back(canon->full);
    if (!looks_like_html(res)) continue;

    const PageLinks page = extract_links(res.body, target);
    if (is_root && !page.feed_urls.empty()) result.discovered_feed = page.feed_urls.front();

    CanonicalUrl key = *canon;
    if (page.canonical_hint) {
      if (auto hint = try_canonicalize(*page.canonical_hint); hint && matches_site(*hint, site.domain)) {
        key = *hint;
        visited.insert(hint->full);
      }
    }
    if (page.title && recorded.insert(key.full).second) {
      ArticleRecord article;
      article.canonical_url = key;
      article.site_domain = site.domain;
      article.title = *page.title;
      article.revisions.push_back({fetcher.clock().now_seconds(), *page.title});
      result.articles.push_back(std::move(article));
    }

    if (frame.depth >= config.max_depth) continue;
    for (auto it = page.links.rbegin(); it != page.links.rend(); ++it) {
      const auto link = try_canonicalize(*it);
      if (!link || visited.contains(link->full) || !matches_site(*link, site.domain)) continue;
      stack.push_back({*it, frame.depth + 1});
    }
  }
  return result;
}

std::vector<DeepCrawlResult> deep_crawl_all(std::span<const Site> sites, PoliteFetcher& fetcher,
                                            const CrawlConfig& config) {
  config.validate();
  std::vector<DeepCrawlResult> results(sites.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sites.size(); i = next++) {
      try {
        results[i] = deep_crawl(sites[i], fetcher, config);
      } catch (const std::exception& e) {
        results[i].failures.push_back({"http://" + sites[i].domain + "/", e.what()});
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.parallel_fetches), sites.size());
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  pool.clear();  // joins
  return results;
}

LightCrawlResult light_crawl(const Site& site, PoliteFetcher& fetcher, Store& store) {
  if (!site.rss_url) throw FeedUnavailable("site " + site.domain + " has no feed URL");
  const std::string& feed_url = *site.rss_url;
  FetchResponse res;
  try {
    res = fetcher.fetch(feed_url);
  } catch (const FetchError& e) {
    throw FeedUnavailable("feed " + feed_url + " unavailable: " + e.what());
  }
  if (!res.ok()) throw FeedUnavailable("feed " + feed_url + " returned HTTP " + std::to_string(res.status));
  const std::vector<FeedItem> items = parse_feed(res.body);

  LightCrawlResult result;
  result.items_seen = items.size();

  auto already_stored = [&](const std::string& key, const std::optional<Timestamp>& revision_time) {
    const auto existing = store.find_article(key);
    if (!existing) return false;
    if (!revision_time) return true;
    return std::any_of(existing->revisions.begin(), existing->revisions.end(),
                       [&](const Revision& r) { return r.updated_at == *revision_time; });
  };

  struct Pending {
    const FeedItem* item;
    std::string link;
    CanonicalUrl canon;
    std::optional<Timestamp> revision_time;
  };
  // level 1: every feed item is queued before any article page is fetched
  std::vector<Pending> queue;
  std::unordered_set<std::string> queued;
  for (const FeedItem& item : items) {
    const std::string link = resolve_url(feed_url, item.link);
    const auto canon = try_canonicalize(link);
    if (!canon || !matches_site(*canon, site.domain)) continue;
    const auto revision_time = item.updated_at ? item.updated_at : item.published_at;
    const std::string dedup_key =
        canon->full + "@" + (revision_time ? format_iso8601(*revision_time) : std::string("-"));
    if (already_stored(canon->full, revision_time) || !queued.insert(dedup_key).second) continue;
    queue.push_back({&item, link, *canon, revision_time});
  }

  // level 2: article pages
  for (const Pending& p : queue) {
    CanonicalUrl key = p.canon;
    std::string title = p.item->title;
    try {
      const auto page = fetcher.fetch(strip_fragment(p.link));
      if (page.ok() && looks_like_html(page)) {
        const PageLinks links = extract_links(page.body, p.link);
        if (title.empty() && links.title) title = *links.title;
        if (links.canonical_hint) {
          if (auto hint = try_canonicalize(*links.canonical_hint); hint && matches_site(*hint, site.domain))
            key = *hint;
        }
      } else if (!page.ok()) {
        result.failures.push_back({p.link, "HTTP " + std::to_string(page.status)});
      }
    } catch (const FetchError& e) {
      result.failures.push_back({p.link, e.what()});
    }
    if (key != p.canon && already_stored(key.full, p.revision_time)) continue;

    ArticleRecord article;
    article.canonical_url = key;
    article.site_domain = site.domain;
    article.title = title;
    article.published_at = p.item->published_at;
    article.revisions.push_back({p.revision_time.value_or(fetcher.clock().now_seconds()), title});
    const auto before = store.find_article(key.full);
    ArticleRecord stored = store.put_article(article);
    if (!before || before->revisions.size() != stored.revisions.size()) result.changed.push_back(std::move(stored));
  }
  return result;
}

}  // namespace sharetrack
