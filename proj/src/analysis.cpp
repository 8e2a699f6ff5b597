#include "sharetrack/analysis.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace sharetrack {

namespace {

std::vector<TimeWindow> default_windows(const std::vector<TweetRecord>& a, const std::vector<TweetRecord>& b) {
  std::optional<Timestamp> lo, hi;
  for (const auto* v : {&a, &b}) {
    for (const auto& t : *v) {
      if (!lo || t.created_at < *lo) lo = t.created_at;
      if (!hi || t.created_at > *hi) hi = t.created_at;
    }
  }
  if (!lo) return {};
  return {TimeWindow{*lo, *hi + std::chrono::seconds{1}}};
}

}  // namespace

CcfResult lag_analysis(const Store& store, const LagAnalysisParams& params) {
  const auto fake = store.query_tweets({SiteCategory::kFakeNews, std::nullopt, {}});
  const auto fact = store.query_tweets({SiteCategory::kFactChecking, std::nullopt, {}});
  auto windows = params.collection_windows;
  if (windows.empty()) windows = default_windows(fake, fact);
  if (windows.empty()) throw InsufficientOverlap("store holds no tweets");
  const auto fake_series = moving_average(volume_series(fake, Bucket::kHour, windows), params.smoothing_window);
  const auto fact_series = moving_average(volume_series(fact, Bucket::kHour, windows), params.smoothing_window);
  return cross_correlation(fake_series, fact_series, params.max_lag, params.min_overlap);
}

VolumeSeries volume_analysis(const Store& store, std::optional<SiteCategory> category, Bucket bucket,
                             const std::vector<TimeWindow>& collection_windows) {
  const auto tweets = store.query_tweets({category, std::nullopt, {}});
  return volume_series(tweets, bucket, collection_windows);
}

std::optional<PopularityMetric> parse_metric(std::string_view s) {
  if (s == "a") return PopularityMetric::kActivity;
  if (s == "n") return PopularityMetric::kTweetsPerUrl;
  if (s == "p") return PopularityMetric::kUsersPerUrl;
  return std::nullopt;
}

std::vector<std::uint64_t> metric_values(const Store& store, std::optional<SiteCategory> category,
                                         PopularityMetric metric) {
  const auto counts = popularity_counts(store.query_tweets({category, std::nullopt, {}}));
  switch (metric) {
    case PopularityMetric::kActivity: return values_of(counts.a);
    case PopularityMetric::kTweetsPerUrl: return values_of(counts.n);
    case PopularityMetric::kUsersPerUrl: return values_of(counts.p);
  }
  return {};
}

ShareBreakdown breakdown_analysis(const Store& store, std::optional<SiteCategory> category,
                                  std::string_view population, double fraction) {
  const auto tweets = store.query_tweets({category, std::nullopt, {}});
  if (population == "all") return type_breakdown(tweets);
  if (population != "top") throw BadParameter("population must be 'all' or 'top'");
  const auto counts = popularity_counts(tweets);
  const auto top = top_active_users(counts.a, fraction);
  const std::unordered_set<std::string> members(top.begin(), top.end());
  return type_breakdown(tweets, &members);
}

std::vector<UrlHit> search_urls(const Store& store, std::optional<SiteCategory> category,
                                const std::vector<std::string>& keywords) {
  if (keywords.empty()) throw EmptyKeywordList("keyword list is empty");
  const auto tweets = store.query_tweets({category, std::nullopt, keywords});
  std::map<std::string, UrlHit> hits;
  for (const auto& t : tweets) {
    std::unordered_set<std::string> seen;
    for (const auto& m : t.matches) {
      if (!keyword_match(m.url, keywords) || !seen.insert(m.url.full).second) continue;
      auto& h = hits[m.url.full];
      h.url = m.url.full;
      h.site = m.site_domain;
      ++h.tweets;
    }
  }
  std::vector<UrlHit> out;
  for (auto& [k, v] : hits) out.push_back(std::move(v));
  std::stable_sort(out.begin(), out.end(), [](const UrlHit& a, const UrlHit& b) { return a.tweets > b.tweets; });
  return out;
}

std::optional<TimeWindow> parse_window(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  const auto begin = parse_iso8601(text.substr(0, slash));
  const auto end = parse_iso8601(text.substr(slash + 1));
  if (!begin || !end || !(*begin < *end)) return std::nullopt;
  return TimeWindow{*begin, *end};
}

}  // namespace sharetrack
