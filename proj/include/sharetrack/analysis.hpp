#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sharetrack/metrics.hpp"
#include "sharetrack/store.hpp"

namespace sharetrack {

// Store-level analysis pipelines. The CLI and the HTTP API both go through
// these, so they always report the same numbers.

struct LagAnalysisParams {
  std::vector<TimeWindow> collection_windows;  // empty: the span of all tweets
  int smoothing_window = 24;
  int max_lag = 48;
  std::size_t min_overlap = 72;
};

// Hourly fake-news vs fact-checking volume, each smoothed, then correlated.
CcfResult lag_analysis(const Store& store, const LagAnalysisParams& params);

VolumeSeries volume_analysis(const Store& store, std::optional<SiteCategory> category, Bucket bucket,
                             const std::vector<TimeWindow>& collection_windows);

enum class PopularityMetric { kActivity, kTweetsPerUrl, kUsersPerUrl };  // a, n, p
std::optional<PopularityMetric> parse_metric(std::string_view s);

std::vector<std::uint64_t> metric_values(const Store& store, std::optional<SiteCategory> category,
                                         PopularityMetric metric);

// population "all" or "top"; `fraction` applies to "top".
ShareBreakdown breakdown_analysis(const Store& store, std::optional<SiteCategory> category,
                                  std::string_view population, double fraction);

struct UrlHit {
  std::string url;
  std::string site;
  std::uint64_t tweets = 0;
};

// Distinct canonical URLs containing every keyword, most tweeted first.
std::vector<UrlHit> search_urls(const Store& store, std::optional<SiteCategory> category,
                                const std::vector<std::string>& keywords);

// "2015-10-14T00:00:00Z/2015-11-01T00:00:00Z"
std::optional<TimeWindow> parse_window(std::string_view text);

}  // namespace sharetrack
