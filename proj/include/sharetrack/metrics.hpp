#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "sharetrack/error.hpp"
#include "sharetrack/records.hpp"

namespace sharetrack {

SHARETRACK_DEFINE_ERROR(SeriesTooShort);
SHARETRACK_DEFINE_ERROR(InsufficientOverlap);
SHARETRACK_DEFINE_ERROR(ZeroVariance);
SHARETRACK_DEFINE_ERROR(EmptyInput);
SHARETRACK_DEFINE_ERROR(TailTooSmall);
SHARETRACK_DEFINE_ERROR(DegenerateTail);
SHARETRACK_DEFINE_ERROR(EmptyActivity);
SHARETRACK_DEFINE_ERROR(BadParameter);

// ---- volume series --------------------------------------------------------

enum class Bucket { kHour, kDay };

std::chrono::seconds bucket_length(Bucket b);
std::string_view to_string(Bucket b);
std::optional<Bucket> parse_bucket(std::string_view s);

struct TimeWindow {
  Timestamp begin;  // inclusive
  Timestamp end;    // exclusive
};

// Contiguous UTC buckets. nullopt marks a bucket during which nothing was
// being collected; 0 means collected and empty.
struct VolumeSeries {
  Bucket bucket = Bucket::kHour;
  Timestamp start{};
  std::vector<std::optional<double>> values;

  std::size_t size() const { return values.size(); }
  Timestamp time_at(std::size_t i) const;
};

// Counts per bucket. With collection windows, the series spans the windows
// and buckets that intersect none of them are MISSING (tweets falling there
// are not counted). Without windows, the series spans the tweets and every
// bucket is collected.
VolumeSeries volume_series(std::span<const Timestamp> times, Bucket bucket,
                           std::span<const TimeWindow> collection_windows = {});
VolumeSeries volume_series(std::span<const TweetRecord> tweets, Bucket bucket,
                           std::span<const TimeWindow> collection_windows = {});

// Centered simple moving average. Position t averages t - w/2 ... t - w/2 + w - 1
// (t-12 ... t+11 for w = 24). Positions whose window leaves the series or
// touches a MISSING bucket are MISSING.
VolumeSeries moving_average(const VolumeSeries& s, int window = 24);

// ---- lagged cross-correlation --------------------------------------------

struct CcfResult {
  std::vector<int> lags;                 // -max_lag ... +max_lag
  std::vector<std::optional<double>> r;  // nullopt: overlap below minimum or zero variance
  std::vector<std::size_t> n_overlap;
  int peak_lag = 0;
  double peak_r = 0.0;
};

// Pearson r at each lag, pairing fake[t + lag] with fact[t] over the buckets
// where both are present; a negative peak lag means the first series leads.
// Ties at the peak go to the smallest |lag|, then to the negative lag.
CcfResult cross_correlation(const VolumeSeries& fake, const VolumeSeries& fact, int max_lag = 48,
                            std::size_t min_overlap = 72);

// ---- popularity -----------------------------------------------------------

struct PopularityCounts {
  std::map<std::string, std::uint64_t> a;  // user -> tweets
  std::map<std::string, std::uint64_t> n;  // canonical url -> tweets
  std::map<std::string, std::uint64_t> p;  // canonical url -> distinct users
};

// A tweet counts once toward its user and once toward each distinct URL it
// matched.
PopularityCounts popularity_counts(std::span<const TweetRecord> tweets);

template <typename Map>
std::vector<std::uint64_t> values_of(const Map& m) {
  std::vector<std::uint64_t> out;
  out.reserve(m.size());
  for (const auto& [k, v] : m) out.push_back(v);
  return out;
}

struct CcdfPoint {
  std::uint64_t x;
  double p;  // P(X >= x)

  friend bool operator==(const CcdfPoint&, const CcdfPoint&) = default;
};

std::vector<CcdfPoint> ccdf(std::span<const std::uint64_t> values);

// ---- power-law tail ---------------------------------------------------------

enum class TailModel {
  kContinuous,  // gamma = 1 + n / sum ln(x / x_min)
  kDiscrete,    // gamma = 1 + n / sum ln(x / (x_min - 0.5))
};

struct PowerLawFit {
  double gamma = 0.0;
  double x_min = 0.0;
  std::size_t n_tail = 0;
  double std_err = 0.0;  // (gamma - 1) / sqrt(n_tail)
};

inline constexpr std::size_t kMinTail = 10;

// Maximum-likelihood exponent of P(x) ~ x^-gamma over values >= x_min.
// Integer-valued data (activity, popularity) should use kDiscrete.
PowerLawFit fit_power_law(std::span<const double> values, double x_min,
                          TailModel model = TailModel::kDiscrete);
PowerLawFit fit_power_law(std::span<const std::uint64_t> values, double x_min,
                          TailModel model = TailModel::kDiscrete);

// ---- spreaders --------------------------------------------------------------

// The ceil(fraction * |users|) most active users; equal activity is
// ordered by user id.
std::vector<std::string> top_active_users(const std::map<std::string, std::uint64_t>& activity,
                                          double fraction = 0.01);

struct ShareBreakdown {
  std::array<std::uint64_t, kTweetTypeCount> counts{};  // indexed by TweetType
  std::optional<double> rho;                            // original / retweet
  std::string population;                               // "all" or "top"

  std::uint64_t count(TweetType t) const { return counts[static_cast<std::size_t>(t)]; }
};

// Tweet-type counts over the whole corpus, or only over `population` users.
ShareBreakdown type_breakdown(std::span<const TweetRecord> tweets,
                              const std::unordered_set<std::string>* population = nullptr);

}  // namespace sharetrack
