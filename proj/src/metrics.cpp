#include "sharetrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sharetrack {
namespace {

using std::chrono::seconds;

Timestamp floor_to(Timestamp t, seconds len) {
  auto c = t.time_since_epoch().count();
  auto l = len.count();
  auto q = c / l;
  if (c % l < 0) --q;
  return Timestamp{seconds{q * l}};
}

Timestamp ceil_to(Timestamp t, seconds len) {
  Timestamp f = floor_to(t, len);
  return f == t ? t : f + len;
}

// Peak comparison treats r values this close as equal.
constexpr double kPeakTieTolerance = 1e-12;

}  // namespace

std::chrono::seconds bucket_length(Bucket b) {
  return b == Bucket::kHour ? seconds{3600} : seconds{86400};
}

std::string_view to_string(Bucket b) { return b == Bucket::kHour ? "hour" : "day"; }

std::optional<Bucket> parse_bucket(std::string_view s) {
  if (s == "hour") return Bucket::kHour;
  if (s == "day") return Bucket::kDay;
  return std::nullopt;
}

Timestamp VolumeSeries::time_at(std::size_t i) const {
  return start + bucket_length(bucket) * static_cast<std::int64_t>(i);
}

VolumeSeries volume_series(std::span<const Timestamp> times, Bucket bucket,
                           std::span<const TimeWindow> windows) {
  const seconds len = bucket_length(bucket);
  VolumeSeries out;
  out.bucket = bucket;

  Timestamp begin, end;
  if (!windows.empty()) {
    begin = windows.front().begin;
    end = windows.front().end;
    for (const auto& w : windows) {
      if (!(w.begin < w.end)) throw BadParameter("collection window must satisfy begin < end");
      begin = std::min(begin, w.begin);
      end = std::max(end, w.end);
    }
  } else if (!times.empty()) {
    const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
    begin = *lo;
    end = *hi + seconds{1};
  } else {
    return out;
  }
  out.start = floor_to(begin, len);
  const Timestamp stop = ceil_to(end, len);
  const auto n = static_cast<std::size_t>((stop - out.start) / len);
  out.values.assign(n, windows.empty() ? std::optional<double>(0.0) : std::nullopt);

  for (const auto& w : windows) {
    // buckets intersecting [w.begin, w.end)
    const auto first = static_cast<std::size_t>((floor_to(w.begin, len) - out.start) / len);
    const auto last = static_cast<std::size_t>((ceil_to(w.end, len) - out.start) / len);
    for (std::size_t i = first; i < last && i < n; ++i) out.values[i] = 0.0;
  }
  for (const Timestamp t : times) {
    if (t < out.start || t >= stop) continue;
    auto& v = out.values[static_cast<std::size_t>((t - out.start) / len)];
    if (v) *v += 1.0;
  }
  return out;
}

VolumeSeries volume_series(std::span<const TweetRecord> tweets, Bucket bucket,
                           std::span<const TimeWindow> windows) {
  std::vector<Timestamp> times;
  times.reserve(tweets.size());
  for (const auto& t : tweets) times.push_back(t.created_at);
  return volume_series(times, bucket, windows);
}

VolumeSeries moving_average(const VolumeSeries& s, int window) {
  if (window <= 0) throw BadParameter("moving-average window must be positive");
  const auto w = static_cast<std::size_t>(window);
  std::size_t run = 0, best = 0;
  for (const auto& v : s.values) {
    run = v ? run + 1 : 0;
    best = std::max(best, run);
  }
  if (best < w) throw SeriesTooShort("series has fewer than " + std::to_string(w) + " contiguous values");

  VolumeSeries out{s.bucket, s.start, std::vector<std::optional<double>>(s.size())};
  const std::size_t before = w / 2;
  for (std::size_t t = before; t + (w - before) <= s.size(); ++t) {
    const std::size_t lo = t - before;
    bool complete = true;
    for (std::size_t k = lo; k < lo + w && complete; ++k) complete = s.values[k].has_value();
    if (!complete) continue;
    // mean as reference + mean deviation: a constant window reproduces the
    // constant bit-for-bit
    const double ref = *s.values[lo];
    double dev = 0.0;
    for (std::size_t k = lo; k < lo + w; ++k) dev += *s.values[k] - ref;
    out.values[t] = ref + dev / static_cast<double>(w);
  }
  return out;
}

CcfResult cross_correlation(const VolumeSeries& fake, const VolumeSeries& fact, int max_lag,
                            std::size_t min_overlap) {
  if (max_lag < 1) throw BadParameter("max_lag must be at least 1");
  if (min_overlap < 2) throw BadParameter("min_overlap must be at least 2");
  if (fake.bucket != fact.bucket) throw BadParameter("series have different bucket sizes");
  const seconds len = bucket_length(fake.bucket);
  if ((fact.start - fake.start) % len != seconds{0}) throw BadParameter("series are not bucket-aligned");
  const auto shift = static_cast<std::ptrdiff_t>((fact.start - fake.start) / len);
  const auto n_fake = static_cast<std::ptrdiff_t>(fake.size());
  const auto n_fact = static_cast<std::ptrdiff_t>(fact.size());

  CcfResult out;
  bool any_overlap = false;
  bool any_value = false;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    // fact index j pairs with fake index j + shift + lag
    const std::ptrdiff_t offset = shift + lag;
    const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, -offset);
    const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(n_fact, n_fake - offset);
    // single pass, Welford-style co-moments
    std::size_t n = 0;
    double mean_x = 0, mean_y = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::ptrdiff_t j = j_lo; j < j_hi; ++j) {
      const auto& xv = fake.values[static_cast<std::size_t>(j + offset)];
      const auto& yv = fact.values[static_cast<std::size_t>(j)];
      if (!xv || !yv) continue;
      ++n;
      const double dx = *xv - mean_x;
      mean_x += dx / static_cast<double>(n);
      const double dy = *yv - mean_y;
      mean_y += dy / static_cast<double>(n);
      sxx += dx * (*xv - mean_x);
      syy += dy * (*yv - mean_y);
      sxy += dx * (*yv - mean_y);
    }
    out.lags.push_back(lag);
    out.n_overlap.push_back(n);
    if (n < min_overlap) {
      out.r.push_back(std::nullopt);
      continue;
    }
    any_overlap = true;
    if (sxx <= 0.0 || syy <= 0.0) {
      out.r.push_back(std::nullopt);
      continue;
    }
    const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    out.r.push_back(r);
    if (!any_value) {
      out.peak_lag = lag;
      out.peak_r = r;
      any_value = true;
      continue;
    }
    const bool better = r > out.peak_r + kPeakTieTolerance;
    const bool tie = std::abs(r - out.peak_r) <= kPeakTieTolerance;
    const bool closer = std::abs(lag) < std::abs(out.peak_lag) ||
                        (std::abs(lag) == std::abs(out.peak_lag) && lag < out.peak_lag);
    if (better || (tie && closer)) {
      out.peak_lag = lag;
      out.peak_r = r;
    }
  }
  if (!any_overlap)
    throw InsufficientOverlap("no lag has at least " + std::to_string(min_overlap) + " overlapping buckets");
  if (!any_value) throw ZeroVariance("a series is constant on every admissible overlap");
  return out;
}

PopularityCounts popularity_counts(std::span<const TweetRecord> tweets) {
  PopularityCounts out;
  std::set<std::pair<std::string, std::string>> url_users;
  for (const auto& t : tweets) {
    ++out.a[t.user_id];
    std::set<std::string> urls;
    for (const auto& m : t.matches) urls.insert(m.url.full);
    for (const auto& u : urls) {
      ++out.n[u];
      if (url_users.emplace(u, t.user_id).second) ++out.p[u];
    }
  }
  return out;
}

std::vector<CcdfPoint> ccdf(std::span<const std::uint64_t> values) {
  if (values.empty()) throw EmptyInput("ccdf of an empty sample");
  std::vector<std::uint64_t> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double total = static_cast<double>(sorted.size());
  std::vector<CcdfPoint> out;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    out.push_back({sorted[i], static_cast<double>(sorted.size() - i) / total});
    i = j;
  }
  return out;
}

PowerLawFit fit_power_law(std::span<const double> values, double x_min, TailModel model) {
  if (!(x_min > 0.0)) throw BadParameter("x_min must be positive");
  const double scale = model == TailModel::kDiscrete ? x_min - 0.5 : x_min;
  if (!(scale > 0.0)) throw BadParameter("discrete tail fit needs x_min > 0.5");
  std::size_t n = 0;
  double log_sum = 0.0;
  bool degenerate = true;
  for (const double x : values) {
    if (!(x >= x_min)) continue;
    ++n;
    log_sum += std::log(x / scale);
    if (x != x_min) degenerate = false;
  }
  if (n < kMinTail)
    throw TailTooSmall("tail has " + std::to_string(n) + " values, need " + std::to_string(kMinTail));
  if (degenerate) throw DegenerateTail("every tail value equals x_min");
  PowerLawFit fit;
  fit.x_min = x_min;
  fit.n_tail = n;
  fit.gamma = 1.0 + static_cast<double>(n) / log_sum;
  fit.std_err = (fit.gamma - 1.0) / std::sqrt(static_cast<double>(n));
  return fit;
}

PowerLawFit fit_power_law(std::span<const std::uint64_t> values, double x_min, TailModel model) {
  std::vector<double> v(values.begin(), values.end());
  return fit_power_law(std::span<const double>(v), x_min, model);
}

std::vector<std::string> top_active_users(const std::map<std::string, std::uint64_t>& activity,
                                          double fraction) {
  if (activity.empty()) throw EmptyActivity("no user activity");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw BadParameter("fraction must be in (0, 1]");
  std::vector<std::pair<std::string, std::uint64_t>> users(activity.begin(), activity.end());
  // guard against 0.01 * 200 landing a hair above 2
  const double raw = fraction * static_cast<double>(users.size());
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  k = std::clamp<std::size_t>(k, 1, users.size());
  std::partial_sort(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(k), users.end(),
                    [](const auto& x, const auto& y) {
                      return x.second != y.second ? x.second > y.second : x.first < y.first;
                    });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(users[i].first);
  return out;
}

ShareBreakdown type_breakdown(std::span<const TweetRecord> tweets,
                              const std::unordered_set<std::string>* population) {
  ShareBreakdown out;
  out.population = population ? "top" : "all";
  for (const auto& t : tweets) {
    if (population && !population->contains(t.user_id)) continue;
    ++out.counts[static_cast<std::size_t>(t.type)];
  }
  const auto retweets = out.count(TweetType::kRetweet);
  if (retweets > 0)
    out.rho = static_cast<double>(out.count(TweetType::kOriginal)) / static_cast<double>(retweets);
  return out;
}

}  // namespace sharetrack
