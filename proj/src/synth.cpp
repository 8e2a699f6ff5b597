#include "sharetrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

namespace sharetrack {
namespace {

using nlohmann::json;

// Smoothed random walk shifted to be >= floor_value.
std::vector<double> smooth_walk(Rng& rng, std::size_t length, int smoothing, double floor_value) {
  const auto s = static_cast<std::size_t>(std::max(1, smoothing));
  std::vector<double> walk(length + s);
  double level = 0.0;
  for (auto& w : walk) {
    level += rng.normal();
    w = level;
  }
  std::vector<double> out(length);
  for (std::size_t t = 0; t < length; ++t) {
    double sum = 0.0;
    for (std::size_t k = 0; k < s; ++k) sum += walk[t + k];
    out[t] = sum / static_cast<double>(s);
  }
  const double lo = *std::min_element(out.begin(), out.end());
  for (auto& v : out) v += floor_value - lo;
  return out;
}

// Baseline 1 plus news bursts: Poisson onsets (one per `spacing` hours on
// average), exponential sizes, exponential decay.
std::vector<double> burst_train(Rng& rng, std::size_t length, double spacing, double mean_size, double decay) {
  std::vector<double> out(length, 1.0);
  for (std::size_t t = 0; t < length; ++t) {
    if (rng.uniform() >= 1.0 / spacing) continue;
    const double size = -mean_size * std::log(1.0 - rng.uniform());
    for (std::size_t k = t; k < length; ++k) {
      const double v = size * std::exp(-static_cast<double>(k - t) / decay);
      if (v < 1e-3) break;
      out[k] += v;
    }
  }
  return out;
}

double circadian(double amplitude, std::size_t hour) {
  return amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(hour % 24) / 24.0);
}

// Exact integer allocation of `total` by shares, largest remainder first.
std::array<std::size_t, kTweetTypeCount> allocate(const std::array<double, kTweetTypeCount>& shares,
                                                  std::size_t total) {
  std::array<std::size_t, kTweetTypeCount> counts{};
  std::array<double, kTweetTypeCount> rest{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < kTweetTypeCount; ++k) {
    const double exact = shares[k] * static_cast<double>(total);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    rest[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  while (assigned < total) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < kTweetTypeCount; ++k)
      if (rest[k] > rest[best]) best = k;
    ++counts[best];
    rest[best] = -1.0;
    ++assigned;
  }
  return counts;
}

std::size_t sample_cumulative(Rng& rng, const std::vector<double>& cumulative) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::string decorate(Rng& rng, const std::string& domain, const std::string& path) {
  static constexpr std::array<const char*, 5> kPrefixes = {"http://", "https://", "https://www.", "http://www.",
                                                           "https://m."};
  std::string url = kPrefixes[rng.below(kPrefixes.size())];
  std::string d = domain;
  std::string p = path;
  if (rng.below(5) == 0) std::transform(d.begin(), d.end(), d.begin(), ::toupper);
  if (rng.below(5) == 0) std::transform(p.begin(), p.end(), p.begin(), ::toupper);
  url += d + p;
  if (rng.below(3) == 0) url += "/";
  if (rng.below(3) == 0) url += "?utm_source=twitter&utm_medium=social";
  if (rng.below(6) == 0) url += "#comments";
  return url;
}

}  // namespace

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x < limit) return x % n;
  }
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double pareto_quantile(double gamma, double x_min, double u) {
  if (!(gamma > 1.0)) throw BadExponent("power-law exponent must exceed 1");
  return x_min * std::pow(1.0 - u, -1.0 / (gamma - 1.0));
}

std::vector<double> gen_pareto(double gamma, double x_min, std::size_t size, std::uint64_t seed) {
  if (!(gamma > 1.0)) throw BadExponent("power-law exponent must exceed 1");
  if (size == 0) throw BadSpec("sample size must be positive");
  Rng rng(seed);
  std::vector<double> out(size);
  for (auto& x : out) x = pareto_quantile(gamma, x_min, rng.uniform());
  return out;
}

std::pair<VolumeSeries, VolumeSeries> gen_lagged_pair(int lag_hours, std::size_t length, double noise_sd,
                                                      std::uint64_t seed, const LaggedPairOptions& options) {
  const auto abs_lag = static_cast<std::size_t>(std::abs(lag_hours));
  if (length == 0 || 4 * abs_lag >= length) throw BadLag("|lag| must be below length / 4");
  Rng rng(seed);
  const std::size_t total = length + 2 * abs_lag;
  const auto base = smooth_walk(rng, total, options.walk_smoothing, options.circadian_amplitude + 1.0);

  VolumeSeries leader{Bucket::kHour, options.start, {}};
  VolumeSeries follower{Bucket::kHour, options.start, {}};
  leader.values.reserve(length);
  follower.values.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const double c = circadian(options.circadian_amplitude, t);
    const std::size_t i = t + abs_lag;
    const auto j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) - lag_hours);
    leader.values.push_back(base[i] + c);
    follower.values.push_back(base[j] + c + noise_sd * rng.normal());
  }
  return {std::move(leader), std::move(follower)};
}

Corpus gen_corpus(const CorpusSpec& spec) {
  double share_sum = 0.0;
  for (double s : spec.type_shares) {
    if (s < 0.0) throw BadSpec("type shares must be non-negative");
    share_sum += s;
  }
  if (std::abs(share_sum - 1.0) > 1e-9) throw BadSpec("type shares must sum to 1");
  if (!(spec.activity_gamma > 1.0)) throw BadSpec("activity exponent must exceed 1");
  if (spec.n_tweets == 0 || spec.n_users == 0) throw BadSpec("n_tweets and n_users must be positive");
  if (spec.n_fake_sites == 0 || spec.n_fact_sites == 0) throw BadSpec("need at least one site per category");
  if (spec.n_urls < spec.n_fake_sites + spec.n_fact_sites) throw BadSpec("n_urls must cover every site");
  if (!(spec.fact_fraction > 0.0 && spec.fact_fraction < 1.0)) throw BadSpec("fact_fraction must be in (0, 1)");
  if (spec.duration_hours < 24 || 4 * std::abs(spec.lag_hours) >= spec.duration_hours)
    throw BadSpec("duration must be >= 24 h and exceed 4 * |lag|");

  Rng rng(spec.seed);
  Corpus corpus;

  // sites
  for (std::size_t i = 0; i < spec.n_fake_sites; ++i)
    corpus.sites.push_back({fmt::format("fakenews{}.example", i + 1), SiteCategory::kFakeNews,
                            fmt::format("http://fakenews{}.example/feed", i + 1), spec.start});
  for (std::size_t i = 0; i < spec.n_fact_sites; ++i)
    corpus.sites.push_back({fmt::format("factcheck{}.example", i + 1), SiteCategory::kFactChecking,
                            fmt::format("http://factcheck{}.example/feed", i + 1), spec.start});

  // per-user activity
  std::vector<std::uint64_t> activity;
  std::size_t budget = spec.n_tweets;
  while (budget > 0) {
    if (activity.size() == spec.n_users) throw BadSpec("user pool exhausted before the tweet budget");
    const double x = pareto_quantile(spec.activity_gamma, 0.5, rng.uniform());
    auto a = static_cast<std::size_t>(std::min(std::floor(x + 0.5), 1e15));
    a = std::clamp<std::size_t>(a, 1, budget);
    activity.push_back(a);
    budget -= a;
  }
  std::vector<std::size_t> tweet_user;
  tweet_user.reserve(spec.n_tweets);
  for (std::size_t u = 0; u < activity.size(); ++u) tweet_user.insert(tweet_user.end(), activity[u], u);
  rng.shuffle(tweet_user);

  // category and type, exactly allocated
  const auto n_fact = static_cast<std::size_t>(std::llround(spec.fact_fraction * static_cast<double>(spec.n_tweets)));
  std::vector<SiteCategory> category(spec.n_tweets, SiteCategory::kFakeNews);
  std::fill(category.begin(), category.begin() + static_cast<std::ptrdiff_t>(n_fact), SiteCategory::kFactChecking);
  rng.shuffle(category);
  const auto type_counts = allocate(spec.type_shares, spec.n_tweets);
  std::vector<TweetType> types;
  for (std::size_t k = 0; k < kTweetTypeCount; ++k) types.insert(types.end(), type_counts[k], static_cast<TweetType>(k));
  rng.shuffle(types);

  // URL catalogue per category, Zipf(1) popularity
  struct Url {
    std::string domain;
    std::string path;
  };
  std::array<std::vector<Url>, 2> urls;
  const auto n_fact_urls = std::max<std::size_t>(
      spec.n_fact_sites, static_cast<std::size_t>(std::llround(spec.fact_fraction * static_cast<double>(spec.n_urls))));
  const std::size_t n_fake_urls = std::max<std::size_t>(spec.n_fake_sites, spec.n_urls - std::min(spec.n_urls, n_fact_urls));
  for (std::size_t k = 0; k < n_fake_urls; ++k)
    urls[0].push_back({corpus.sites[k % spec.n_fake_sites].domain, fmt::format("/story/{}", k + 1)});
  for (std::size_t k = 0; k < n_fact_urls; ++k)
    urls[1].push_back({corpus.sites[spec.n_fake_sites + k % spec.n_fact_sites].domain, fmt::format("/check/{}", k + 1)});
  std::array<std::vector<double>, 2> url_cdf;
  for (std::size_t c = 0; c < 2; ++c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < urls[c].size(); ++k) url_cdf[c].push_back(acc += 1.0 / static_cast<double>(k + 1));
  }

  // hourly intensity; fact-checking reads it `lag_hours` later
  const auto hours = static_cast<std::size_t>(spec.duration_hours);
  const auto abs_lag = static_cast<std::size_t>(std::abs(spec.lag_hours));
  const auto base = burst_train(rng, hours + 2 * abs_lag, 24.0, 8.0, 6.0);
  std::array<std::vector<double>, 2> hour_cdf;
  for (std::size_t c = 0; c < 2; ++c) {
    double acc = 0.0;
    for (std::size_t h = 0; h < hours; ++h) {
      const auto i = static_cast<std::ptrdiff_t>(h + abs_lag) - (c == 1 ? spec.lag_hours : 0);
      const double level = base[static_cast<std::size_t>(i)] * (1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * static_cast<double>(i % 24) / 24.0));
      hour_cdf[c].push_back(acc += level);
    }
  }

  struct Draft {
    std::int64_t when;
    std::size_t user;
    SiteCategory category;
    TweetType type;
    std::size_t url;
    std::string raw_url;
    bool extra_url;
  };
  std::vector<Draft> drafts;
  drafts.reserve(spec.n_tweets);
  const auto start_s = spec.start.time_since_epoch().count();
  for (std::size_t i = 0; i < spec.n_tweets; ++i) {
    const std::size_t c = category[i] == SiteCategory::kFactChecking ? 1 : 0;
    const std::size_t h = sample_cumulative(rng, hour_cdf[c]);
    const auto when = start_s + static_cast<std::int64_t>(h) * 3600 + static_cast<std::int64_t>(rng.below(3600));
    const std::size_t u = sample_cumulative(rng, url_cdf[c]);
    std::string raw = decorate(rng, urls[c][u].domain, urls[c][u].path);
    const bool extra = rng.below(10) == 0;
    drafts.push_back({when, tweet_user[i], category[i], types[i], u, std::move(raw), extra});
  }
  std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) { return a.when < b.when; });

  // emit
  json type_totals = json::object();
  json by_category = {{"fake_news", json::object()}, {"fact_checking", json::object()}};
  std::array<std::array<std::uint64_t, kTweetTypeCount>, 2> per_cat{};
  std::array<std::set<std::size_t>, 2> cat_users;
  std::array<std::set<std::string>, 2> cat_urls;
  std::array<std::uint64_t, 2> cat_tweets{};
  json activity_json = json::object();
  json url_counts = json::object();
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    const Draft& d = drafts[i];
    const std::size_t c = d.category == SiteCategory::kFactChecking ? 1 : 0;
    const std::string id = std::to_string(1000000 + i);
    const std::string user = fmt::format("u{:06d}", d.user + 1);
    json line{{"id", id},
              {"created_at", format_iso8601(Timestamp{std::chrono::seconds{d.when}})},
              {"user_id", user},
              {"text", "shared a story"}};
    json url_list = json::array({d.raw_url});
    if (d.extra_url) url_list.push_back(fmt::format("https://t.co/{}", i));
    line["urls"] = std::move(url_list);
    const std::string ref = i == 0 ? std::string("999999") : std::to_string(1000000 + rng.below(i));
    switch (d.type) {
      case TweetType::kRetweet: line["retweeted_id"] = ref; break;
      case TweetType::kQuote: line["quoted_id"] = ref; break;
      case TweetType::kReply: line["replied_id"] = ref; break;
      case TweetType::kOriginal: break;
    }
    corpus.lines.push_back(line.dump());

    ++per_cat[c][static_cast<std::size_t>(d.type)];
    ++cat_tweets[c];
    cat_users[c].insert(d.user);
    const std::string canonical = urls[c][d.url].domain + urls[c][d.url].path;
    cat_urls[c].insert(canonical);
    activity_json[user] = activity_json.value(user, 0) + 1;
    url_counts[canonical] = url_counts.value(canonical, 0) + 1;
  }
  for (std::size_t k = 0; k < kTweetTypeCount; ++k) {
    const auto name = std::string(to_string(static_cast<TweetType>(k)));
    type_totals[name] = per_cat[0][k] + per_cat[1][k];
    by_category["fake_news"][name] = per_cat[0][k];
    by_category["fact_checking"][name] = per_cat[1][k];
  }
  auto summary = [&](std::size_t c, std::size_t n_sites) {
    return json{{"n_sites", n_sites}, {"n_tweets", cat_tweets[c]}, {"n_users", cat_users[c].size()},
                {"n_urls", cat_urls[c].size()}};
  };
  json sites_json = json::array();
  for (const auto& s : corpus.sites) sites_json.push_back(s);
  corpus.manifest = {
      {"generator", {{"name", "sharetrack-synth"}, {"version", 1}, {"rng", Rng::kAlgorithm}}},
      {"seed", spec.seed},
      {"spec",
       {{"n_users", spec.n_users},
        {"n_tweets", spec.n_tweets},
        {"n_urls", spec.n_urls},
        {"type_shares", spec.type_shares},
        {"activity_gamma", spec.activity_gamma},
        {"lag_hours", spec.lag_hours},
        {"duration_hours", spec.duration_hours},
        {"fact_fraction", spec.fact_fraction},
        {"start", format_iso8601(spec.start)}}},
      {"realized",
       {{"n_tweets", drafts.size()},
        {"n_users", activity.size()},
        {"type_counts", type_totals},
        {"type_counts_by_category", by_category},
        {"summary", {{"fake_news", summary(0, spec.n_fake_sites)}, {"fact_checking", summary(1, spec.n_fact_sites)}}},
        {"activity", activity_json},
        {"url_counts", url_counts}}},
      {"sites", sites_json}};
  return corpus;
}

std::string sites_to_ndjson(const std::vector<Site>& sites) {
  std::string out;
  for (const auto& s : sites) {
    json j{{"domain", s.domain}, {"category", to_string(s.category)}};
    if (s.rss_url) j["rss_url"] = *s.rss_url;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace sharetrack
