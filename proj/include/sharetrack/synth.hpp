#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sharetrack/error.hpp"
#include "sharetrack/metrics.hpp"
#include "sharetrack/records.hpp"

namespace sharetrack {

SHARETRACK_DEFINE_ERROR(BadExponent);
SHARETRACK_DEFINE_ERROR(BadLag);
SHARETRACK_DEFINE_ERROR(BadSpec);

// mt19937_64 with uniforms built from the top 53 bits, so every generator
// below is reproducible bit-for-bit across standard libraries.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/u53";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                      // [0, 1)
  std::uint64_t below(std::uint64_t n);  // [0, n), unbiased
  double normal();                       // Box-Muller, one draw per call

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

// Inverse CDF of the Pareto law with density ~ x^-gamma on [x_min, inf).
double pareto_quantile(double gamma, double x_min, double u);
std::vector<double> gen_pareto(double gamma, double x_min, std::size_t size, std::uint64_t seed);

struct LaggedPairOptions {
  double circadian_amplitude = 5.0;
  int walk_smoothing = 12;  // hours of trailing mean applied to the walk
  Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2015} / 10 / 14}};
};

// (leader, follower) hourly series: follower[t] = base[t - lag] + circadian[t]
// + noise, leader[t] = base[t] + circadian[t], where base is a smoothed
// positive random walk. Requires |lag| < length / 4.
std::pair<VolumeSeries, VolumeSeries> gen_lagged_pair(int lag_hours, std::size_t length, double noise_sd,
                                                      std::uint64_t seed, const LaggedPairOptions& options = {});

struct CorpusSpec {
  std::size_t n_users = 100000;  // pool cap; realized count follows from the activity draws
  std::size_t n_tweets = 1000;
  std::size_t n_urls = 200;
  std::array<double, kTweetTypeCount> type_shares{0.45, 0.40, 0.08, 0.07};  // original, retweet, quote, reply
  double activity_gamma = 2.3;
  int lag_hours = 13;  // fact-checking volume trails fake news by this much
  int duration_hours = 24 * 60;
  std::uint64_t seed = 1;
  double fact_fraction = 0.3;
  std::size_t n_fake_sites = 4;
  std::size_t n_fact_sites = 2;
  Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2015} / 10 / 14}};
};

struct Corpus {
  std::vector<std::string> lines;  // NDJSON tweets, time-ordered
  std::vector<Site> sites;
  nlohmann::json manifest;  // realized counts, seed, generator identity
};

// Per-user activity is a rounded continuous Pareto draw (x_min 0.5), which
// makes P(a >= k) follow the discrete tail model used by fit_power_law.
// Type counts are allocated exactly from the shares (largest remainder).
Corpus gen_corpus(const CorpusSpec& spec);

std::string sites_to_ndjson(const std::vector<Site>& sites);

}  // namespace sharetrack
