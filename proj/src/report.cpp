#include "sharetrack/report.hpp"

#include <fmt/format.h>

namespace sharetrack {

using nlohmann::json;

namespace {

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string{}; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string to_csv(const CcfResult& ccf) {
  std::string out = "lag,r,n_overlap\n";
  for (std::size_t i = 0; i < ccf.lags.size(); ++i)
    out += fmt::format("{},{},{}\n", ccf.lags[i], opt(ccf.r[i]), ccf.n_overlap[i]);
  return out;
}

std::string to_csv(std::span<const CcdfPoint> points) {
  std::string out = "x,ccdf\n";
  for (const auto& p : points) out += fmt::format("{},{}\n", p.x, p.p);
  return out;
}

std::string to_csv(const VolumeSeries& series) {
  std::string out = "bucket_start,count\n";
  for (std::size_t i = 0; i < series.size(); ++i)
    out += fmt::format("{},{}\n", format_iso8601(series.time_at(i)), opt(series.values[i]));
  return out;
}

std::string to_csv(std::span<const ShareBreakdown> breakdowns) {
  std::string out = "population,original,retweet,quote,reply,rho\n";
  for (const auto& b : breakdowns)
    out += fmt::format("{},{},{},{},{},{}\n", b.population, b.count(TweetType::kOriginal),
                       b.count(TweetType::kRetweet), b.count(TweetType::kQuote), b.count(TweetType::kReply),
                       opt(b.rho));
  return out;
}

std::string to_csv(const PowerLawFit& fit) {
  return fmt::format("gamma,x_min,n_tail,std_err\n{},{},{},{}\n", fit.gamma, fit.x_min, fit.n_tail, fit.std_err);
}

void to_json(json& j, const CcfResult& ccf) {
  json r = json::array();
  for (const auto& v : ccf.r) r.push_back(opt_json(v));
  j = json{{"lags", ccf.lags}, {"r", std::move(r)}, {"n_overlap", ccf.n_overlap},
           {"peak_lag", ccf.peak_lag}, {"peak_r", ccf.peak_r}};
}

void to_json(json& j, const CcdfPoint& p) { j = json{{"x", p.x}, {"p", p.p}}; }

void to_json(json& j, const VolumeSeries& s) {
  json values = json::array();
  for (const auto& v : s.values) values.push_back(opt_json(v));
  j = json{{"bucket", to_string(s.bucket)}, {"start", format_iso8601(s.start)}, {"values", std::move(values)}};
}

void to_json(json& j, const PowerLawFit& fit) {
  j = json{{"gamma", fit.gamma}, {"x_min", fit.x_min}, {"n_tail", fit.n_tail}, {"std_err", fit.std_err}};
}

void to_json(json& j, const ShareBreakdown& b) {
  json counts = json::object();
  for (std::size_t k = 0; k < kTweetTypeCount; ++k)
    counts[std::string(to_string(static_cast<TweetType>(k)))] = b.counts[k];
  j = json{{"population", b.population}, {"counts", std::move(counts)}, {"rho", opt_json(b.rho)}};
}

}  // namespace sharetrack
