#include "sharetrack/server.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "sharetrack/analysis.hpp"
#include "sharetrack/report.hpp"
#include "sharetrack/store.hpp"
#include "sharetrack/stream.hpp"

namespace sharetrack {

using nlohmann::json;

namespace {

// A request parameter that failed validation.
class BadRequest : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

template <typename T>
T number_param(const httplib::Request& req, const char* key, T fallback) {
  const auto v = param(req, key);
  if (!v) return fallback;
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      out = static_cast<T>(std::stod(*v, &used));
      if (used != v->size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw BadRequest(std::string("parameter ") + key + " must be a number");
    }
  } else {
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size())
      throw BadRequest(std::string("parameter ") + key + " must be an integer");
  }
  return out;
}

std::optional<SiteCategory> category_param(const httplib::Request& req) {
  const auto v = param(req, "category");
  if (!v || v->empty() || *v == "all") return std::nullopt;
  auto c = parse_category(*v);
  if (!c) throw BadRequest("category must be fake_news, fact_checking or all");
  return c;
}

std::vector<TimeWindow> windows_param(const httplib::Request& req) {
  std::vector<TimeWindow> out;
  const auto v = param(req, "windows");
  if (!v || v->empty()) return out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto w = parse_window(item);
    if (!w) throw BadRequest("windows must be comma-separated <iso>/<iso> intervals");
    out.push_back(*w);
  }
  std::sort(out.begin(), out.end(), [](const TimeWindow& a, const TimeWindow& b) { return a.begin < b.begin; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].begin < out[i - 1].end) throw BadRequest("collection windows overlap");
  return out;
}

std::pair<std::size_t, std::size_t> paging(const httplib::Request& req) {
  const auto limit = number_param<long long>(req, "limit", 100);
  const auto offset = number_param<long long>(req, "offset", 0);
  if (limit < 0 || offset < 0) throw BadRequest("limit and offset must be non-negative");
  return {static_cast<std::size_t>(limit), static_cast<std::size_t>(offset)};
}

std::pair<int, const char*> classify(const std::exception& e) {
  if (dynamic_cast<const BadRequest*>(&e)) return {400, "BadRequest"};
  if (dynamic_cast<const BadParameter*>(&e)) return {400, "BadParameter"};
  if (dynamic_cast<const BadWindow*>(&e)) return {400, "BadWindow"};
  if (dynamic_cast<const EmptyKeywordList*>(&e)) return {400, "EmptyKeywordList"};
  if (dynamic_cast<const BudgetExceeded*>(&e)) return {504, "TimeBudgetExceeded"};
  if (dynamic_cast<const SeriesTooShort*>(&e)) return {422, "SeriesTooShort"};
  if (dynamic_cast<const InsufficientOverlap*>(&e)) return {422, "InsufficientOverlap"};
  if (dynamic_cast<const ZeroVariance*>(&e)) return {422, "ZeroVariance"};
  if (dynamic_cast<const EmptyInput*>(&e)) return {422, "EmptyInput"};
  if (dynamic_cast<const TailTooSmall*>(&e)) return {422, "TailTooSmall"};
  if (dynamic_cast<const DegenerateTail*>(&e)) return {422, "DegenerateTail"};
  if (dynamic_cast<const EmptyActivity*>(&e)) return {422, "EmptyActivity"};
  if (dynamic_cast<const StorageFailure*>(&e)) return {500, "StorageFailure"};
  return {500, "InternalError"};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, std::string_view detail) {
  send_json(res, status, json{{"error", kind}, {"detail", detail}});
}

}  // namespace

struct ApiRoutes {
  ApiServer& api;

  // Runs `work` on its own thread; gives up after the time budget.
  json with_budget(std::function<json()> work) {
    auto task = std::make_shared<std::packaged_task<json()>>(std::move(work));
    auto result = task->get_future();
    std::future<void> runner = std::async(std::launch::async, [task] { (*task)(); });
    if (result.wait_for(api.config_.time_budget) == std::future_status::timeout) {
      std::lock_guard lock(api.pending_mu_);
      std::erase_if(api.pending_, [](std::future<void>& f) {
        return f.wait_for(std::chrono::seconds{0}) == std::future_status::ready;
      });
      api.pending_.push_back(std::move(runner));
      throw BudgetExceeded("analysis exceeded the time budget of " +
                           std::to_string(api.config_.time_budget.count()) + " ms");
    }
    return result.get();
  }

  void get(const char* path, std::function<json(const httplib::Request&)> handler) {
    api.http_->Get(path, [this, handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
      try {
        send_json(res, 200, handler(req));
      } catch (const std::exception& e) {
        const auto [status, kind] = classify(e);
        send_error(res, status, kind, e.what());
      }
    });
  }

  void install() {
    Store& store = api.store_;
    const ApiConfig& cfg = api.config_;

    api.http_->set_pre_routing_handler([&store](const httplib::Request&, httplib::Response&) {
      try {
        store.refresh();
      } catch (const std::exception& e) {
        spdlog::warn("store refresh failed: {}", e.what());
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });

    get("/sites", [&store](const httplib::Request& req) {
      const auto [limit, offset] = paging(req);
      const auto sites = store.sites();
      json list = json::array();
      for (std::size_t i = offset; i < sites.size() && list.size() < limit; ++i) list.push_back(sites[i]);
      return json{{"total", sites.size()}, {"sites", std::move(list)}};
    });

    get("/stats", [&store](const httplib::Request& req) {
      const auto category = category_param(req);
      json body = store.summary_stats(category);
      body["category"] = category ? std::string(to_string(*category)) : std::string("all");
      return body;
    });

    get("/timeseries", [this, &store](const httplib::Request& req) {
      const auto bucket = parse_bucket(param(req, "bucket").value_or("day"));
      if (!bucket) throw BadRequest("bucket must be hour or day");
      const auto category = category_param(req);
      const auto windows = windows_param(req);
      return with_budget([&store, category, windows, b = *bucket] {
        json body = volume_analysis(store, category, b, windows);
        body["category"] = category ? std::string(to_string(*category)) : std::string("all");
        return body;
      });
    });

    get("/ccf", [this, &store, &cfg](const httplib::Request& req) {
      LagAnalysisParams p;
      p.max_lag = number_param<int>(req, "max_lag", cfg.default_max_lag);
      p.min_overlap = number_param<std::size_t>(req, "min_overlap", p.min_overlap);
      p.smoothing_window = number_param<int>(req, "window", cfg.default_window);
      p.collection_windows = windows_param(req);
      if (p.max_lag < 1) throw BadRequest("max_lag must be at least 1");
      if (p.min_overlap < 2) throw BadRequest("min_overlap must be at least 2");
      if (p.smoothing_window < 1) throw BadRequest("window must be at least 1");
      return with_budget([&store, p] { return json(lag_analysis(store, p)); });
    });

    get("/ccdf", [this, &store](const httplib::Request& req) {
      const auto metric_name = param(req, "metric").value_or("");
      const auto metric = parse_metric(metric_name);
      if (!metric) throw BadRequest("metric must be a, n or p");
      const auto category = category_param(req);
      const double x_min = number_param<double>(req, "x_min", 0.0);
      return with_budget([&store, category, m = *metric, metric_name, x_min] {
        auto values = metric_values(store, category, m);
        std::erase_if(values, [x_min](std::uint64_t v) { return static_cast<double>(v) < x_min; });
        return json{{"metric", metric_name}, {"points", ccdf(values)}};
      });
    });

    get("/powerlaw", [this, &store](const httplib::Request& req) {
      const auto metric_name = param(req, "metric").value_or("");
      const auto metric = parse_metric(metric_name);
      if (!metric) throw BadRequest("metric must be a, n or p");
      const double x_min = number_param<double>(req, "x_min", 1.0);
      const auto model_name = param(req, "model").value_or("discrete");
      if (model_name != "discrete" && model_name != "continuous")
        throw BadRequest("model must be discrete or continuous");
      const auto model = model_name == "discrete" ? TailModel::kDiscrete : TailModel::kContinuous;
      const auto category = category_param(req);
      return with_budget([&store, category, m = *metric, x_min, model, metric_name] {
        json body = fit_power_law(metric_values(store, category, m), x_min, model);
        body["metric"] = metric_name;
        return body;
      });
    });

    get("/breakdown", [this, &store](const httplib::Request& req) {
      const auto population = param(req, "population").value_or("all");
      if (population != "all" && population != "top") throw BadRequest("population must be all or top");
      const double fraction = number_param<double>(req, "fraction", 0.01);
      if (!(fraction > 0.0 && fraction <= 1.0)) throw BadRequest("fraction must be in (0, 1]");
      const auto category = category_param(req);
      return with_budget([&store, category, population, fraction] {
        return json(breakdown_analysis(store, category, population, fraction));
      });
    });

    get("/urls/search", [this, &store](const httplib::Request& req) {
      const auto q = param(req, "q").value_or("");
      std::vector<std::string> keywords;
      std::stringstream ss(q);
      for (std::string w; ss >> w;) keywords.push_back(ascii_lower(w));
      if (keywords.empty()) throw BadRequest("q must contain at least one keyword");
      const auto category = category_param(req);
      const auto [limit, offset] = paging(req);
      return with_budget([&store, category, keywords, limit, offset] {
        const auto hits = search_urls(store, category, keywords);
        json list = json::array();
        for (std::size_t i = offset; i < hits.size() && list.size() < limit; ++i)
          list.push_back({{"url", hits[i].url}, {"site", hits[i].site}, {"tweets", hits[i].tweets}});
        return json{{"total", hits.size()}, {"results", std::move(list)}};
      });
    });

    api.http_->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.status == 404) send_error(res, 404, "NotFound", "no route for " + req.path);
    });
  }
};

std::pair<std::string, int> split_listen_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw BindFailure("listen address must be host:port, got " + address);
  int port = -1;
  const std::string port_text = address.substr(colon + 1);
  auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || p != port_text.data() + port_text.size() || port < 0 || port > 65535)
    throw BindFailure("invalid port in listen address " + address);
  return {address.substr(0, colon), port};
}

ApiServer::ApiServer(Store& store, ApiConfig config)
    : store_(store), config_(std::move(config)), http_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ApiServer::~ApiServer() {
  stop();
  std::lock_guard lock(pending_mu_);
  for (auto& f : pending_) f.wait();
}

void ApiServer::install_routes() {
  routes_ = std::make_unique<ApiRoutes>(ApiRoutes{*this});
  routes_->install();
}

int ApiServer::bind() {
  const auto [host, port] = split_listen_address(config_.listen_address);
  if (port == 0) {
    const int bound = http_->bind_to_any_port(host);
    if (bound < 0) throw BindFailure("cannot bind " + host);
    return bound;
  }
  if (!http_->bind_to_port(host, port)) throw BindFailure("cannot bind " + config_.listen_address);
  return port;
}

void ApiServer::serve() { http_->listen_after_bind(); }

void ApiServer::stop() {
  if (http_) http_->stop();
}

}  // namespace sharetrack
