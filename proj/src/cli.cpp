#include "sharetrack/cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <pthread.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "sharetrack/analysis.hpp"
#include "sharetrack/clock.hpp"
#include "sharetrack/crawler.hpp"
#include "sharetrack/report.hpp"
#include "sharetrack/scheduler.hpp"
#include "sharetrack/server.hpp"
#include "sharetrack/store.hpp"
#include "sharetrack/stream.hpp"
#include "sharetrack/synth.hpp"
#include "sharetrack/urlnorm.hpp"

namespace sharetrack {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad arguments that CLI11 itself cannot detect.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string data_dir = "data";
  bool verbose = false;

  // sites
  std::string domain;
  std::string category;
  std::string rss_url;
  std::string sites_file;
  bool crawl_now = false;

  // crawl
  int max_depth = 10;
  int max_pages = 10000;
  long delay_ms = 1000;
  int parallel = 4;
  bool ignore_robots = false;
  double interval_hours = 2.0;
  double for_hours = 0.0;

  // ingest
  std::string tweets = "-";

  // analyze
  std::string out = "-";
  std::string format;
  std::string metric = "a";
  double x_min = 1.0;
  std::string model = "discrete";
  int max_lag = 48;
  std::size_t min_overlap = 72;
  int window = 24;
  std::vector<std::string> windows;
  std::string bucket = "hour";
  std::string population = "both";
  double fraction = 0.01;

  // synth
  CorpusSpec spec;
  std::string tweets_out;
  std::string sites_out;
  std::string manifest_out;

  // serve
  std::string listen = "127.0.0.1:8080";
  long budget_ms = 10000;
};

std::optional<SiteCategory> category_option(const std::string& name) {
  if (name.empty() || name == "all") return std::nullopt;
  auto c = parse_category(name);
  if (!c) throw UsageError("category must be fake_news, fact_checking or all, got '" + name + "'");
  return c;
}

std::string canonical_domain(const std::string& text) {
  CanonicalUrl c;
  try {
    c = canonicalize(text);
  } catch (const MalformedUrl& e) {
    throw UsageError(std::string("invalid domain: ") + e.what());
  }
  if (!c.path.empty()) throw UsageError("a domain must not contain a path: " + text);
  return c.host;
}

std::vector<TimeWindow> window_options(const std::vector<std::string>& texts) {
  std::vector<TimeWindow> out;
  for (const auto& t : texts) {
    auto w = parse_window(t);
    if (!w) throw UsageError("collection window must be <iso>/<iso>, got '" + t + "'");
    out.push_back(*w);
  }
  return out;
}

// Writes to a file, or to `out` for "-".
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << content;
  if (!f.flush()) throw Error("write to " + path + " failed");
}

bool wants_json(const Options& o) {
  if (!o.format.empty()) return o.format == "json";
  return o.out.size() > 5 && o.out.ends_with(".json");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Blocks SIGINT/SIGTERM and calls `on_signal` from a waiter thread when one
// arrives. Must be created before any other thread is started.
class SignalStop {
 public:
  explicit SignalStop(std::function<void()> on_signal) {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set_, &old_);
    waiter_ = std::thread([this, on_signal = std::move(on_signal)] {
      int sig = 0;
      sigwait(&set_, &sig);
      if (!done_) on_signal();
    });
  }
  ~SignalStop() {
    done_ = true;
    pthread_kill(waiter_.native_handle(), SIGTERM);
    waiter_.join();
    pthread_sigmask(SIG_SETMASK, &old_, nullptr);
  }

 private:
  sigset_t set_{};
  sigset_t old_{};
  std::atomic<bool> done_{false};
  std::thread waiter_;
};

CrawlConfig crawl_config(const Options& o) {
  CrawlConfig c;
  c.max_depth = o.max_depth;
  c.max_pages = o.max_pages;
  c.per_host_delay = std::chrono::milliseconds{o.delay_ms};
  c.parallel_fetches = o.parallel;
  c.honor_robots = !o.ignore_robots;
  c.light_interval = std::chrono::milliseconds{static_cast<long long>(o.interval_hours * 3600.0 * 1000.0)};
  c.validate();
  return c;
}

Site registered_site(const Store& store, const std::string& domain_text) {
  const std::string domain = canonical_domain(domain_text);
  auto site = store.find_site(domain);
  if (!site) throw UsageError("site not registered: " + domain);
  return *site;
}

void store_deep_crawl(Store& store, const Site& site, const DeepCrawlResult& r, std::ostream& out) {
  for (const auto& a : r.articles) store.put_article(a);
  if (r.discovered_feed && !site.rss_url) {
    Site updated = site;
    updated.rss_url = r.discovered_feed;
    store.put_site(updated);
  }
  for (const auto& f : r.failures) spdlog::warn("{}: {}", f.url, f.reason);
  out << site.domain << ": " << r.visited.size() << " pages, " << r.articles.size() << " articles, "
      << r.failures.size() << " failures\n";
}

int cmd_sites_add(const Options& o, std::ostream& out) {
  const auto category = parse_category(o.category);
  if (!category) throw UsageError("--category must be fake_news or fact_checking");
  Site site;
  site.domain = canonical_domain(o.domain);
  site.category = *category;
  if (!o.rss_url.empty()) site.rss_url = o.rss_url;
  site.registered_at = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  Store store(o.data_dir);
  const Site stored = store.put_site(site);
  out << "registered " << stored.domain << " (" << to_string(stored.category) << ")\n";
  if (o.crawl_now) {
    SystemClock clock;
    const auto config = crawl_config(o);
    PoliteFetcher fetcher(HttpFetcher({std::chrono::milliseconds{15000}, config.user_agent}), clock,
                          config.per_host_delay);
    store_deep_crawl(store, stored, deep_crawl(stored, fetcher, config), out);
  }
  return kExitOk;
}

int cmd_sites_list(const Options& o, std::ostream& out) {
  Store store(o.data_dir, {.read_only = true});
  if (o.format == "json") {
    out << dump(json(store.sites()));
    return kExitOk;
  }
  out << "domain,category,rss_url,registered_at\n";
  for (const auto& s : store.sites())
    out << s.domain << ',' << to_string(s.category) << ',' << s.rss_url.value_or("") << ','
        << format_iso8601(s.registered_at) << '\n';
  return kExitOk;
}

int cmd_sites_import(const Options& o, std::ostream& out) {
  std::ifstream in(o.sites_file);
  if (!in) throw Error("cannot read " + o.sites_file);
  const auto sites =
      parse_sites_file(in, std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
  Store store(o.data_dir);
  for (const auto& s : sites) store.put_site(s);
  out << "imported " << sites.size() << " sites\n";
  return kExitOk;
}

int cmd_crawl_deep(const Options& o, std::ostream& out) {
  const auto config = crawl_config(o);
  Store store(o.data_dir);
  std::vector<Site> targets;
  if (o.domain.empty()) {
    targets = store.sites();
  } else {
    targets.push_back(registered_site(store, o.domain));
  }
  SystemClock clock;
  PoliteFetcher fetcher(HttpFetcher({std::chrono::milliseconds{15000}, config.user_agent}), clock,
                        config.per_host_delay);
  const auto results = deep_crawl_all(targets, fetcher, config);
  for (std::size_t i = 0; i < targets.size(); ++i) store_deep_crawl(store, targets[i], results[i], out);
  return kExitOk;
}

int cmd_crawl_light(const Options& o, std::ostream& out) {
  const auto config = crawl_config(o);
  Store store(o.data_dir);
  std::vector<Site> targets;
  if (o.domain.empty()) {
    targets = store.sites();
  } else {
    targets.push_back(registered_site(store, o.domain));
  }
  SystemClock clock;
  PoliteFetcher fetcher(HttpFetcher({std::chrono::milliseconds{15000}, config.user_agent}), clock,
                        config.per_host_delay);
  bool failed = false;
  for (const auto& site : targets) {
    try {
      const auto r = light_crawl(site, fetcher, store);
      out << site.domain << ": " << r.items_seen << " items, " << r.changed.size() << " new or updated\n";
    } catch (const Error& e) {
      failed = true;
      spdlog::error("{}: {}", site.domain, e.what());
    }
  }
  return failed ? kExitFailure : kExitOk;
}

int cmd_crawl_schedule(const Options& o, std::ostream& out) {
  const auto config = crawl_config(o);
  Store store(o.data_dir);
  SystemClock clock;
  PoliteFetcher fetcher(HttpFetcher({std::chrono::milliseconds{15000}, config.user_agent}), clock,
                        config.per_host_delay);
  std::vector<Site> targets;
  for (const auto& s : store.sites())
    if (s.rss_url) targets.push_back(s);
  if (targets.empty()) throw Error("no registered site has a feed URL");
  LightCrawlScheduler scheduler(targets, clock, config.light_interval, [&](const Site& site) {
    const auto r = light_crawl(site, fetcher, store);
    out << format_iso8601(clock.now_seconds()) << ' ' << site.domain << ": " << r.changed.size()
        << " new or updated\n"
        << std::flush;
  });
  if (o.for_hours > 0.0) {
    const auto span = std::chrono::milliseconds{static_cast<long long>(o.for_hours * 3600.0 * 1000.0)};
    scheduler.run_until(clock.now() + span);
    return kExitOk;
  }
  std::stop_source stop;
  SignalStop on_signal([&] { stop.request_stop(); });
  scheduler.run(stop.get_token());
  return kExitOk;
}

int cmd_ingest(const Options& o, std::ostream& out) {
  Store store(o.data_dir);
  if (!o.sites_file.empty()) {
    std::ifstream in(o.sites_file);
    if (!in) throw Error("cannot read " + o.sites_file);
    for (const auto& s :
         parse_sites_file(in, std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now())))
      store.put_site(s);
  }
  const auto sites = store.sites();
  if (sites.empty()) throw UsageError("no sites registered; pass --sites or run 'sites add' first");
  IngestReport r;
  try {
    r = ingest_file(o.tweets, sites, store);
  } catch (const IngestAborted& e) {
    r = e.report();
    out << dump(json{{"read", r.read}, {"accepted", r.accepted}, {"dropped_no_match", r.dropped_no_match},
                     {"rejected_malformed", r.rejected_malformed}, {"inserted", r.inserted},
                     {"partial", r.partial}});
    throw;
  }
  out << dump(json{{"read", r.read}, {"accepted", r.accepted}, {"dropped_no_match", r.dropped_no_match},
                   {"rejected_malformed", r.rejected_malformed}, {"inserted", r.inserted},
                   {"partial", r.partial}});
  return kExitOk;
}

int cmd_analyze(const std::string& what, const Options& o, std::ostream& out) {
  Store store(o.data_dir, {.read_only = true});
  const auto category = category_option(o.category);
  const bool as_json = wants_json(o);
  std::string content;
  if (what == "ccf") {
    LagAnalysisParams p;
    p.collection_windows = window_options(o.windows);
    p.smoothing_window = o.window;
    p.max_lag = o.max_lag;
    p.min_overlap = o.min_overlap;
    const auto r = lag_analysis(store, p);
    content = as_json ? dump(json(r)) : to_csv(r);
  } else if (what == "timeseries") {
    const auto bucket = parse_bucket(o.bucket);
    if (!bucket) throw UsageError("--bucket must be hour or day");
    const auto s = volume_analysis(store, category, *bucket, window_options(o.windows));
    content = as_json ? dump(json(s)) : to_csv(s);
  } else if (what == "ccdf" || what == "powerlaw") {
    const auto metric = parse_metric(o.metric);
    if (!metric) throw UsageError("--metric must be a, n or p");
    const auto values = metric_values(store, category, *metric);
    if (what == "ccdf") {
      std::vector<std::uint64_t> kept;
      for (auto v : values)
        if (static_cast<double>(v) >= o.x_min) kept.push_back(v);
      const auto points = ccdf(kept);
      content = as_json ? dump(json{{"metric", o.metric}, {"points", points}}) : to_csv(points);
    } else {
      if (o.model != "discrete" && o.model != "continuous")
        throw UsageError("--model must be discrete or continuous");
      const auto fit =
          fit_power_law(values, o.x_min, o.model == "discrete" ? TailModel::kDiscrete : TailModel::kContinuous);
      content = as_json ? dump(json(fit)) : to_csv(fit);
    }
  } else if (what == "breakdown") {
    std::vector<ShareBreakdown> rows;
    if (o.population == "all" || o.population == "both")
      rows.push_back(breakdown_analysis(store, category, "all", o.fraction));
    if (o.population == "top" || o.population == "both")
      rows.push_back(breakdown_analysis(store, category, "top", o.fraction));
    content = as_json ? dump(json(rows)) : to_csv(rows);
  } else if (what == "stats") {
    const auto s = store.summary_stats(category);
    if (as_json) {
      content = dump(json(s));
    } else {
      content = "n_sites,n_tweets,n_users,n_urls\n" + std::to_string(s.n_sites) + ',' +
                std::to_string(s.n_tweets) + ',' + std::to_string(s.n_users) + ',' + std::to_string(s.n_urls) +
                '\n';
    }
  }
  emit(o.out, content, out);
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  const Corpus corpus = gen_corpus(o.spec);
  std::string tweets;
  for (const auto& line : corpus.lines) {
    tweets += line;
    tweets += '\n';
  }
  emit(o.tweets_out, tweets, out);
  if (!o.sites_out.empty()) emit(o.sites_out, sites_to_ndjson(corpus.sites), out);
  if (!o.manifest_out.empty()) emit(o.manifest_out, dump(corpus.manifest), out);
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
  if (!fs::is_directory(o.data_dir)) throw Error("data directory does not exist: " + o.data_dir);
  if (::access(o.data_dir.c_str(), W_OK) != 0) throw Error("data directory is not writable: " + o.data_dir);
  if (o.budget_ms <= 0) throw UsageError("--time-budget-ms must be positive");
  Store store(o.data_dir, {.read_only = true});
  ApiConfig config;
  config.listen_address = o.listen;
  config.data_dir = o.data_dir;
  config.time_budget = std::chrono::milliseconds{o.budget_ms};
  ApiServer server(store, config);
  const int port = server.bind();
  out << "listening on " << split_listen_address(o.listen).first << ':' << port << '\n' << std::flush;
  SignalStop on_signal([&] { server.stop(); });
  server.serve();
  return kExitOk;
}

int cmd_compact(const Options& o, std::ostream& out) {
  Store store(o.data_dir);
  store.compact();
  out << "compacted " << o.data_dir << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Track shares of fake-news and fact-checking articles", "sharetrack"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--data-dir", o.data_dir, "Store directory")->envname("SHARETRACK_DATA_DIR");
  app.add_flag("-v,--verbose", o.verbose, "Debug logging");

  auto add_crawl_opts = [&](CLI::App* c) {
    c->add_option("--max-depth", o.max_depth);
    c->add_option("--max-pages", o.max_pages);
    c->add_option("--delay-ms", o.delay_ms, "Minimum spacing between requests to one host");
    c->add_option("--parallel", o.parallel, "Sites crawled at once");
    c->add_flag("--ignore-robots", o.ignore_robots);
  };

  auto* sites = app.add_subcommand("sites", "Manage monitored sites")->require_subcommand(1);
  auto* sites_add = sites->add_subcommand("add", "Register a site");
  sites_add->add_option("--domain", o.domain)->required();
  sites_add->add_option("--category", o.category)->required()->check(CLI::IsMember({"fake_news", "fact_checking"}));
  sites_add->add_option("--rss-url", o.rss_url);
  sites_add->add_flag("--deep-crawl", o.crawl_now, "Deep-crawl the site right away");
  add_crawl_opts(sites_add);
  auto* sites_list = sites->add_subcommand("list", "List registered sites");
  sites_list->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));
  auto* sites_import = sites->add_subcommand("import", "Register every site in an NDJSON file");
  sites_import->add_option("--file", o.sites_file)->required();

  auto* crawl = app.add_subcommand("crawl", "Crawl registered sites")->require_subcommand(1);
  auto* crawl_deep = crawl->add_subcommand("deep", "Depth-first crawl of a site (all sites without --domain)");
  crawl_deep->add_option("--domain", o.domain);
  add_crawl_opts(crawl_deep);
  auto* crawl_light = crawl->add_subcommand("light", "Check feeds once");
  crawl_light->add_option("--domain", o.domain);
  add_crawl_opts(crawl_light);
  auto* crawl_schedule = crawl->add_subcommand("schedule", "Check every feed periodically");
  crawl_schedule->add_option("--interval-hours", o.interval_hours)->check(CLI::PositiveNumber);
  crawl_schedule->add_option("--for-hours", o.for_hours, "Stop after this long (0: until interrupted)");
  add_crawl_opts(crawl_schedule);

  auto* ingest_cmd = app.add_subcommand("ingest", "Filter a tweet stream into the store");
  ingest_cmd->add_option("--tweets", o.tweets, "NDJSON tweets, '-' for stdin")->required();
  ingest_cmd->add_option("--sites", o.sites_file, "NDJSON sites to register first");

  auto* analyze = app.add_subcommand("analyze", "Run an analysis")->require_subcommand(1);
  std::vector<std::pair<std::string, CLI::App*>> analyses;
  for (const char* name : {"ccf", "ccdf", "breakdown", "timeseries", "powerlaw", "stats"}) {
    auto* a = analyze->add_subcommand(name);
    a->add_option("--out", o.out, "Output path, '-' for stdout")->required();
    a->add_option("--format", o.format, "csv or json (default: from --out)")->check(CLI::IsMember({"csv", "json"}));
    a->add_option("--category", o.category)->check(CLI::IsMember({"fake_news", "fact_checking", "all"}));
    analyses.emplace_back(name, a);
  }
  auto* a_ccf = analyses[0].second;
  a_ccf->description("Lagged cross-correlation of fake-news and fact-checking volume");
  a_ccf->add_option("--max-lag", o.max_lag)->check(CLI::PositiveNumber);
  a_ccf->add_option("--min-overlap", o.min_overlap)->check(CLI::Range(2, 1 << 30));
  a_ccf->add_option("--window", o.window, "Moving-average window in hours")->check(CLI::PositiveNumber);
  a_ccf->add_option("--collection-window", o.windows, "<iso>/<iso>, repeatable");
  auto* a_ccdf = analyses[1].second;
  a_ccdf->description("CCDF of a popularity metric");
  a_ccdf->add_option("--metric", o.metric)->check(CLI::IsMember({"a", "n", "p"}));
  a_ccdf->add_option("--x-min", o.x_min, "Drop values below this")->default_val(0.0);
  auto* a_breakdown = analyses[2].second;
  a_breakdown->description("Tweet-type counts and original/retweet ratio");
  a_breakdown->add_option("--population", o.population)->check(CLI::IsMember({"all", "top", "both"}));
  a_breakdown->add_option("--fraction", o.fraction, "Share of most active users for 'top'")
      ->check(CLI::Range(0.0, 1.0));
  auto* a_series = analyses[3].second;
  a_series->description("Tweet volume per bucket");
  a_series->add_option("--bucket", o.bucket)->check(CLI::IsMember({"hour", "day"}));
  a_series->add_option("--collection-window", o.windows, "<iso>/<iso>, repeatable");
  auto* a_powerlaw = analyses[4].second;
  a_powerlaw->description("Maximum-likelihood tail exponent of a popularity metric");
  a_powerlaw->add_option("--metric", o.metric)->check(CLI::IsMember({"a", "n", "p"}));
  a_powerlaw->add_option("--x-min", o.x_min)->check(CLI::PositiveNumber);
  a_powerlaw->add_option("--model", o.model)->check(CLI::IsMember({"discrete", "continuous"}));
  analyses[5].second->description("Summary counts");

  auto* synth = app.add_subcommand("synth", "Generate synthetic data")->require_subcommand(1);
  auto* corpus = synth->add_subcommand("corpus", "Synthetic tweet corpus with planted properties");
  corpus->add_option("--tweets-out", o.tweets_out)->required();
  corpus->add_option("--sites-out", o.sites_out);
  corpus->add_option("--manifest-out", o.manifest_out);
  corpus->add_option("--n-tweets", o.spec.n_tweets);
  corpus->add_option("--n-users", o.spec.n_users, "User pool cap");
  corpus->add_option("--n-urls", o.spec.n_urls);
  corpus->add_option("--gamma", o.spec.activity_gamma, "Activity exponent");
  corpus->add_option("--lag-hours", o.spec.lag_hours);
  corpus->add_option("--duration-hours", o.spec.duration_hours);
  corpus->add_option("--fact-fraction", o.spec.fact_fraction);
  corpus->add_option("--seed", o.spec.seed);

  auto* serve = app.add_subcommand("serve", "Read-only HTTP JSON API");
  serve->add_option("--listen", o.listen, "host:port");
  serve->add_option("--time-budget-ms", o.budget_ms);

  auto* compact = app.add_subcommand("compact", "Rewrite journals without superseded records");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  spdlog::set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);
  try {
    if (sites_add->parsed()) return cmd_sites_add(o, out);
    if (sites_list->parsed()) return cmd_sites_list(o, out);
    if (sites_import->parsed()) return cmd_sites_import(o, out);
    if (crawl_deep->parsed()) return cmd_crawl_deep(o, out);
    if (crawl_light->parsed()) return cmd_crawl_light(o, out);
    if (crawl_schedule->parsed()) return cmd_crawl_schedule(o, out);
    if (ingest_cmd->parsed()) return cmd_ingest(o, out);
    for (const auto& [name, sub] : analyses)
      if (sub->parsed()) return cmd_analyze(name, o, out);
    if (corpus->parsed()) return cmd_synth(o, out);
    if (serve->parsed()) return cmd_serve(o, out);
    if (compact->parsed()) return cmd_compact(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  err << "error: no command\n";
  return kExitUsage;
}

}  // namespace sharetrack
