#include "sharetrack/store.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>
#include <unordered_set>

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <json.hpp>
#include <spdlog/spdlog.h>

namespace sharetrack {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string errno_text() { return std::strerror(errno); }

void write_all(int fd, std::string_view data, const fs::path& path) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageFailure("write to " + path.string() + " failed: " + errno_text());
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void write_file_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageFailure("cannot create " + tmp.string() + ": " + errno_text());
  try {
    write_all(fd, content, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::fsync(fd);
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw StorageFailure("cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace

class Store::Journal {
 public:
  Journal(fs::path path, bool writer, bool sync) : path_(std::move(path)), writer_(writer), sync_(sync) {}
  ~Journal() { close_fd(); }

  const fs::path& path() const { return path_; }

  void open_for_append() {
    close_fd();
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw StorageFailure("cannot open " + path_.string() + ": " + errno_text());
  }

  void append(const std::string& line) {
    std::string buf = line;
    buf.push_back('\n');
    write_all(fd_, buf, path_);
    if (sync_ && ::fdatasync(fd_) != 0)
      throw StorageFailure("fdatasync " + path_.string() + " failed: " + errno_text());
  }

  // Reads complete lines from `offset_` on. A trailing fragment without a
  // newline is left unread; a writer truncates it away.
  template <typename Fn>
  std::uint64_t read(bool from_start, Fn&& on_line) {
    struct stat st {};
    if (::stat(path_.c_str(), &st) != 0) {
      offset_ = 0;
      inode_ = 0;
      return 0;
    }
    if (from_start || static_cast<std::uint64_t>(st.st_ino) != inode_ ||
        static_cast<std::uint64_t>(st.st_size) < offset_) {
      offset_ = 0;
    }
    inode_ = static_cast<std::uint64_t>(st.st_ino);
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw StorageFailure("cannot read " + path_.string());
    in.seekg(static_cast<std::streamoff>(offset_));
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto last_nl = data.rfind('\n');
    const std::size_t complete = last_nl == std::string::npos ? 0 : last_nl + 1;
    std::size_t pos = 0;
    std::uint64_t line_no = 0;
    while (pos < complete) {
      const auto nl = data.find('\n', pos);
      std::string_view line(data.data() + pos, nl - pos);
      ++line_no;
      if (!line.empty()) on_line(line, line_no);
      pos = nl + 1;
    }
    const std::uint64_t partial = data.size() - complete;
    offset_ += complete;
    if (partial > 0 && writer_) {
      std::error_code ec;
      fs::resize_file(path_, offset_, ec);
      if (ec) throw StorageFailure("cannot truncate " + path_.string() + ": " + ec.message());
      spdlog::warn("{}: discarded {} bytes of partial trailing record", path_.string(), partial);
    }
    return partial;
  }

  void reset_after_rewrite() {
    offset_ = 0;
    inode_ = 0;
  }

 private:
  void close_fd() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  fs::path path_;
  bool writer_;
  bool sync_;
  int fd_ = -1;
  std::uint64_t offset_ = 0;
  std::uint64_t inode_ = 0;
};

Store::Store(fs::path dir, StoreOptions options) : dir_(std::move(dir)), options_(options) {
  const bool writer = !options_.read_only;
  if (writer) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw StorageFailure("cannot create store directory " + dir_.string() + ": " + ec.message());
    const fs::path lock = dir_ / "LOCK";
    lock_fd_ = ::open(lock.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) throw StorageFailure("cannot open " + lock.string() + ": " + errno_text());
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(lock_fd_);
      lock_fd_ = -1;
      throw StorageFailure("store " + dir_.string() + " is locked by another writer");
    }
  } else if (!fs::is_directory(dir_)) {
    throw StorageFailure("store directory does not exist: " + dir_.string());
  }
  sites_journal_ = std::make_unique<Journal>(dir_ / "sites.ndjson", writer, options_.sync);
  articles_journal_ = std::make_unique<Journal>(dir_ / "articles.ndjson", writer, options_.sync);
  tweets_journal_ = std::make_unique<Journal>(dir_ / "tweets.ndjson", writer, options_.sync);
  load_all();
  if (writer) {
    sites_journal_->open_for_append();
    articles_journal_->open_for_append();
    tweets_journal_->open_for_append();
  }
}

Store::~Store() {
  if (!options_.read_only) {
    try {
      std::unique_lock lock(mu_);
      write_manifest();
    } catch (const std::exception& e) {
      spdlog::error("writing manifest failed: {}", e.what());
    }
  }
  sites_journal_.reset();
  articles_journal_.reset();
  tweets_journal_.reset();
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

void Store::require_writer() const {
  if (options_.read_only) throw StorageFailure("store opened read-only");
}

void Store::read_journal(Journal& j, bool from_start) {
  const auto name = j.path().filename().string();
  auto parse = [&](std::string_view line, std::uint64_t line_no) {
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw StorageFailure(fmt::format("{} line {}: corrupt record: {}", name, line_no, e.what()));
    }
    try {
      if (&j == sites_journal_.get()) {
        apply_site(doc.get<Site>());
      } else if (&j == articles_journal_.get()) {
        apply_article(doc.get<ArticleRecord>());
      } else {
        apply_tweet(doc.get<TweetRecord>());
      }
    } catch (const StorageFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw StorageFailure(fmt::format("{} line {}: invalid record: {}", name, line_no, e.what()));
    }
  };
  recovery_.discarded_bytes += j.read(from_start, parse);
}

void Store::load_all() {
  std::unique_lock lock(mu_);
  sites_.clear();
  site_order_.clear();
  articles_.clear();
  article_order_.clear();
  tweets_.clear();
  tweet_index_.clear();
  last_seq_ = 0;
  recovery_ = {};
  read_journal(*sites_journal_, true);
  read_journal(*articles_journal_, true);
  read_journal(*tweets_journal_, true);
  recovery_.sites = sites_.size();
  recovery_.articles = articles_.size();
  recovery_.tweets = tweets_.size();

  const fs::path manifest = dir_ / "manifest.json";
  if (fs::exists(manifest)) {
    try {
      std::ifstream in(manifest);
      const json m = json::parse(in);
      const auto expected = m.at("counts").at("tweets").get<std::uint64_t>();
      if (expected > tweets_.size())
        spdlog::warn("store {}: manifest lists {} tweets, journal replay recovered {}", dir_.string(),
                     expected, tweets_.size());
    } catch (const std::exception& e) {
      spdlog::warn("store {}: unreadable manifest ignored: {}", dir_.string(), e.what());
    }
  }
}

void Store::refresh() {
  if (!options_.read_only) return;  // a writer already holds everything
  std::unique_lock lock(mu_);
  read_journal(*sites_journal_, false);
  read_journal(*articles_journal_, false);
  read_journal(*tweets_journal_, false);
}

void Store::apply_site(Site s) {
  auto it = sites_.find(s.domain);
  if (it == sites_.end()) {
    site_order_.push_back(s.domain);
    sites_.emplace(s.domain, std::move(s));
  } else if (s.rss_url) {
    it->second.rss_url = s.rss_url;
  }
}

bool Store::apply_article(const ArticleRecord& a) {
  auto it = articles_.find(a.canonical_url.full);
  if (it == articles_.end()) {
    ArticleRecord copy = a;
    std::stable_sort(copy.revisions.begin(), copy.revisions.end(),
                     [](const Revision& x, const Revision& y) { return x.updated_at < y.updated_at; });
    copy.revisions.erase(std::unique(copy.revisions.begin(), copy.revisions.end(),
                                     [](const Revision& x, const Revision& y) {
                                       return x.updated_at == y.updated_at;
                                     }),
                         copy.revisions.end());
    if (!copy.revisions.empty()) copy.title = copy.revisions.back().title;
    article_order_.push_back(copy.canonical_url.full);
    articles_.emplace(copy.canonical_url.full, std::move(copy));
    return true;
  }
  ArticleRecord& stored = it->second;
  bool changed = false;
  for (const auto& r : a.revisions) {
    auto pos = std::lower_bound(stored.revisions.begin(), stored.revisions.end(), r.updated_at,
                                [](const Revision& x, Timestamp t) { return x.updated_at < t; });
    if (pos != stored.revisions.end() && pos->updated_at == r.updated_at) continue;
    stored.revisions.insert(pos, r);
    changed = true;
  }
  if (!stored.published_at && a.published_at) stored.published_at = a.published_at;
  if (changed) stored.title = stored.revisions.back().title;
  return changed;
}

void Store::apply_tweet(TweetRecord t) {
  if (tweet_index_.contains(t.id)) return;
  last_seq_ = std::max(last_seq_, t.seq);
  tweet_index_.emplace(t.id, tweets_.size());
  tweets_.push_back(std::move(t));
}

Site Store::put_site(Site site) {
  require_writer();
  const CanonicalUrl canon = canonicalize(site.domain);
  if (canon.full != site.domain || !canon.path.empty())
    throw InvariantViolation("site domain is not canonical: " + site.domain);
  std::unique_lock lock(mu_);
  auto it = sites_.find(site.domain);
  if (it != sites_.end()) {
    if (it->second.category != site.category)
      throw InvariantViolation("site " + site.domain + " already registered as " +
                               std::string(to_string(it->second.category)));
    if (site.rss_url && site.rss_url != it->second.rss_url) {
      Site updated = it->second;
      updated.rss_url = site.rss_url;
      sites_journal_->append(json(updated).dump());
      it->second.rss_url = site.rss_url;
    }
    return it->second;
  }
  sites_journal_->append(json(site).dump());
  apply_site(site);
  return site;
}

ArticleRecord Store::put_article(const ArticleRecord& article) {
  require_writer();
  if (!matches_site(article.canonical_url, article.site_domain))
    throw InvariantViolation("article " + article.canonical_url.full + " is not on site " +
                             article.site_domain);
  std::unique_lock lock(mu_);
  const std::string& key = article.canonical_url.full;
  auto existing = articles_.find(key);
  if (existing == articles_.end()) {
    articles_journal_->append(json(article).dump());
    apply_article(article);
    return articles_.at(key);
  }
  // journal only the revisions that are new, so replay reproduces the merge
  ArticleRecord delta = article;
  delta.revisions.clear();
  for (const auto& r : article.revisions) {
    auto same_time = [&](const Revision& x) { return x.updated_at == r.updated_at; };
    if (std::none_of(existing->second.revisions.begin(), existing->second.revisions.end(), same_time) &&
        std::none_of(delta.revisions.begin(), delta.revisions.end(), same_time))
      delta.revisions.push_back(r);
  }
  if (delta.revisions.empty()) return existing->second;
  articles_journal_->append(json(delta).dump());
  apply_article(delta);
  return articles_.at(key);
}

std::pair<TweetRecord, bool> Store::put_tweet(TweetRecord tweet) {
  require_writer();
  if (tweet.id.empty() || tweet.user_id.empty())
    throw InvariantViolation("tweet id and user_id must be non-empty");
  if (tweet.matches.empty()) throw InvariantViolation("tweet " + tweet.id + " has no matched site");
  std::unique_lock lock(mu_);
  if (auto it = tweet_index_.find(tweet.id); it != tweet_index_.end()) return {tweets_[it->second], false};
  for (const auto& m : tweet.matches) {
    if (!sites_.contains(m.site_domain))
      throw InvariantViolation("tweet " + tweet.id + " references unmonitored site " + m.site_domain);
    if (!matches_site(m.url, m.site_domain))
      throw InvariantViolation("url " + m.url.full + " does not belong to " + m.site_domain);
  }
  tweet.seq = last_seq_ + 1;
  tweets_journal_->append(json(tweet).dump());
  apply_tweet(tweet);
  return {std::move(tweet), true};
}

std::optional<Site> Store::find_site(const std::string& domain) const {
  std::shared_lock lock(mu_);
  auto it = sites_.find(domain);
  if (it == sites_.end()) return std::nullopt;
  return it->second;
}

std::vector<Site> Store::sites() const {
  std::shared_lock lock(mu_);
  std::vector<Site> out;
  out.reserve(site_order_.size());
  for (const auto& d : site_order_) out.push_back(sites_.at(d));
  return out;
}

std::optional<ArticleRecord> Store::find_article(const std::string& canonical_full) const {
  std::shared_lock lock(mu_);
  auto it = articles_.find(canonical_full);
  if (it == articles_.end()) return std::nullopt;
  return it->second;
}

std::vector<ArticleRecord> Store::articles() const {
  std::shared_lock lock(mu_);
  std::vector<ArticleRecord> out;
  out.reserve(article_order_.size());
  for (const auto& k : article_order_) out.push_back(articles_.at(k));
  return out;
}

std::optional<TweetRecord> Store::find_tweet(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = tweet_index_.find(id);
  if (it == tweet_index_.end()) return std::nullopt;
  return tweets_[it->second];
}

std::vector<TweetRecord> Store::query_tweets(const TweetQuery& q) const {
  if (q.window && !(q.window->first < q.window->second))
    throw BadWindow("query window must satisfy t0 < t1");
  std::vector<std::string> keywords;
  for (const auto& k : q.url_keywords) keywords.push_back(ascii_lower(k));

  std::shared_lock lock(mu_);
  std::vector<TweetRecord> out;
  for (const auto& t : tweets_) {
    if (q.window && (t.created_at < q.window->first || t.created_at >= q.window->second)) continue;
    std::vector<UrlMatch> kept;
    for (const auto& m : t.matches) {
      if (q.category) {
        auto site = sites_.find(m.site_domain);
        if (site == sites_.end() || site->second.category != *q.category) continue;
      }
      kept.push_back(m);
    }
    if (kept.empty()) continue;
    if (!keywords.empty()) {
      const bool hit = std::any_of(kept.begin(), kept.end(),
                                   [&](const UrlMatch& m) { return keyword_match(m.url, keywords); });
      if (!hit) continue;
    }
    TweetRecord copy = t;
    copy.matches = std::move(kept);
    out.push_back(std::move(copy));
  }
  lock.unlock();
  std::stable_sort(out.begin(), out.end(), [](const TweetRecord& a, const TweetRecord& b) {
    return a.created_at != b.created_at ? a.created_at < b.created_at : a.seq < b.seq;
  });
  return out;
}

SummaryStats Store::summary_stats(std::optional<SiteCategory> category) const {
  std::shared_lock lock(mu_);
  SummaryStats s;
  for (const auto& [domain, site] : sites_)
    if (!category || site.category == *category) ++s.n_sites;
  std::unordered_set<std::string> users;
  std::unordered_set<std::string> urls;
  for (const auto& t : tweets_) {
    bool counted = false;
    for (const auto& m : t.matches) {
      auto site = sites_.find(m.site_domain);
      if (category && (site == sites_.end() || site->second.category != *category)) continue;
      counted = true;
      urls.insert(m.url.full);
    }
    if (!counted) continue;
    ++s.n_tweets;
    users.insert(t.user_id);
  }
  s.n_users = users.size();
  s.n_urls = urls.size();
  return s;
}

std::uint64_t Store::tweet_count() const {
  std::shared_lock lock(mu_);
  return tweets_.size();
}

std::uint64_t Store::last_seq() const {
  std::shared_lock lock(mu_);
  return last_seq_;
}

RecoveryReport Store::recovery() const {
  std::shared_lock lock(mu_);
  return recovery_;
}

void Store::write_manifest() {
  json m{{"version", 1},
         {"counts", {{"sites", sites_.size()}, {"articles", articles_.size()}, {"tweets", tweets_.size()}}},
         {"last_seq", last_seq_},
         {"journals", {"sites.ndjson", "articles.ndjson", "tweets.ndjson"}}};
  write_file_atomically(dir_ / "manifest.json", m.dump(2) + "\n");
}

void Store::compact() {
  require_writer();
  std::unique_lock lock(mu_);
  std::string sites_text;
  for (const auto& d : site_order_) sites_text += json(sites_.at(d)).dump() + "\n";
  std::string articles_text;
  for (const auto& k : article_order_) articles_text += json(articles_.at(k)).dump() + "\n";
  std::string tweets_text;
  for (const auto& t : tweets_) tweets_text += json(t).dump() + "\n";
  write_file_atomically(sites_journal_->path(), sites_text);
  write_file_atomically(articles_journal_->path(), articles_text);
  write_file_atomically(tweets_journal_->path(), tweets_text);
  for (Journal* j : {sites_journal_.get(), articles_journal_.get(), tweets_journal_.get()}) {
    j->open_for_append();
    j->reset_after_rewrite();
  }
  write_manifest();
}

}  // namespace sharetrack
