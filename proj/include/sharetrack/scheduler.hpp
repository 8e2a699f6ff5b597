#pragma once

#include <chrono>
#include <functional>
#include <stop_token>
#include <string>
#include <vector>

#include "sharetrack/clock.hpp"
#include "sharetrack/records.hpp"

namespace sharetrack {

struct ScheduledRun {
  std::string domain;
  Instant slot;      // nominal start
  Instant started;
  Instant finished;
  bool ok = true;
};

// Periodic light crawls. Site i's slots are start + offset_i + k * interval
// with offset_i = i * interval / n rounded down to whole seconds, so sites
// never share a start second when interval >= n seconds. Runs are executed
// one at a time; after a run, the next slot is the first one strictly after
// its start and not before its finish, so a slow run skips slots instead of
// overlapping itself. A throwing crawl is logged and retried at its next slot.
class LightCrawlScheduler {
 public:
  using CrawlFn = std::function<void(const Site&)>;

  LightCrawlScheduler(std::vector<Site> sites, Clock& clock, std::chrono::milliseconds interval,
                      CrawlFn crawl);

  // Executes every run whose slot is before `deadline`, then sleeps until
  // the deadline.
  void run_until(Instant deadline);
  // Runs until a stop is requested.
  void run(std::stop_token stop);

  const std::vector<ScheduledRun>& history() const { return history_; }

 private:
  std::vector<Site> sites_;
  Clock& clock_;
  std::chrono::milliseconds interval_;
  CrawlFn crawl_;
  std::vector<Instant> next_slot_;
  std::vector<ScheduledRun> history_;
};

}  // namespace sharetrack
