#include "sharetrack/scheduler.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

namespace sharetrack {

LightCrawlScheduler::LightCrawlScheduler(std::vector<Site> sites, Clock& clock,
                                         std::chrono::milliseconds interval, CrawlFn crawl)
    : sites_(std::move(sites)), clock_(clock), interval_(interval), crawl_(std::move(crawl)) {
  const Instant start = clock_.now();
  const auto n = static_cast<std::int64_t>(sites_.size());
  for (std::int64_t i = 0; i < n; ++i) {
    auto offset = std::chrono::floor<std::chrono::seconds>(interval_ * i / n);
    next_slot_.push_back(start + offset);
  }
}

void LightCrawlScheduler::run_until(Instant deadline) {
  for (;;) {
    auto it = std::min_element(next_slot_.begin(), next_slot_.end());
    if (it == next_slot_.end() || *it >= deadline) break;
    const auto i = static_cast<std::size_t>(it - next_slot_.begin());
    const Instant slot = *it;
    clock_.sleep_until(slot);

    ScheduledRun run{sites_[i].domain, slot, clock_.now(), {}, true};
    try {
      crawl_(sites_[i]);
    } catch (const std::exception& e) {
      run.ok = false;
      spdlog::warn("light crawl of {} failed: {}", sites_[i].domain, e.what());
    }
    run.finished = clock_.now();
    history_.push_back(run);

    Instant next = slot + interval_;
    while (next <= run.started || next < run.finished) next += interval_;
    next_slot_[i] = next;
  }
  clock_.sleep_until(deadline);
}

void LightCrawlScheduler::run(std::stop_token stop) {
  while (!stop.stop_requested()) run_until(clock_.now() + std::chrono::seconds{1});
}

}  // namespace sharetrack
