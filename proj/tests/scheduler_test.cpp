#include <gtest/gtest.h>

#include <map>

#include "sharetrack/scheduler.hpp"

namespace sharetrack {
namespace {

using namespace std::chrono_literals;

const Instant kStart{std::chrono::sys_days{std::chrono::year{2016} / 1 / 1}};

std::vector<Site> sites(int n) {
  std::vector<Site> out;
  for (int i = 0; i < n; ++i) out.push_back({"s" + std::to_string(i) + ".example", SiteCategory::kFakeNews, {}, {}});
  return out;
}

TEST(Scheduler, TwoSitesSixHours) {
  SimulatedClock clock(kStart);
  std::map<std::string, int> runs;
  LightCrawlScheduler s(sites(2), clock, 2h, [&](const Site& site) { ++runs[site.domain]; });
  s.run_until(kStart + 6h);
  EXPECT_EQ(runs["s0.example"], 3);
  EXPECT_EQ(runs["s1.example"], 3);
  EXPECT_EQ(clock.now(), kStart + 6h);
}

TEST(Scheduler, FiresExactlyEveryInterval) {
  SimulatedClock clock(kStart);
  LightCrawlScheduler s(sites(1), clock, 2h, [&](const Site&) { clock.advance(7min); });
  s.run_until(kStart + 48h);
  const auto& h = s.history();
  ASSERT_EQ(h.size(), 24u);
  for (std::size_t i = 0; i < h.size(); ++i) {
    EXPECT_EQ(h[i].slot, kStart + 2h * static_cast<int>(i));
    EXPECT_EQ(h[i].started, h[i].slot);
  }
}

TEST(Scheduler, OverrunSkipsInsteadOfOverlapping) {
  SimulatedClock clock(kStart);
  int n = 0;
  LightCrawlScheduler s(sites(1), clock, 2h, [&](const Site&) {
    if (n++ == 0) clock.advance(3h);
  });
  s.run_until(kStart + 5h);
  ASSERT_EQ(s.history().size(), 2u);
  EXPECT_EQ(s.history()[0].finished, kStart + 3h);
  EXPECT_EQ(s.history()[1].started, kStart + 4h);
}

TEST(Scheduler, StaggeredStartsAreDistinct) {
  SimulatedClock clock(kStart);
  LightCrawlScheduler s(sites(7), clock, 2h, [](const Site&) {});
  s.run_until(kStart + 2h);
  const auto& h = s.history();
  ASSERT_EQ(h.size(), 7u);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LT(h[i - 1].started, h[i].started);
  EXPECT_EQ(h[1].slot - h[0].slot, std::chrono::milliseconds{std::chrono::seconds{7200 / 7}});
}

TEST(Scheduler, FailuresAreRecordedAndRetried) {
  SimulatedClock clock(kStart);
  int calls = 0;
  LightCrawlScheduler s(sites(1), clock, 2h, [&](const Site&) {
    if (++calls == 1) throw std::runtime_error("feed down");
  });
  s.run_until(kStart + 4h + 1s);
  ASSERT_EQ(s.history().size(), 3u);
  EXPECT_FALSE(s.history()[0].ok);
  EXPECT_TRUE(s.history()[1].ok);
}

TEST(Scheduler, EmptySiteListIdles) {
  SimulatedClock clock(kStart);
  LightCrawlScheduler s({}, clock, 2h, [](const Site&) { FAIL(); });
  s.run_until(kStart + 10h);
  EXPECT_TRUE(s.history().empty());
  EXPECT_EQ(clock.now(), kStart + 10h);
}

TEST(Scheduler, StopTokenEndsRun) {
  SimulatedClock clock(kStart);
  std::stop_source stop;
  int n = 0;
  LightCrawlScheduler s(sites(1), clock, 2h, [&](const Site&) {
    if (++n == 3) stop.request_stop();
  });
  s.run(stop.get_token());
  EXPECT_EQ(n, 3);
}

}  // namespace
}  // namespace sharetrack
