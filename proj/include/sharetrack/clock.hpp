#pragma once

#include <chrono>
#include <mutex>

#include "sharetrack/time.hpp"

namespace sharetrack {

using Instant = std::chrono::sys_time<std::chrono::milliseconds>;

// Injectable time source. Crawl politeness and the light-crawl scheduler go
// through this so tests can run days of schedule in microseconds.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Instant now() const = 0;
  virtual void sleep_until(Instant t) = 0;

  void sleep_for(std::chrono::milliseconds d) { sleep_until(now() + d); }
  Timestamp now_seconds() const { return std::chrono::floor<std::chrono::seconds>(now()); }
};

class SystemClock final : public Clock {
 public:
  Instant now() const override;
  void sleep_until(Instant t) override;
};

// Time only moves when someone sleeps or calls advance().
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(Instant start = Instant{}) : now_(start) {}

  Instant now() const override;
  void sleep_until(Instant t) override;
  void advance(std::chrono::milliseconds d);

 private:
  mutable std::mutex mu_;
  Instant now_;
};

}  // namespace sharetrack
