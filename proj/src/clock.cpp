#include "sharetrack/clock.hpp"

#include <thread>

namespace sharetrack {

Instant SystemClock::now() const {
  return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

void SystemClock::sleep_until(Instant t) { std::this_thread::sleep_until(t); }

Instant SimulatedClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void SimulatedClock::sleep_until(Instant t) {
  std::lock_guard lock(mu_);
  if (t > now_) now_ = t;
}

void SimulatedClock::advance(std::chrono::milliseconds d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

}  // namespace sharetrack
