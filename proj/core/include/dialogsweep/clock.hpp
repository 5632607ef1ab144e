#pragma once

#include <atomic>
#include <chrono>

namespace dialogsweep {

/// Monotonic time source in seconds. Injected wherever time is measured so
/// tests can substitute a manual clock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_s() const = 0;
};

class SteadyClock final : public Clock {
 public:
  SteadyClock() : origin_(std::chrono::steady_clock::now()) {}

  double now_s() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
  }

 private:
  std::chrono::steady_clock::time_point origin_;
};

/// Advances only when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(double start_s = 0.0) : now_(start_s) {}

  double now_s() const override { return now_.load(); }
  void advance(double seconds) {
    double cur = now_.load();
    while (!now_.compare_exchange_weak(cur, cur + seconds)) {
    }
  }

 private:
  std::atomic<double> now_;
};

}  // namespace dialogsweep
