#pragma once

#include <chrono>
#include <mutex>

#include <boost/asio/awaitable.hpp>

namespace bulkdns {

/// Global launch-rate limiter shared by every worker.
///
/// Permits are spaced evenly at 1/N seconds, so any one-second window admits
/// at most N+1 launches. A rate of 0 disables limiting.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double per_second);

  bool unlimited() const { return interval_.count() == 0; }
  double rate() const { return per_second_; }

  /// Books the next permit and returns the instant it becomes valid.
  Clock::time_point reserve(Clock::time_point now);

  /// Suspends the calling coroutine until its permit is valid.
  boost::asio::awaitable<void> acquire();

 private:
  double per_second_;
  Clock::duration interval_;
  std::mutex mu_;
  Clock::time_point next_{};
};

}  // namespace bulkdns
