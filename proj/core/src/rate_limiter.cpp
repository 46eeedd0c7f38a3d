#include "bulkdns/rate_limiter.hpp"

#include <algorithm>
#include <stdexcept>

#include <boost/asio/redirect_error.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/this_coro.hpp>
#include <boost/asio/use_awaitable.hpp>

namespace bulkdns {

RateLimiter::RateLimiter(double per_second) : per_second_(per_second), interval_(0) {
  if (per_second < 0) throw std::invalid_argument("rate limit must be >= 0");
  if (per_second > 0) {
    interval_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / per_second));
    if (interval_.count() == 0) interval_ = Clock::duration(1);
  }
}

RateLimiter::Clock::time_point RateLimiter::reserve(Clock::time_point now) {
  if (unlimited()) return now;
  std::lock_guard lock(mu_);
  auto slot = std::max(now, next_);
  next_ = slot + interval_;
  return slot;
}

boost::asio::awaitable<void> RateLimiter::acquire() {
  if (unlimited()) co_return;
  auto slot = reserve(Clock::now());
  if (slot <= Clock::now()) co_return;
  boost::asio::steady_timer timer(co_await boost::asio::this_coro::executor);
  timer.expires_at(slot);
  boost::system::error_code ec;
  co_await timer.async_wait(boost::asio::redirect_error(boost::asio::use_awaitable, ec));
}

}  // namespace bulkdns
