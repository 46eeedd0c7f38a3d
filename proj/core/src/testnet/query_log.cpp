#include <algorithm>

#include "bulkdns/testnet.hpp"

namespace bulkdns::testnet {

namespace {

std::string count_key(const DomainName& name, std::uint16_t type) {
  return name.canonical() + '/' + std::to_string(type);
}

}  // namespace

void QueryLog::record(const Question& q, std::string_view transport, std::chrono::steady_clock::time_point at) {
  std::lock_guard lock(mutex_);
  entries_.push_back(LoggedQuery{at, q, std::string(transport)});
  ++counts_[count_key(q.name, q.type)];
  if (transport == "tcp") {
    ++tcp_;
  } else {
    ++udp_;
  }
}

void QueryLog::note_tcp_connection() {
  std::lock_guard lock(mutex_);
  ++tcp_connections_;
}

std::uint64_t QueryLog::count(const DomainName& name, std::uint16_t type) const {
  std::lock_guard lock(mutex_);
  auto it = counts_.find(count_key(name, type));
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t QueryLog::total() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::uint64_t QueryLog::udp_queries() const {
  std::lock_guard lock(mutex_);
  return udp_;
}

std::uint64_t QueryLog::tcp_queries() const {
  std::lock_guard lock(mutex_);
  return tcp_;
}

std::uint64_t QueryLog::tcp_connections() const {
  std::lock_guard lock(mutex_);
  return tcp_connections_;
}

std::vector<LoggedQuery> QueryLog::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::uint64_t QueryLog::max_arrivals_in_window(std::chrono::steady_clock::duration window) const {
  std::vector<std::chrono::steady_clock::time_point> times;
  {
    std::lock_guard lock(mutex_);
    times.reserve(entries_.size());
    for (const auto& e : entries_) times.push_back(e.at);
  }
  std::sort(times.begin(), times.end());
  std::uint64_t best = 0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < times.size(); ++hi) {
    while (times[hi] - times[lo] >= window) ++lo;
    best = std::max<std::uint64_t>(best, hi - lo + 1);
  }
  return best;
}

void QueryLog::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
  counts_.clear();
  udp_ = tcp_ = tcp_connections_ = 0;
}

std::string CountReport::to_string() const {
  if (ok) return "ok";
  std::string out;
  for (const auto& d : diffs) {
    if (!out.empty()) out += "; ";
    out += d;
  }
  return out;
}

CountReport assert_counts(const QueryLog& log, const CountExpectations& expected) {
  CountReport report;
  auto check = [&](const std::string& what, std::uint64_t actual, std::uint64_t want) {
    if (actual != want) {
      report.ok = false;
      report.diffs.push_back(what + ": expected " + std::to_string(want) + ", got " + std::to_string(actual));
    }
  };
  for (const auto& [name, type, want] : expected.counts) {
    check(name.to_string() + "/" + type_to_string(type), log.count(name, type), want);
  }
  if (expected.total) check("total queries", log.total(), *expected.total);
  if (expected.udp_queries) check("udp queries", log.udp_queries(), *expected.udp_queries);
  if (expected.tcp_queries) check("tcp queries", log.tcp_queries(), *expected.tcp_queries);
  if (expected.tcp_connections) check("tcp connections", log.tcp_connections(), *expected.tcp_connections);
  if (expected.max_per_second) {
    auto peak = log.max_arrivals_in_window(std::chrono::seconds(1));
    if (peak > *expected.max_per_second) {
      report.ok = false;
      report.diffs.push_back("arrivals in one second: expected <= " + std::to_string(*expected.max_per_second) +
                             ", got " + std::to_string(peak));
    }
  }
  return report;
}

}  // namespace bulkdns::testnet
