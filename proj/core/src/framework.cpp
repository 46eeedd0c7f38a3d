#include "bulkdns/framework.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <condition_variable>
#include <deque>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include <boost/asio/co_spawn.hpp>
#include <boost/asio/detached.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/redirect_error.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/use_awaitable.hpp>

namespace bulkdns {

namespace asio = boost::asio;
using Clock = std::chrono::steady_clock;

std::optional<InputRecord> parse_input_line(std::string_view line) {
  auto trim = [](std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return std::string_view();
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
  };
  line = trim(line);
  if (line.empty()) return std::nullopt;
  InputRecord rec;
  auto comma = line.find(',');
  rec.name = std::string(trim(line.substr(0, comma)));
  if (comma != std::string_view::npos) {
    auto server = trim(line.substr(comma + 1));
    if (!server.empty()) rec.name_server = ServerAddress::parse(server);
  }
  return rec;
}

nlohmann::json to_json(const RunStats& stats) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [status, n] : stats.status_counts) counts[std::string(to_string(status))] = n;
  return {
      {"processed", stats.processed},
      {"successes", stats.successes},
      {"failures", stats.failures},
      {"statuses", counts},
      {"elapsed_seconds", stats.elapsed_seconds},
      {"rate", stats.rate},
      {"udp_sockets_created", stats.udp_sockets_created},
      {"tcp_connections", stats.tcp_connections},
  };
}

void emit_result(const LookupResult& result, std::ostream& output) {
  output << serialize_line(result) << '\n';
  if (!output) throw std::runtime_error("output write failed");
}

namespace {

struct WorkItem {
  InputRecord record;
  std::string error;  // set when the line could not be parsed
};

// Lines from the reader thread to worker coroutines on the io thread.
class InputQueue {
 public:
  InputQueue(asio::io_context& io, std::size_t capacity) : io_(io), capacity_(capacity) {}

  // Reader thread.
  void push(WorkItem record) {
    {
      std::unique_lock lock(mutex_);
      not_full_.wait(lock, [&] { return items_.size() < capacity_ || abandoned_; });
      if (abandoned_) return;
      items_.push_back(std::move(record));
    }
    asio::post(io_, [this] { wake(1); });
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    asio::post(io_, [this] { wake(waiters_.size()); });
  }

  // Unblocks the reader when the workers stop early.
  void abandon() {
    std::lock_guard lock(mutex_);
    abandoned_ = true;
    not_full_.notify_all();
  }

  // io thread.
  asio::awaitable<std::optional<WorkItem>> pop() {
    while (true) {
      {
        std::lock_guard lock(mutex_);
        if (!items_.empty()) {
          auto record = std::move(items_.front());
          items_.pop_front();
          not_full_.notify_one();
          co_return record;
        }
        if (closed_) co_return std::nullopt;
      }
      asio::steady_timer timer(io_, asio::steady_timer::time_point::max());
      waiters_.push_back(&timer);
      boost::system::error_code ec;
      co_await timer.async_wait(asio::redirect_error(asio::use_awaitable, ec));
      waiters_.erase(std::remove(waiters_.begin(), waiters_.end(), &timer), waiters_.end());
    }
  }

 private:
  void wake(std::size_t n) {
    n = std::min(n, waiters_.size());
    for (std::size_t i = 0; i < n; ++i) waiters_[i]->cancel();
    waiters_.erase(waiters_.begin(), waiters_.begin() + static_cast<std::ptrdiff_t>(n));
  }

  asio::io_context& io_;
  std::size_t capacity_;
  std::mutex mutex_;
  std::condition_variable not_full_;
  std::deque<WorkItem> items_;
  bool closed_ = false;
  bool abandoned_ = false;
  std::vector<asio::steady_timer*> waiters_;
};

// Serialized lines from the workers to the writer thread.
class OutputQueue {
 public:
  explicit OutputQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(std::string line) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return lines_.size() < capacity_ || failed_; });
    if (failed_) return;
    lines_.push_back(std::move(line));
    not_empty_.notify_one();
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
  }

  void drain_to(std::ostream& out) {
    std::vector<std::string> batch;
    while (true) {
      {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !lines_.empty() || closed_; });
        if (lines_.empty()) break;
        batch.assign(std::make_move_iterator(lines_.begin()), std::make_move_iterator(lines_.end()));
        lines_.clear();
        not_full_.notify_all();
      }
      for (const auto& line : batch) out << line << '\n';
      if (!out) {
        std::lock_guard lock(mutex_);
        failed_ = true;
        not_full_.notify_all();
        break;
      }
    }
    out.flush();
  }

  bool failed() {
    std::lock_guard lock(mutex_);
    return failed_;
  }

 private:
  std::size_t capacity_;
  std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<std::string> lines_;
  bool closed_ = false;
  bool failed_ = false;
};

struct Counters {
  std::atomic<std::uint64_t> processed{0};
  std::array<std::atomic<std::uint64_t>, kAllStatuses.size()> by_status{};
};

std::size_t status_index(Status status) {
  for (std::size_t i = 0; i < kAllStatuses.size(); ++i) {
    if (kAllStatuses[i] == status) return i;
  }
  return 0;
}

std::string status_line(const Counters& counters, Clock::time_point start) {
  double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  auto processed = counters.processed.load();
  std::uint64_t successes = counters.by_status[status_index(Status::kNoError)] +
                            counters.by_status[status_index(Status::kNxDomain)];
  char rate[32];
  std::snprintf(rate, sizeof rate, "%.1f", elapsed > 0 ? processed / elapsed : 0.0);
  return format_timestamp(std::chrono::system_clock::now()) + " processed=" + std::to_string(processed) +
         " rate=" + rate + "/s successes=" + std::to_string(successes) +
         " failures=" + std::to_string(processed - successes);
}

}  // namespace

RunStats run_scan(const ScanConfig& config, std::istream& input, std::ostream& output, std::ostream& log,
                  const ModuleRegistry& registry, std::chrono::milliseconds status_interval) {
  config.validate();
  const ModuleDescriptor* module = registry.find(config.module_name);
  if (!module) throw std::invalid_argument("unknown module: " + config.module_name);

  ResolverContext context(make_resolver_config(config), config.cache_size, config.rate_limit);
  ModuleOptions options{config.ipv4_lookup, config.ipv6_lookup, config.all_nameservers};
  const std::string klass = class_to_string(module->rrclass);

  asio::io_context io(1);
  auto worker_count = static_cast<std::size_t>(config.threads);
  InputQueue in_queue(io, std::max<std::size_t>(worker_count * 2, 1024));
  OutputQueue out_queue(std::max<std::size_t>(worker_count * 2, 1024));
  Counters counters;
  const auto start = Clock::now();

  std::atomic<bool> input_failed{false};
  std::thread reader([&] {
    std::string line;
    while (std::getline(input, line)) {
      try {
        if (auto record = parse_input_line(line)) in_queue.push(WorkItem{std::move(*record), {}});
      } catch (const std::exception& e) {
        in_queue.push(WorkItem{InputRecord{line, std::nullopt}, e.what()});
      }
    }
    if (input.bad()) input_failed = true;
    in_queue.close();
  });
  std::thread writer([&] { out_queue.drain_to(output); });

  std::size_t running = worker_count;
  asio::steady_timer status_timer(io);

  auto worker = [&]() -> asio::awaitable<void> {
    std::unique_ptr<Resolver> resolver;
    while (auto item = co_await in_queue.pop()) {
      const InputRecord& record = item->record;
      if (out_queue.failed()) break;
      if (!resolver) resolver = std::make_unique<Resolver>(io.get_executor(), context);
      LookupResult result;
      ModuleResult m;
      result.name = record.name;
      if (!item->error.empty()) {
        m.status = Status::kError;
        m.error = item->error;
      } else {
        try {
          m = co_await module->lookup(record.name, record.name_server, *resolver, options);
        } catch (const std::exception& e) {
          m = ModuleResult{};
          m.status = Status::kError;
          m.error = e.what();
        }
      }
      result.status = m.status;
      result.timestamp = format_timestamp(std::chrono::system_clock::now());
      result.rrclass = klass;
      result.data = std::move(m.data);
      result.trace = std::move(m.trace);
      result.tries = m.tries;
      result.error = std::move(m.error);
      out_queue.push(serialize_line(result));
      counters.by_status[status_index(result.status)]++;
      counters.processed++;
    }
    if (resolver) resolver->close();
    if (--running == 0) status_timer.cancel();
  };

  auto reporter = [&]() -> asio::awaitable<void> {
    while (running > 0) {
      status_timer.expires_after(status_interval);
      boost::system::error_code ec;
      co_await status_timer.async_wait(asio::redirect_error(asio::use_awaitable, ec));
      if (running == 0) break;
      log << status_line(counters, start) << std::endl;
    }
  };

  for (std::size_t i = 0; i < worker_count; ++i) asio::co_spawn(io, worker(), asio::detached);
  asio::co_spawn(io, reporter(), asio::detached);
  io.run();

  in_queue.abandon();
  reader.join();
  out_queue.close();
  writer.join();

  RunStats stats;
  stats.processed = counters.processed;
  for (std::size_t i = 0; i < kAllStatuses.size(); ++i) {
    if (counters.by_status[i] > 0) stats.status_counts[kAllStatuses[i]] = counters.by_status[i];
  }
  stats.successes = counters.by_status[status_index(Status::kNoError)] +
                    counters.by_status[status_index(Status::kNxDomain)];
  stats.failures = stats.processed - stats.successes;
  stats.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  stats.rate = stats.elapsed_seconds > 0 ? stats.processed / stats.elapsed_seconds : 0;
  stats.udp_sockets_created = context.sockets().udp_sockets_created();
  stats.tcp_connections = context.sockets().tcp_connections_opened();
  log << status_line(counters, start) << std::endl;

  if (out_queue.failed()) throw std::runtime_error("output write failed");
  if (input_failed) throw std::runtime_error("input read error");
  return stats;
}

}  // namespace bulkdns
