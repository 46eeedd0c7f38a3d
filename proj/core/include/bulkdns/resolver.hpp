#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/asio/any_io_executor.hpp>
#include <boost/asio/awaitable.hpp>
#include <boost/asio/co_spawn.hpp>
#include <boost/asio/io_context.hpp>

#include "bulkdns/address.hpp"
#include "bulkdns/cache.hpp"
#include "bulkdns/load_balancer.hpp"
#include "bulkdns/rate_limiter.hpp"
#include "bulkdns/result.hpp"
#include "bulkdns/status.hpp"
#include "bulkdns/udp_channel.hpp"
#include "bulkdns/wire.hpp"

namespace bulkdns {

enum class ResolutionMode { kExternal, kIterative };
enum class Transport { kUdp, kTcp };

struct ResolverConfig {
  ResolutionMode mode = ResolutionMode::kExternal;
  std::vector<ServerAddress> external_resolvers;
  std::vector<NameServer> root_hints = builtin_root_hints();
  std::chrono::milliseconds timeout{1000};
  std::chrono::milliseconds overall_timeout{15000};
  int retries = 3;
  int max_depth = 32;
  std::vector<boost::asio::ip::address> local_addresses;
  bool tcp_only = false;
  bool all_nameservers = false;
  /// Port used for nameservers learned from referrals and glue.
  std::uint16_t nameserver_port = 53;
  std::uint16_t udp_payload_size = 1232;

  /// Throws std::invalid_argument when the mode lacks its server list.
  void validate() const;
};

/// State shared by every worker of a run: configuration, the selective
/// cache, the launch-rate limiter and socket accounting.
class ResolverContext {
 public:
  ResolverContext(ResolverConfig config, std::size_t cache_capacity, double rate_limit = 0);

  const ResolverConfig& config() const { return config_; }
  RecordCache& cache() { return cache_; }
  RateLimiter& limiter() { return limiter_; }
  SocketPool& sockets() { return sockets_; }

 private:
  ResolverConfig config_;
  RecordCache cache_;
  RateLimiter limiter_;
  SocketPool sockets_;
};

struct ExchangeResult {
  TransportOutcome outcome = TransportOutcome::kTimeout;
  std::optional<DnsMessage> response;
  std::string protocol = "udp";
  ServerAddress server;
  int tries = 1;
  /// UDP answer was truncated and the TCP retry failed; `response` holds the
  /// truncated UDP answer.
  bool truncated_fallback_failed = false;
  std::string error;
};

/// The outcome of resolving one question, before module-specific shaping.
struct Resolution {
  Status status = Status::kError;
  std::optional<DnsMessage> response;
  std::string protocol;
  std::optional<ServerAddress> server;
  int tries = 0;
  std::vector<TraceStep> trace;
  std::string error;

  // Iterative mode: the zone that produced the final answer and its servers.
  DomainName final_layer;
  std::vector<NameServer> final_servers;
  std::vector<ExchangeResult> final_layer_exchanges;

  /// Sectioned response object, or an empty object when nothing was received.
  nlohmann::json data() const;
};

struct NameServerResponse {
  NameServer name_server;
  std::optional<ServerAddress> address;
  Status status = Status::kError;
  ExchangeResult exchange;
};

struct AllNameserversResult {
  Resolution discovery;
  std::vector<NameServerResponse> responses;
};

/// A referral target chosen from a delegation response.
struct Delegation {
  DomainName zone;
  std::vector<NameServer> servers;       // candidate order randomized
  std::vector<ResourceRecord> ns_records;
  std::vector<ResourceRecord> glue;      // in-bailiwick A/AAAA for NS targets
};

/// Extracts the delegation from a referral. The new zone must extend
/// `current_layer` toward `qname`; off-path NS owners and out-of-bailiwick
/// glue are ignored. Returns nullopt when nothing qualifies.
std::optional<Delegation> select_next_server(const DnsMessage& response, const DomainName& current_layer,
                                             const DomainName& qname, std::mt19937& rng,
                                             std::uint16_t nameserver_port);

/// One worker's query engine. Owns the worker's UDP socket for its lifetime;
/// all calls must come from coroutines running on `executor`.
class Resolver {
 public:
  Resolver(boost::asio::any_io_executor executor, ResolverContext& context);
  ~Resolver();

  Resolver(const Resolver&) = delete;
  Resolver& operator=(const Resolver&) = delete;

  ResolverContext& context() { return ctx_; }
  const ResolverConfig& config() const { return ctx_.config(); }

  /// Single exchange over the given transport; no retries.
  boost::asio::awaitable<ExchangeResult> exchange(const Question& q, const ServerAddress& server,
                                                  Transport transport, std::chrono::milliseconds timeout,
                                                  bool recursion_desired);

  /// UDP first, TCP when the UDP answer is truncated (or always with tcp_only).
  boost::asio::awaitable<ExchangeResult> exchange_with_fallback(const Question& q,
                                                                const ServerAddress& server,
                                                                std::chrono::milliseconds timeout,
                                                                bool recursion_desired);

  /// Repeats timed-out exchanges against one server, up to `retries` extra tries.
  boost::asio::awaitable<ExchangeResult> exchange_with_retries(
      const Question& q, const ServerAddress& server, bool recursion_desired,
      std::chrono::steady_clock::time_point deadline);

  /// Recursive query to an upstream resolver, rotating resolvers on each retry.
  /// `server_override` pins every try to one server.
  boost::asio::awaitable<Resolution> external_lookup(const Question& q,
                                                     std::optional<ServerAddress> server_override = {});

  /// Walks the delegation chain from the root, recording every hop.
  boost::asio::awaitable<Resolution> iterative_lookup(const Question& q);

  /// Iterative discovery of the authoritative servers, then one independently
  /// retried query to each of them.
  boost::asio::awaitable<AllNameserversResult> all_nameservers_lookup(const Question& q);

  /// Dispatches on the configured mode. With a per-name server the question
  /// goes straight to that server (recursion desired only in external mode).
  boost::asio::awaitable<Resolution> lookup(const Question& q,
                                            std::optional<ServerAddress> server_override = {});

  void close();

 private:
  struct IterationState;
  boost::asio::awaitable<Resolution> iterate(const Question& q, IterationState& state);
  boost::asio::awaitable<std::optional<ServerAddress>> resolve_nameserver(const DomainName& ns,
                                                                          IterationState& state);
  std::optional<Delegation> cached_delegation(const DomainName& qname, const DomainName& layer);
  void cache_delegation(const Delegation& delegation, const DomainName& qname);
  boost::asio::awaitable<std::optional<DnsMessage>> tcp_exchange(const std::vector<std::uint8_t>& packet,
                                                                 const ServerAddress& server,
                                                                 std::uint16_t id,
                                                                 std::chrono::milliseconds timeout,
                                                                 std::string& error, bool& timed_out);

  boost::asio::any_io_executor executor_;
  ResolverContext& ctx_;
  std::shared_ptr<UdpChannel> channel_;
  LoadBalancer balancer_;
  std::mt19937 rng_;
};

/// Runs `task` on `io` until it completes and returns its value. Other work
/// on `io` (such as socket receive loops) keeps running meanwhile.
template <typename T>
T block_on(boost::asio::io_context& io, boost::asio::awaitable<T> task) {
  std::optional<T> value;
  std::exception_ptr error;
  bool done = false;
  boost::asio::co_spawn(io, std::move(task), [&](std::exception_ptr e, T v) {
    error = e;
    if (!e) value.emplace(std::move(v));
    done = true;
  });
  io.restart();
  while (!done && io.run_one() > 0) {
  }
  if (error) std::rethrow_exception(error);
  if (!done) throw std::runtime_error("block_on: io_context ran out of work");
  return std::move(*value);
}

inline void block_on(boost::asio::io_context& io, boost::asio::awaitable<void> task) {
  std::exception_ptr error;
  bool done = false;
  boost::asio::co_spawn(io, std::move(task), [&](std::exception_ptr e) {
    error = e;
    done = true;
  });
  io.restart();
  while (!done && io.run_one() > 0) {
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace bulkdns
