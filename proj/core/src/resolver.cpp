#include "bulkdns/resolver.hpp"

#include <algorithm>
#include <array>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/read.hpp>
#include <boost/asio/redirect_error.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/use_awaitable.hpp>
#include <boost/asio/write.hpp>

namespace bulkdns {

namespace asio = boost::asio;
using Clock = std::chrono::steady_clock;

void ResolverConfig::validate() const {
  if (mode == ResolutionMode::kIterative && root_hints.empty()) {
    throw std::invalid_argument("iterative mode requires root hints");
  }
  if (mode == ResolutionMode::kExternal && external_resolvers.empty()) {
    throw std::invalid_argument("external mode requires at least one resolver");
  }
  if (retries < 0) throw std::invalid_argument("retries must be >= 0");
  if (max_depth < 1) throw std::invalid_argument("max depth must be >= 1");
  if (timeout.count() <= 0) throw std::invalid_argument("timeout must be positive");
}

ResolverContext::ResolverContext(ResolverConfig config, std::size_t cache_capacity, double rate_limit)
    : config_(std::move(config)),
      cache_(cache_capacity),
      limiter_(rate_limit),
      sockets_(config_.local_addresses, std::max<std::size_t>(config_.udp_payload_size, 4096)) {
  config_.validate();
}

nlohmann::json Resolution::data() const {
  if (!response) return nlohmann::json::object();
  return response_to_json(*response, protocol, server ? server->to_string() : std::string());
}

Resolver::Resolver(asio::any_io_executor executor, ResolverContext& context)
    : executor_(std::move(executor)), ctx_(context), rng_(std::random_device{}()) {
  channel_ = ctx_.sockets().open(executor_);
  balancer_ = LoadBalancer(ctx_.config().external_resolvers, rng_());
}

Resolver::~Resolver() { close(); }

void Resolver::close() {
  if (channel_) channel_->close();
}

asio::awaitable<std::optional<DnsMessage>> Resolver::tcp_exchange(const std::vector<std::uint8_t>& packet,
                                                                  const ServerAddress& server,
                                                                  std::uint16_t id,
                                                                  std::chrono::milliseconds timeout,
                                                                  std::string& error, bool& timed_out) {
  auto socket = std::make_shared<asio::ip::tcp::socket>(executor_);
  auto expired = std::make_shared<bool>(false);
  asio::steady_timer watchdog(executor_);
  watchdog.expires_after(timeout);
  watchdog.async_wait([socket, expired](const boost::system::error_code& ec) {
    if (!ec) {
      *expired = true;
      boost::system::error_code ignored;
      socket->close(ignored);
    }
  });

  boost::system::error_code ec;
  auto finish = [&](std::optional<DnsMessage> out) {
    watchdog.cancel();
    boost::system::error_code ignored;
    socket->close(ignored);
    timed_out = *expired;
    if (!out && error.empty()) error = *expired ? "tcp timeout" : ec.message();
    return out;
  };

  ctx_.sockets().note_tcp_connection();
  co_await socket->async_connect(asio::ip::tcp::endpoint(server.ip, server.port),
                                 asio::redirect_error(asio::use_awaitable, ec));
  if (ec) co_return finish(std::nullopt);

  std::uint8_t prefix[2] = {static_cast<std::uint8_t>(packet.size() >> 8),
                            static_cast<std::uint8_t>(packet.size())};
  std::array<asio::const_buffer, 2> out{asio::buffer(prefix), asio::buffer(packet)};
  co_await asio::async_write(*socket, out, asio::redirect_error(asio::use_awaitable, ec));
  if (ec) co_return finish(std::nullopt);

  std::uint8_t length_bytes[2];
  co_await asio::async_read(*socket, asio::buffer(length_bytes), asio::redirect_error(asio::use_awaitable, ec));
  if (ec) co_return finish(std::nullopt);
  std::vector<std::uint8_t> reply(static_cast<std::size_t>(length_bytes[0] << 8 | length_bytes[1]));
  co_await asio::async_read(*socket, asio::buffer(reply), asio::redirect_error(asio::use_awaitable, ec));
  if (ec) co_return finish(std::nullopt);

  try {
    auto message = decode_message(reply);
    if (message.id != id || !message.flags.response) {
      error = "tcp response id mismatch";
      co_return finish(std::nullopt);
    }
    co_return finish(std::move(message));
  } catch (const std::exception& e) {
    error = std::string("malformed tcp response: ") + e.what();
    co_return finish(std::nullopt);
  }
}

asio::awaitable<ExchangeResult> Resolver::exchange(const Question& q, const ServerAddress& server,
                                                   Transport transport, std::chrono::milliseconds timeout,
                                                   bool recursion_desired) {
  ExchangeResult result;
  result.server = server;
  result.protocol = transport == Transport::kUdp ? "udp" : "tcp";

  co_await ctx_.limiter().acquire();
  auto id = static_cast<std::uint16_t>(rng_());
  std::vector<std::uint8_t> packet;
  try {
    packet = encode_query(q, id, recursion_desired, config().udp_payload_size);
  } catch (const std::exception& e) {
    result.outcome = TransportOutcome::kError;
    result.error = e.what();
    co_return result;
  }

  if (transport == Transport::kUdp) {
    if (!server.ip.is_v4()) {
      result.outcome = TransportOutcome::kError;
      result.error = "IPv6 transport is not supported";
      co_return result;
    }
    boost::system::error_code ec;
    result.response = co_await channel_->exchange(packet, server.udp_endpoint(), id, q, timeout, ec);
    if (result.response) {
      result.outcome = TransportOutcome::kResponse;
    } else if (ec) {
      result.outcome = TransportOutcome::kError;
      result.error = ec.message();
    } else {
      result.outcome = TransportOutcome::kTimeout;
    }
    co_return result;
  }

  bool timed_out = false;
  result.response = co_await tcp_exchange(packet, server, id, timeout, result.error, timed_out);
  if (result.response) {
    result.outcome = TransportOutcome::kResponse;
  } else {
    result.outcome = timed_out ? TransportOutcome::kTimeout : TransportOutcome::kError;
  }
  co_return result;
}

asio::awaitable<ExchangeResult> Resolver::exchange_with_fallback(const Question& q,
                                                                 const ServerAddress& server,
                                                                 std::chrono::milliseconds timeout,
                                                                 bool recursion_desired) {
  if (config().tcp_only) {
    co_return co_await exchange(q, server, Transport::kTcp, timeout, recursion_desired);
  }
  auto udp = co_await exchange(q, server, Transport::kUdp, timeout, recursion_desired);
  if (udp.outcome != TransportOutcome::kResponse || !udp.response->flags.truncated) co_return udp;

  auto tcp = co_await exchange(q, server, Transport::kTcp, timeout, recursion_desired);
  if (tcp.outcome == TransportOutcome::kResponse) co_return tcp;
  udp.truncated_fallback_failed = true;
  udp.error = tcp.error;
  co_return udp;
}

asio::awaitable<ExchangeResult> Resolver::exchange_with_retries(const Question& q,
                                                                const ServerAddress& server,
                                                                bool recursion_desired,
                                                                Clock::time_point deadline) {
  ExchangeResult last;
  last.server = server;
  last.tries = 0;
  for (int attempt = 1; attempt <= config().retries + 1; ++attempt) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) break;
    auto timeout = std::min(config().timeout, remaining);
    last = co_await exchange_with_fallback(q, server, timeout, recursion_desired);
    last.tries = attempt;
    if (last.outcome == TransportOutcome::kResponse) break;
  }
  co_return last;
}

asio::awaitable<Resolution> Resolver::external_lookup(const Question& q,
                                                      std::optional<ServerAddress> server_override) {
  Resolution res;
  if (!server_override && balancer_.empty()) {
    res.status = Status::kError;
    res.error = "no upstream resolvers configured";
    co_return res;
  }
  bool recursion = !server_override || config().mode == ResolutionMode::kExternal;
  auto deadline = Clock::now() + config().overall_timeout;
  for (int attempt = 1; attempt <= config().retries + 1; ++attempt) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) {
      res.status = Status::kTimeout;
      break;
    }
    ServerAddress server = server_override ? *server_override : balancer_.next();
    auto ex = co_await exchange_with_fallback(q, server, std::min(config().timeout, remaining), recursion);
    res.tries = attempt;
    res.server = server;
    res.protocol = ex.protocol;
    res.error = ex.error;
    if (ex.outcome != TransportOutcome::kResponse) {
      res.status = ex.outcome == TransportOutcome::kTimeout ? Status::kTimeout : Status::kError;
      res.response.reset();
      continue;
    }
    const auto& m = *ex.response;
    bool delegation = m.answers.empty() &&
                      std::any_of(m.authorities.begin(), m.authorities.end(),
                                  [](const ResourceRecord& rr) { return rr.type == rrtype::NS; });
    res.status = classify_response(TransportOutcome::kResponse, m.flags.rcode, !m.answers.empty(), delegation);
    if (ex.truncated_fallback_failed) res.status = Status::kTruncated;
    res.response = std::move(ex.response);
    if (res.status == Status::kServFail) continue;
    break;
  }
  co_return res;
}

asio::awaitable<Resolution> Resolver::lookup(const Question& q, std::optional<ServerAddress> server_override) {
  if (server_override || config().mode == ResolutionMode::kExternal) {
    co_return co_await external_lookup(q, server_override);
  }
  co_return co_await iterative_lookup(q);
}

}  // namespace bulkdns
