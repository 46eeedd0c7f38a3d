#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <boost/asio/any_io_executor.hpp>
#include <boost/asio/awaitable.hpp>
#include <boost/asio/ip/udp.hpp>
#include <boost/asio/steady_timer.hpp>

#include "bulkdns/wire.hpp"

namespace bulkdns {

/// A long-lived UDP socket owned by one worker. Responses are matched back to
/// outstanding queries by id, source endpoint and question; anything else is
/// dropped. Must only be used from coroutines running on its executor.
class UdpChannel : public std::enable_shared_from_this<UdpChannel> {
 public:
  UdpChannel(boost::asio::any_io_executor executor, const boost::asio::ip::udp::endpoint& local,
             std::size_t receive_buffer = 4096);

  UdpChannel(const UdpChannel&) = delete;
  UdpChannel& operator=(const UdpChannel&) = delete;

  /// Sends `packet` and waits up to `timeout` for the matching response.
  /// Returns nullopt on timeout or error; `ec` is set on send failure.
  boost::asio::awaitable<std::optional<DnsMessage>> exchange(std::span<const std::uint8_t> packet,
                                                             boost::asio::ip::udp::endpoint server,
                                                             std::uint16_t id, const Question& question,
                                                             std::chrono::milliseconds timeout,
                                                             boost::system::error_code& ec);

  void close();
  boost::asio::ip::udp::endpoint local_endpoint() const;
  std::uint64_t discarded() const { return discarded_; }

 private:
  struct Pending {
    std::uint16_t id;
    boost::asio::ip::udp::endpoint server;
    const Question* question;
    std::optional<DnsMessage>* slot;
    boost::asio::steady_timer* timer;
  };

  static boost::asio::awaitable<void> receive_loop(std::shared_ptr<UdpChannel> self);

  boost::asio::ip::udp::socket socket_;
  std::size_t buffer_size_;
  std::vector<Pending*> pending_;
  bool receiving_ = false;
  std::uint64_t discarded_ = 0;
};

/// Creates worker sockets, binding them round-robin across the configured
/// local addresses, and counts every socket it opens.
class SocketPool {
 public:
  explicit SocketPool(std::vector<boost::asio::ip::address> local_addresses = {},
                      std::size_t receive_buffer = 4096);

  std::shared_ptr<UdpChannel> open(boost::asio::any_io_executor executor);

  std::uint64_t udp_sockets_created() const { return udp_created_; }
  std::uint64_t tcp_connections_opened() const { return tcp_opened_; }
  void note_tcp_connection() { ++tcp_opened_; }

 private:
  std::vector<boost::asio::ip::address> locals_;
  std::size_t receive_buffer_;
  std::atomic<std::uint64_t> next_{0};
  std::atomic<std::uint64_t> udp_created_{0};
  std::atomic<std::uint64_t> tcp_opened_{0};
};

}  // namespace bulkdns
