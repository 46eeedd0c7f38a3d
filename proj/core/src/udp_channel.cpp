#include "bulkdns/udp_channel.hpp"

#include <algorithm>
#include <array>

#include <boost/asio/co_spawn.hpp>
#include <boost/asio/detached.hpp>
#include <boost/asio/redirect_error.hpp>
#include <boost/asio/use_awaitable.hpp>

namespace bulkdns {

namespace asio = boost::asio;
using asio::ip::udp;

UdpChannel::UdpChannel(asio::any_io_executor executor, const udp::endpoint& local,
                       std::size_t receive_buffer)
    : socket_(std::move(executor)), buffer_size_(std::max<std::size_t>(receive_buffer, 512)) {
  socket_.open(local.protocol());
  socket_.bind(local);
}

void UdpChannel::close() {
  boost::system::error_code ignored;
  socket_.close(ignored);
}

udp::endpoint UdpChannel::local_endpoint() const {
  boost::system::error_code ec;
  return socket_.local_endpoint(ec);
}

asio::awaitable<std::optional<DnsMessage>> UdpChannel::exchange(std::span<const std::uint8_t> packet,
                                                                udp::endpoint server, std::uint16_t id,
                                                                const Question& question,
                                                                std::chrono::milliseconds timeout,
                                                                boost::system::error_code& ec) {
  if (!socket_.is_open()) {
    ec = asio::error::bad_descriptor;
    co_return std::nullopt;
  }
  if (!receiving_) {
    receiving_ = true;
    asio::co_spawn(socket_.get_executor(), receive_loop(shared_from_this()), asio::detached);
  }

  std::optional<DnsMessage> slot;
  asio::steady_timer timer(socket_.get_executor());
  timer.expires_after(timeout);
  Pending pending{id, server, &question, &slot, &timer};
  pending_.push_back(&pending);

  co_await socket_.async_send_to(asio::buffer(packet.data(), packet.size()), server,
                                 asio::redirect_error(asio::use_awaitable, ec));
  if (!ec) {
    boost::system::error_code wait_ec;
    // Woken either by expiry or by the receive loop resetting the expiry.
    while (!slot) {
      co_await timer.async_wait(asio::redirect_error(asio::use_awaitable, wait_ec));
      if (slot || timer.expiry() <= asio::steady_timer::clock_type::now()) break;
    }
  }
  pending_.erase(std::remove(pending_.begin(), pending_.end(), &pending), pending_.end());
  co_return slot;
}

asio::awaitable<void> UdpChannel::receive_loop(std::shared_ptr<UdpChannel> self) {
  std::vector<std::uint8_t> buffer(self->buffer_size_);
  udp::endpoint sender;
  while (true) {
    boost::system::error_code ec;
    std::size_t n = co_await self->socket_.async_receive_from(
        asio::buffer(buffer), sender, asio::redirect_error(asio::use_awaitable, ec));
    if (ec) {
      if (ec == asio::error::operation_aborted || ec == asio::error::bad_descriptor ||
          !self->socket_.is_open()) {
        break;
      }
      continue;
    }
    std::optional<DnsMessage> message;
    try {
      message = decode_message(std::span<const std::uint8_t>(buffer.data(), n));
    } catch (const WireError&) {
      ++self->discarded_;
      continue;
    } catch (const NameError&) {
      ++self->discarded_;
      continue;
    }
    auto it = std::find_if(self->pending_.begin(), self->pending_.end(), [&](const Pending* p) {
      return p->id == message->id && p->server == sender && !*p->slot && message->flags.response &&
             message->question && *message->question == *p->question;
    });
    if (it == self->pending_.end()) {
      ++self->discarded_;
      continue;
    }
    *(*it)->slot = std::move(message);
    (*it)->timer->expires_at(asio::steady_timer::time_point::min());
  }
  self->receiving_ = false;
}

SocketPool::SocketPool(std::vector<asio::ip::address> local_addresses, std::size_t receive_buffer)
    : locals_(std::move(local_addresses)), receive_buffer_(receive_buffer) {}

std::shared_ptr<UdpChannel> SocketPool::open(asio::any_io_executor executor) {
  udp::endpoint local(udp::v4(), 0);
  if (!locals_.empty()) {
    local = udp::endpoint(locals_[next_++ % locals_.size()], 0);
  }
  auto channel = std::make_shared<UdpChannel>(std::move(executor), local, receive_buffer_);
  ++udp_created_;
  return channel;
}

}  // namespace bulkdns
