#include <boost/asio/ip/udp.hpp>
#include <boost/asio/post.hpp>

#include "bulkdns/testnet.hpp"

namespace bulkdns::testnet {

namespace asio = boost::asio;

Testnet::Testnet() = default;

Testnet::~Testnet() { stop(); }

MockServer& Testnet::add_server(ServerSpec spec) {
  if (running_) throw FixtureError("add_server after start");
  if (!spec.address) {
    auto n = static_cast<unsigned>(servers_.size());
    spec.address = asio::ip::address_v4((127u << 24) | (53u << 16) | ((n / 250) << 8) | (n % 250 + 1));
  }
  for (const auto& existing : servers_) {
    if (existing->address() == *spec.address) {
      throw FixtureError("duplicate server address " + spec.address->to_string());
    }
  }
  if (spec.label.empty()) spec.label = spec.address->to_string();
  servers_.push_back(std::make_unique<MockServer>(io_, std::move(spec)));
  return *servers_.back();
}

void Testnet::start() {
  if (running_) return;
  if (servers_.empty()) throw FixtureError("testnet has no servers");
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts && port_ == 0; ++attempt) {
    std::uint16_t candidate = 0;
    {
      asio::ip::udp::socket probe(io_);
      probe.open(asio::ip::udp::v4());
      probe.bind(asio::ip::udp::endpoint(servers_.front()->address(), 0));
      candidate = probe.local_endpoint().port();
    }
    bool ok = true;
    for (auto& server : servers_) {
      boost::system::error_code ec;
      if (!server->bind(candidate, ec)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      port_ = candidate;
    } else {
      for (auto& server : servers_) server->close();
    }
  }
  if (port_ == 0) throw FixtureError("could not bind a common port for the testnet");
  for (auto& server : servers_) server->serve();
  running_ = true;
  thread_ = std::thread([this] { io_.run(); });
}

void Testnet::stop() {
  if (!running_) return;
  asio::post(io_, [this] {
    for (auto& server : servers_) server->close();
    io_.stop();
  });
  thread_.join();
  running_ = false;
}

ServerAddress Testnet::address_of(const MockServer& server) const {
  return ServerAddress{server.address(), port_};
}

std::vector<NameServer> Testnet::root_hints() const {
  std::vector<NameServer> out;
  for (const auto& server : servers_) {
    if (!server->spec().root) continue;
    DomainName name;
    try {
      name = DomainName::parse(server->label());
    } catch (const std::exception&) {
      name = DomainName::parse("root-server");
    }
    out.push_back(NameServer{name, address_of(*server)});
  }
  return out;
}

std::vector<ServerAddress> Testnet::recursive_servers() const {
  std::vector<ServerAddress> out;
  for (const auto& server : servers_) {
    if (server->spec().recursive) out.push_back(address_of(*server));
  }
  return out;
}

MockServer* Testnet::find(std::string_view label) {
  for (auto& server : servers_) {
    if (server->label() == label) return server.get();
  }
  return nullptr;
}

std::vector<MockServer*> Testnet::servers() {
  std::vector<MockServer*> out;
  for (auto& server : servers_) out.push_back(server.get());
  return out;
}

std::uint64_t Testnet::count(const DomainName& name, std::uint16_t type) const {
  std::uint64_t total = 0;
  for (const auto& server : servers_) total += server->log().count(name, type);
  return total;
}

std::uint64_t Testnet::tcp_connections() const {
  std::uint64_t total = 0;
  for (const auto& server : servers_) total += server->log().tcp_connections();
  return total;
}

void Testnet::clear_logs() {
  for (auto& server : servers_) server->log().clear();
}

}  // namespace bulkdns::testnet
