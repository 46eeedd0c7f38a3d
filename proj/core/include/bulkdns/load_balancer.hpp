#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bulkdns/address.hpp"

namespace bulkdns {

/// Round-robin pick: advances `counter` and returns the server it selects.
inline const ServerAddress& load_balance(const std::vector<ServerAddress>& servers,
                                         std::uint64_t& counter) {
  if (servers.empty()) throw std::invalid_argument("load_balance: no upstream resolvers");
  return servers[counter++ % servers.size()];
}

/// Per-worker rotation over the upstream resolvers, starting at a random
/// offset so that the aggregate load across workers stays uniform.
class LoadBalancer {
 public:
  LoadBalancer() = default;
  LoadBalancer(std::vector<ServerAddress> servers, std::uint64_t start)
      : servers_(std::move(servers)), counter_(start) {}

  bool empty() const { return servers_.empty(); }
  const ServerAddress& next() { return load_balance(servers_, counter_); }

 private:
  std::vector<ServerAddress> servers_;
  std::uint64_t counter_ = 0;
};

}  // namespace bulkdns
