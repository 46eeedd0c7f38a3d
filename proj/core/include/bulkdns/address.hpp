#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/asio/ip/address.hpp>
#include <boost/asio/ip/udp.hpp>

#include "bulkdns/name.hpp"

namespace bulkdns {

/// An "ip:port" nameserver endpoint.
struct ServerAddress {
  boost::asio::ip::address ip;
  std::uint16_t port = 53;

  /// Accepts "ip", "ip:port", "[v6]" and "[v6]:port". Throws std::invalid_argument.
  static ServerAddress parse(std::string_view text, std::uint16_t default_port = 53);
  static std::optional<ServerAddress> try_parse(std::string_view text, std::uint16_t default_port = 53);

  boost::asio::ip::udp::endpoint udp_endpoint() const { return {ip, port}; }
  std::string to_string() const;

  friend bool operator==(const ServerAddress&, const ServerAddress&) = default;
};

/// A nameserver known by name, with an address when one is available.
struct NameServer {
  DomainName name;
  std::optional<ServerAddress> address;
};

/// The thirteen root servers (IPv4).
std::vector<NameServer> builtin_root_hints();

/// Reads whitespace-separated "name ip" lines; '#' and ';' start comments.
std::vector<NameServer> parse_root_hints(std::istream& in, std::uint16_t port = 53);

/// Nameservers from "nameserver" lines of a resolv.conf-style stream.
std::vector<ServerAddress> parse_resolv_conf(std::istream& in);

}  // namespace bulkdns
