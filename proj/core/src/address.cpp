#include "bulkdns/address.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace bulkdns {

std::optional<ServerAddress> ServerAddress::try_parse(std::string_view text, std::uint16_t default_port) {
  std::string_view host = text;
  std::optional<std::string_view> port_text;
  if (!text.empty() && text.front() == '[') {
    auto close = text.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = text.substr(1, close - 1);
    auto rest = text.substr(close + 1);
    if (!rest.empty()) {
      if (rest.front() != ':') return std::nullopt;
      port_text = rest.substr(1);
    }
  } else if (auto colon = text.find(':'); colon != std::string_view::npos &&
                                          text.find(':', colon + 1) == std::string_view::npos) {
    host = text.substr(0, colon);
    port_text = text.substr(colon + 1);
  }
  boost::system::error_code ec;
  auto ip = boost::asio::ip::make_address(std::string(host), ec);
  if (ec) return std::nullopt;
  ServerAddress out{ip, default_port};
  if (port_text) {
    unsigned port = 0;
    auto [ptr, perr] = std::from_chars(port_text->data(), port_text->data() + port_text->size(), port);
    if (perr != std::errc() || ptr != port_text->data() + port_text->size() || port == 0 || port > 65535) {
      return std::nullopt;
    }
    out.port = static_cast<std::uint16_t>(port);
  }
  return out;
}

ServerAddress ServerAddress::parse(std::string_view text, std::uint16_t default_port) {
  auto parsed = try_parse(text, default_port);
  if (!parsed) throw std::invalid_argument("invalid nameserver address '" + std::string(text) + "'");
  return *parsed;
}

std::string ServerAddress::to_string() const {
  if (ip.is_v6()) return "[" + ip.to_string() + "]:" + std::to_string(port);
  return ip.to_string() + ":" + std::to_string(port);
}

std::vector<NameServer> builtin_root_hints() {
  static const std::pair<const char*, const char*> kRoots[] = {
      {"a.root-servers.net", "198.41.0.4"},     {"b.root-servers.net", "170.247.170.2"},
      {"c.root-servers.net", "192.33.4.12"},    {"d.root-servers.net", "199.7.91.13"},
      {"e.root-servers.net", "192.203.230.10"}, {"f.root-servers.net", "192.5.5.241"},
      {"g.root-servers.net", "192.112.36.4"},   {"h.root-servers.net", "198.97.190.53"},
      {"i.root-servers.net", "192.36.148.17"},  {"j.root-servers.net", "192.58.128.30"},
      {"k.root-servers.net", "193.0.14.129"},   {"l.root-servers.net", "199.7.83.42"},
      {"m.root-servers.net", "202.12.27.33"},
  };
  std::vector<NameServer> out;
  for (const auto& [name, ip] : kRoots) {
    out.push_back(NameServer{DomainName::parse(name), ServerAddress::parse(ip)});
  }
  return out;
}

std::vector<NameServer> parse_root_hints(std::istream& in, std::uint16_t port) {
  std::vector<NameServer> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name, ip;
    if (!(fields >> name)) continue;
    if (!(fields >> ip)) {
      throw std::invalid_argument("root hints line " + std::to_string(lineno) + ": expected 'name ip'");
    }
    out.push_back(NameServer{DomainName::parse(name), ServerAddress::parse(ip, port)});
  }
  return out;
}

std::vector<ServerAddress> parse_resolv_conf(std::istream& in) {
  std::vector<ServerAddress> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string keyword, value;
    if (!(fields >> keyword >> value) || keyword != "nameserver") continue;
    if (auto addr = ServerAddress::try_parse(value)) out.push_back(*addr);
  }
  return out;
}

}  // namespace bulkdns
