#pragma once

// In-process mock DNS servers for offline testing: authoritative hierarchies,
// a recursive mode, scripted faults and per-server query logs.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/address_v4.hpp>

#include "bulkdns/address.hpp"
#include "bulkdns/wire.hpp"

namespace bulkdns::testnet {

class FixtureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ZoneDelegation {
  DomainName child;
  std::vector<DomainName> name_servers;
  std::vector<ResourceRecord> glue;
};

/// Records served for one zone. Delegations are the NS sets owned by names
/// below the apex.
struct ZoneFixture {
  DomainName zone;
  std::vector<ResourceRecord> records;

  /// Zone-file-like text: `name [ttl] [class] type rdata`, one per line.
  /// `@` is the origin, names without a trailing dot are relative, a blank
  /// owner repeats the previous one, `;` starts a comment, `$TTL` and
  /// `$ORIGIN` are honoured.
  static ZoneFixture parse(std::string_view text, const DomainName& origin, std::uint32_t default_ttl = 3600);

  /// Adds one record line in the same syntax.
  ZoneFixture& add(std::string_view line, std::uint32_t default_ttl = 3600);
  ZoneFixture& add(ResourceRecord record);

  std::vector<ZoneDelegation> delegations() const;

  /// Throws FixtureError when a record lies outside the zone.
  void validate() const;
};

/// A fault script. Applies to queries whose name matches `pattern` (glob
/// with `*` and `?`, case-insensitive) and, if set, whose type is `qtype`.
struct ServerBehavior {
  std::string pattern = "*";
  std::optional<std::uint16_t> qtype;
  /// The first N matching queries for each distinct question go unanswered.
  int drop_first_n = 0;
  /// UDP answers carry only the question, with TC set.
  bool truncate_udp = false;
  int delay_ms = 0;
  /// Non-authoritative NOERROR with empty sections.
  bool lame = false;
  std::optional<std::uint8_t> rcode_override;
  /// Leave the additional section empty.
  bool minimal_responses = false;

  bool matches(const Question& q) const;

  /// Parses `key=value` tokens: match, type, drop_first_n, truncate_udp,
  /// delay_ms, lame, rcode, minimal.
  static ServerBehavior parse(std::string_view text);
};

bool glob_match(std::string_view pattern, std::string_view text);

struct LoggedQuery {
  std::chrono::steady_clock::time_point at;
  Question question;
  std::string transport;  // "udp" or "tcp"
};

/// Thread-safe record of every query a server received.
class QueryLog {
 public:
  void record(const Question& q, std::string_view transport, std::chrono::steady_clock::time_point at);
  void note_tcp_connection();

  std::uint64_t count(const DomainName& name, std::uint16_t type) const;
  std::uint64_t total() const;
  std::uint64_t udp_queries() const;
  std::uint64_t tcp_queries() const;
  std::uint64_t tcp_connections() const;
  std::vector<LoggedQuery> entries() const;
  /// Largest number of arrivals inside any window of length `window`.
  std::uint64_t max_arrivals_in_window(std::chrono::steady_clock::duration window) const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::vector<LoggedQuery> entries_;
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t udp_ = 0;
  std::uint64_t tcp_ = 0;
  std::uint64_t tcp_connections_ = 0;
};

/// Expected counters; unset fields are not checked.
struct CountExpectations {
  std::vector<std::tuple<DomainName, std::uint16_t, std::uint64_t>> counts;
  std::optional<std::uint64_t> total;
  std::optional<std::uint64_t> udp_queries;
  std::optional<std::uint64_t> tcp_queries;
  std::optional<std::uint64_t> tcp_connections;
  /// Upper bound on arrivals in any one-second window.
  std::optional<std::uint64_t> max_per_second;
};

struct CountReport {
  bool ok = true;
  std::vector<std::string> diffs;
  std::string to_string() const;
};

CountReport assert_counts(const QueryLog& log, const CountExpectations& expected);

struct ServerSpec {
  std::string label;
  /// Loopback address to bind; assigned automatically when unset.
  std::optional<boost::asio::ip::address_v4> address;
  std::vector<ZoneFixture> zones;
  std::vector<ServerBehavior> behaviors;
  /// Sets RA, ignores delegations and follows CNAME chains in its own data.
  bool recursive = false;
  /// Listed in Testnet::root_hints().
  bool root = false;
};

class MockServer;

/// A set of mock servers sharing one port on distinct loopback addresses,
/// served from a dedicated thread.
class Testnet {
 public:
  Testnet();
  ~Testnet();
  Testnet(const Testnet&) = delete;
  Testnet& operator=(const Testnet&) = delete;

  /// Must be called before start().
  MockServer& add_server(ServerSpec spec);

  /// Binds every server on a common free port and starts serving.
  void start();
  void stop();

  std::uint16_t port() const { return port_; }
  ServerAddress address_of(const MockServer& server) const;
  std::vector<NameServer> root_hints() const;
  std::vector<ServerAddress> recursive_servers() const;
  MockServer* find(std::string_view label);
  std::vector<MockServer*> servers();

  /// Sum over all servers.
  std::uint64_t count(const DomainName& name, std::uint16_t type) const;
  std::uint64_t tcp_connections() const;
  void clear_logs();

 private:
  boost::asio::io_context io_;
  std::vector<std::unique_ptr<MockServer>> servers_;
  std::thread thread_;
  std::uint16_t port_ = 0;
  bool running_ = false;
};

class MockServer {
 public:
  MockServer(boost::asio::io_context& io, ServerSpec spec);
  ~MockServer();

  const ServerSpec& spec() const { return spec_; }
  const std::string& label() const { return spec_.label; }
  boost::asio::ip::address_v4 address() const { return *spec_.address; }
  QueryLog& log() { return log_; }
  const QueryLog& log() const { return log_; }

  /// Builds the reply for `query` without any behavior applied.
  DnsMessage answer(const DnsMessage& query) const;

  // Used by Testnet.
  bool bind(std::uint16_t port, boost::system::error_code& ec);
  void serve();
  void close();

 private:
  struct Impl;
  struct Verdict {
    bool drop = false;
    bool truncate_udp = false;
    int delay_ms = 0;
    bool lame = false;
    std::optional<std::uint8_t> rcode;
    bool minimal = false;
  };
  Verdict judge(const Question& q);
  std::optional<std::vector<std::uint8_t>> respond(std::span<const std::uint8_t> packet, bool udp,
                                                   int& delay_ms);
  void index();
  void answer_name(const DomainName& qname, std::uint16_t qtype, std::uint16_t qclass, DnsMessage& reply,
                   int depth) const;
  void add_additionals(DnsMessage& reply) const;
  const std::vector<const ResourceRecord*>* records_at(const DomainName& name) const;
  const ZoneFixture* best_zone(const DomainName& qname) const;

  ServerSpec spec_;
  QueryLog log_;
  std::unique_ptr<Impl> impl_;
  std::unordered_map<std::string, std::vector<const ResourceRecord*>> by_owner_;
  std::mutex behavior_mutex_;
  std::map<std::tuple<std::size_t, std::string, std::uint16_t>, int> behavior_hits_;
};

/// Loads every `*.server` file in `dir`. File syntax: `$ADDRESS ip`, `$ROOT`,
/// `$RECURSIVE`, `$BEHAVIOR key=value ...`, then zones introduced by
/// `$ORIGIN name` with `$TTL` and record lines as in ZoneFixture::parse.
std::vector<ServerSpec> load_fixture_dir(const std::filesystem::path& dir);

/// Parses the contents of one `.server` file.
ServerSpec parse_server_file(std::string_view text, std::string label);

}  // namespace bulkdns::testnet
