#pragma once

// Scan orchestration: CLI configuration, input/output streaming and the
// worker pool.

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bulkdns/modules.hpp"
#include "bulkdns/resolver.hpp"

namespace bulkdns {

struct ScanConfig {
  std::string module_name;
  int threads = 1000;
  std::size_t cache_size = 10000;
  int retries = 3;
  int timeout_ms = 1000;
  int overall_timeout_ms = 15000;
  int max_depth = 32;
  bool iterative = false;
  std::vector<ServerAddress> name_servers;
  std::vector<boost::asio::ip::address> local_addresses;
  double rate_limit = 0;  // queries per second, 0 = unlimited
  std::string input_path = "-";
  std::string output_path = "-";
  std::string log_path = "-";
  bool all_nameservers = false;
  bool tcp_only = false;
  bool ipv4_lookup = false;
  bool ipv6_lookup = false;

  /// Replaces the built-in root hints when non-empty.
  std::vector<NameServer> root_hints;
  std::string root_hints_path;
  std::uint16_t nameserver_port = 53;
  /// Fixture directory for a local mock hierarchy (handled by the CLI tool).
  std::string testnet_dir;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Raised by parse_cli. `exit_code` is 0 for --help.
class CliExit : public std::runtime_error {
 public:
  CliExit(int exit_code, const std::string& message) : std::runtime_error(message), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

/// First positional argument is the module. In external mode without
/// --name-servers the resolvers come from `resolv_conf` (skipped when a
/// testnet directory is given).
ScanConfig parse_cli(const std::vector<std::string>& args, const ModuleRegistry& registry = builtin_registry(),
                     const std::string& resolv_conf = "/etc/resolv.conf");
ScanConfig parse_cli(int argc, const char* const* argv, const ModuleRegistry& registry = builtin_registry());

ResolverConfig make_resolver_config(const ScanConfig& config);

struct InputRecord {
  std::string name;
  std::optional<ServerAddress> name_server;
};

/// "name" or "name,server". Returns nullopt for blank lines. Throws
/// std::invalid_argument for an unparseable server.
std::optional<InputRecord> parse_input_line(std::string_view line);

struct RunStats {
  std::uint64_t processed = 0;
  std::uint64_t successes = 0;
  std::uint64_t failures = 0;
  std::map<Status, std::uint64_t> status_counts;
  double elapsed_seconds = 0;
  double rate = 0;
  std::uint64_t udp_sockets_created = 0;
  std::uint64_t tcp_connections = 0;
};

nlohmann::json to_json(const RunStats& stats);

/// Writes one JSON line. Throws std::runtime_error when the stream fails.
void emit_result(const LookupResult& result, std::ostream& output);

/// Runs the configured module over every input line. Output order follows
/// completion, not input. Throws std::runtime_error on input or output
/// stream failure after flushing what was produced.
RunStats run_scan(const ScanConfig& config, std::istream& input, std::ostream& output, std::ostream& log,
                  const ModuleRegistry& registry = builtin_registry(),
                  std::chrono::milliseconds status_interval = std::chrono::seconds(5));

}  // namespace bulkdns
