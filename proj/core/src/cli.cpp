#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "bulkdns/framework.hpp"

namespace bulkdns {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto begin = item.find_first_not_of(" \t");
    auto end = item.find_last_not_of(" \t");
    if (begin != std::string::npos) out.push_back(item.substr(begin, end - begin + 1));
  }
  return out;
}

std::string module_listing(const ModuleRegistry& registry) {
  std::string out;
  for (const auto& name : registry.names()) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

}  // namespace

void ScanConfig::validate() const {
  if (threads < 1) throw std::invalid_argument("--threads must be >= 1");
  if (retries < 0) throw std::invalid_argument("--retries must be >= 0");
  if (timeout_ms < 1) throw std::invalid_argument("--timeout must be >= 1");
  if (overall_timeout_ms < 1) throw std::invalid_argument("--overall-timeout must be >= 1");
  if (max_depth < 1) throw std::invalid_argument("--max-depth must be >= 1");
  if (rate_limit < 0) throw std::invalid_argument("--rate-limit must be >= 0");
  if (iterative && !name_servers.empty()) {
    throw std::invalid_argument("--iterative and --name-servers are mutually exclusive");
  }
  if (all_nameservers && !iterative) throw std::invalid_argument("--all-nameservers requires --iterative");
}

ScanConfig parse_cli(const std::vector<std::string>& args, const ModuleRegistry& registry,
                     const std::string& resolv_conf) {
  ScanConfig config;
  CLI::App app{"Bulk DNS lookups with JSON output", "bulkdns"};
  std::string name_servers;
  std::string local_addrs;

  app.add_option("module", config.module_name, "Lookup module (A, MXLOOKUP, ...)")->required();
  auto* iterative = app.add_flag("--iterative", config.iterative, "Resolve from the root instead of a recursive resolver");
  auto* servers = app.add_option("--name-servers", name_servers, "Upstream resolvers, ip[:port][,...]");
  iterative->excludes(servers);
  app.add_option("--threads", config.threads, "Concurrent lookup workers")->capture_default_str();
  app.add_option("--cache-size", config.cache_size, "Selective cache capacity in entries")->capture_default_str();
  app.add_option("--retries", config.retries, "Extra tries after a timeout")->capture_default_str();
  app.add_option("--timeout", config.timeout_ms, "Per-exchange timeout in ms")->capture_default_str();
  app.add_option("--overall-timeout", config.overall_timeout_ms, "Per-name timeout in ms")->capture_default_str();
  app.add_option("--max-depth", config.max_depth, "Hop budget for iterative resolution")->capture_default_str();
  app.add_option("--rate-limit", config.rate_limit, "Wire queries per second, 0 for unlimited")->capture_default_str();
  app.add_option("--local-addr", local_addrs, "Source addresses for sockets, ip[,...]");
  app.add_option("--input-file", config.input_path, "Input names, - for stdin")->capture_default_str();
  app.add_option("--output-file", config.output_path, "JSON lines output, - for stdout")->capture_default_str();
  app.add_option("--log-file", config.log_path, "Status log, - for stderr")->capture_default_str();
  app.add_flag("--all-nameservers", config.all_nameservers, "Query every authoritative nameserver (iterative only)");
  app.add_flag("--tcp-only", config.tcp_only, "Never use UDP");
  app.add_flag("--ipv4-lookup", config.ipv4_lookup, "Resolve IPv4 addresses (alookup, mxlookup)");
  app.add_flag("--ipv6-lookup", config.ipv6_lookup, "Resolve IPv6 addresses (alookup, mxlookup)");
  app.add_option("--root-hints", config.root_hints_path, "Root hints file: lines of 'name address'");
  app.add_option("--testnet", config.testnet_dir, "Serve a local mock hierarchy from a fixture directory");
  app.footer("Modules: " + module_listing(registry));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw CliExit(0, app.help());
  } catch (const CLI::ParseError& e) {
    throw CliExit(2, e.what());
  }

  if (!registry.find(config.module_name)) {
    throw CliExit(2, "unknown module '" + config.module_name + "'; available: " + module_listing(registry));
  }
  try {
    for (const auto& s : split_list(name_servers)) config.name_servers.push_back(ServerAddress::parse(s));
    for (const auto& s : split_list(local_addrs)) config.local_addresses.push_back(boost::asio::ip::make_address(s));
    if (!config.root_hints_path.empty()) {
      std::ifstream in(config.root_hints_path);
      if (!in) throw std::invalid_argument("cannot read root hints " + config.root_hints_path);
      config.root_hints = parse_root_hints(in);
    }
    config.validate();
  } catch (const std::exception& e) {
    throw CliExit(2, e.what());
  }

  if (!config.iterative && config.name_servers.empty() && config.testnet_dir.empty()) {
    std::ifstream in(resolv_conf);
    if (in) config.name_servers = parse_resolv_conf(in);
    if (config.name_servers.empty()) {
      throw CliExit(2, "no --name-servers given and none found in " + resolv_conf);
    }
  }
  return config;
}

ScanConfig parse_cli(int argc, const char* const* argv, const ModuleRegistry& registry) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_cli(args, registry);
}

ResolverConfig make_resolver_config(const ScanConfig& config) {
  ResolverConfig rc;
  rc.mode = config.iterative ? ResolutionMode::kIterative : ResolutionMode::kExternal;
  rc.external_resolvers = config.name_servers;
  if (!config.root_hints.empty()) rc.root_hints = config.root_hints;
  rc.timeout = std::chrono::milliseconds(config.timeout_ms);
  rc.overall_timeout = std::chrono::milliseconds(config.overall_timeout_ms);
  rc.retries = config.retries;
  rc.max_depth = config.max_depth;
  rc.local_addresses = config.local_addresses;
  rc.tcp_only = config.tcp_only;
  rc.all_nameservers = config.all_nameservers;
  rc.nameserver_port = config.nameserver_port;
  return rc;
}

}  // namespace bulkdns
