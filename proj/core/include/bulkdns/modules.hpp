#pragma once

// Lookup modules: the registry and the built-in set.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/asio/awaitable.hpp>
#include <nlohmann/json.hpp>

#include "bulkdns/resolver.hpp"

namespace bulkdns {

struct ModuleOptions {
  bool ipv4_lookup = false;
  bool ipv6_lookup = false;
  bool all_nameservers = false;
};

struct ModuleResult {
  Status status = Status::kError;
  nlohmann::json data = nlohmann::json::object();
  std::vector<TraceStep> trace;
  std::optional<int> tries;
  std::string error;
};

using LookupFn = std::function<boost::asio::awaitable<ModuleResult>(
    const std::string& input, std::optional<ServerAddress> name_server, Resolver& resolver,
    const ModuleOptions& options)>;

struct ModuleDescriptor {
  std::string name;
  std::uint16_t rrtype = rrtype::A;
  std::uint16_t rrclass = rrclass::IN;
  std::string description;
  LookupFn lookup;
};

class ModuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Case-insensitive name → descriptor map. Not thread-safe for registration;
/// register everything before the scan starts.
class ModuleRegistry {
 public:
  /// Throws ModuleError on a duplicate name.
  void register_module(ModuleDescriptor descriptor);
  const ModuleDescriptor* find(std::string_view name) const;
  /// Registered names as given at registration, sorted case-insensitively.
  std::vector<std::string> names() const;
  std::size_t size() const { return modules_.size(); }

 private:
  std::map<std::string, ModuleDescriptor> modules_;  // keyed by lowercase name
};

/// Raw modules for the measured-type list, plus ALOOKUP, MXLOOKUP, BINDVERSION
/// and the CAA/SPF/DMARC value-added modules.
void register_builtin_modules(ModuleRegistry& registry);

/// A registry holding the built-ins, created on first use.
const ModuleRegistry& builtin_registry();

/// 1.2.3.4 → 4.3.2.1.in-addr.arpa. Throws std::invalid_argument on a bad address.
DomainName ptr_name(std::string_view ipv4);

boost::asio::awaitable<ModuleResult> raw_lookup(const std::string& input, std::uint16_t type,
                                                std::uint16_t klass, std::optional<ServerAddress> name_server,
                                                Resolver& resolver, const ModuleOptions& options);

boost::asio::awaitable<ModuleResult> alookup(const std::string& input, bool want_ipv4, bool want_ipv6,
                                             std::optional<ServerAddress> name_server, Resolver& resolver);

boost::asio::awaitable<ModuleResult> mxlookup(const std::string& input, bool resolve_ipv4, bool resolve_ipv6,
                                              std::optional<ServerAddress> name_server, Resolver& resolver);

boost::asio::awaitable<ModuleResult> caa_lookup(const std::string& input, std::optional<ServerAddress> name_server,
                                                Resolver& resolver);

/// `input` is the server to ask ("ip" or "ip:port"); `name_server`, when
/// present, takes precedence.
boost::asio::awaitable<ModuleResult> bind_version(const std::string& input,
                                                  std::optional<ServerAddress> name_server, Resolver& resolver);

/// TXT lookup keeping the first string that matches `pattern` (ECMAScript
/// regex), reported under `key`.
boost::asio::awaitable<ModuleResult> txt_filter_lookup(const std::string& input, std::string pattern,
                                                       bool ignore_case, std::string key,
                                                       std::optional<ServerAddress> name_server,
                                                       Resolver& resolver);

/// Parsed CAA entry: {"flag", "tag", "value"} plus "invalid_tag": true for
/// tags other than issue/issuewild/iodef.
nlohmann::json caa_to_json(const CaaRdata& caa);

}  // namespace bulkdns
