#include "bulkdns/modules.hpp"

#include <algorithm>
#include <charconv>

namespace bulkdns {

void ModuleRegistry::register_module(ModuleDescriptor descriptor) {
  if (descriptor.name.empty()) throw ModuleError("module name must not be empty");
  if (!descriptor.lookup) throw ModuleError("module " + descriptor.name + " has no lookup function");
  auto key = ascii_lower(descriptor.name);
  if (modules_.count(key)) throw ModuleError("duplicate module name: " + descriptor.name);
  modules_.emplace(std::move(key), std::move(descriptor));
}

const ModuleDescriptor* ModuleRegistry::find(std::string_view name) const {
  auto it = modules_.find(ascii_lower(name));
  return it == modules_.end() ? nullptr : &it->second;
}

std::vector<std::string> ModuleRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(modules_.size());
  for (const auto& [key, descriptor] : modules_) out.push_back(descriptor.name);
  return out;
}

const ModuleRegistry& builtin_registry() {
  static const ModuleRegistry registry = [] {
    ModuleRegistry r;
    register_builtin_modules(r);
    return r;
  }();
  return registry;
}

DomainName ptr_name(std::string_view ipv4) {
  std::vector<std::string> octets;
  std::size_t start = 0;
  while (true) {
    auto dot = ipv4.find('.', start);
    auto part = ipv4.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || part.size() > 3 || ec != std::errc() || ptr != part.data() + part.size() || value > 255) {
      throw std::invalid_argument("invalid IPv4 address: " + std::string(ipv4));
    }
    octets.push_back(std::to_string(value));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (octets.size() != 4) throw std::invalid_argument("invalid IPv4 address: " + std::string(ipv4));
  std::reverse(octets.begin(), octets.end());
  octets.push_back("in-addr");
  octets.push_back("arpa");
  return DomainName::from_labels(std::move(octets));
}

nlohmann::json caa_to_json(const CaaRdata& caa) {
  nlohmann::json out = {{"flag", caa.flags}, {"tag", caa.tag}, {"value", caa.value}};
  auto tag = ascii_lower(caa.tag);
  if (tag != "issue" && tag != "issuewild" && tag != "iodef") out["invalid_tag"] = true;
  return out;
}

}  // namespace bulkdns
