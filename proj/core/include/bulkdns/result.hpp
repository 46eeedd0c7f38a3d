#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bulkdns/address.hpp"
#include "bulkdns/status.hpp"
#include "bulkdns/wire.hpp"

namespace bulkdns {

/// One hop of an iterative resolution, as served by the wire or the cache.
struct TraceStep {
  int depth = 1;
  DomainName layer;  // zone apex; root at depth 1
  DomainName name;   // the name queried at this hop
  std::string name_server;
  bool cached = false;
  int tries = 1;
  std::uint16_t rrclass = rrclass::IN;
  std::uint16_t rrtype = rrtype::A;
  nlohmann::json results = nlohmann::json::object();
};

/// The per-name output envelope.
struct LookupResult {
  std::string name;
  Status status = Status::kError;
  std::string timestamp;
  std::string rrclass;  // top-level class mnemonic, omitted when empty
  nlohmann::json data = nlohmann::json::object();
  std::vector<TraceStep> trace;
  std::optional<int> tries;  // external-mode attempt count
  std::string error;
};

/// Sectioned response object: answers/authorities/additionals (omitted when
/// empty), flags, protocol and resolver.
nlohmann::json response_to_json(const DnsMessage& message, std::string_view protocol,
                                std::string_view resolver);

nlohmann::json to_json(const TraceStep& step);
nlohmann::json to_json(const LookupResult& result);

/// One line of JSON, invalid UTF-8 replaced.
std::string serialize_line(const LookupResult& result);

/// RFC 3339 UTC with seconds precision, e.g. "2022-05-18T19:19:58Z".
std::string format_timestamp(std::chrono::system_clock::time_point when);

}  // namespace bulkdns
