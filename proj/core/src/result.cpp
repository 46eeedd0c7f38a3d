#include "bulkdns/result.hpp"

#include <ctime>

namespace bulkdns {
namespace {

nlohmann::json section_to_json(const std::vector<ResourceRecord>& records) {
  auto out = nlohmann::json::array();
  for (const auto& rr : records) out.push_back(record_to_json(rr));
  return out;
}

}  // namespace

nlohmann::json response_to_json(const DnsMessage& message, std::string_view protocol,
                                std::string_view resolver) {
  nlohmann::json out = nlohmann::json::object();
  if (!message.answers.empty()) out["answers"] = section_to_json(message.answers);
  if (!message.authorities.empty()) out["authorities"] = section_to_json(message.authorities);
  if (!message.additionals.empty()) out["additionals"] = section_to_json(message.additionals);
  out["flags"] = flags_to_json(message.flags);
  out["protocol"] = protocol;
  out["resolver"] = resolver;
  return out;
}

nlohmann::json to_json(const TraceStep& step) {
  return {
      {"cached", step.cached},
      {"class", step.rrclass},
      {"depth", step.depth},
      {"layer", step.layer.to_string()},
      {"name", step.name.to_string()},
      {"name_server", step.name_server},
      {"results", step.results},
      {"try", step.tries},
      {"type", step.rrtype},
  };
}

nlohmann::json to_json(const LookupResult& result) {
  nlohmann::json out = nlohmann::json::object();
  out["name"] = result.name;
  out["status"] = to_string(result.status);
  out["timestamp"] = result.timestamp;
  if (!result.rrclass.empty()) out["class"] = result.rrclass;
  if (!result.data.is_null() && !result.data.empty()) out["data"] = result.data;
  if (!result.trace.empty()) {
    auto trace = nlohmann::json::array();
    for (const auto& step : result.trace) trace.push_back(to_json(step));
    out["trace"] = std::move(trace);
  }
  if (result.tries) out["try"] = *result.tries;
  if (!result.error.empty()) out["error"] = result.error;
  return out;
}

std::string serialize_line(const LookupResult& result) {
  return to_json(result).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string format_timestamp(std::chrono::system_clock::time_point when) {
  std::time_t t = std::chrono::system_clock::to_time_t(when);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace bulkdns
