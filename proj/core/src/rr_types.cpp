#include "bulkdns/rr_types.hpp"

#include <array>
#include <charconv>

#include "bulkdns/name.hpp"

namespace bulkdns {
namespace {

constexpr std::array<TypeInfo, 65> kTypes{{
    {"A", 1},          {"NS", 2},          {"MD", 3},          {"MF", 4},
    {"CNAME", 5},      {"SOA", 6},         {"MB", 7},          {"MG", 8},
    {"MR", 9},         {"PTR", 12},        {"HINFO", 13},      {"MX", 15},
    {"TXT", 16},       {"RP", 17},         {"AFSDB", 18},      {"ISDN", 20},
    {"RT", 21},        {"NSAPPTR", 23},    {"KEY", 25},        {"PX", 26},
    {"GPOS", 27},      {"AAAA", 28},       {"LOC", 29},        {"NXT", 30},
    {"EID", 31},       {"SRV", 33},        {"ATMA", 34},       {"NAPTR", 35},
    {"KX", 36},        {"CERT", 37},       {"OPT", 41},        {"DS", 43},
    {"SSHFP", 44},     {"RRSIG", 46},      {"NSEC", 47},       {"DNSKEY", 48},
    {"DHCID", 49},     {"NSEC3", 50},      {"NSEC3PARAM", 51}, {"TLSA", 52},
    {"SMIMEA", 53},    {"HIP", 55},        {"NINFO", 56},      {"TALINK", 58},
    {"CDS", 59},       {"CDNSKEY", 60},    {"OPENPGPKEY", 61}, {"CSYNC", 62},
    {"SPF", 99},       {"UINFO", 100},     {"UID", 101},       {"GID", 102},
    {"UNSPEC", 103},   {"NID", 104},       {"L32", 105},       {"L64", 106},
    {"LP", 107},       {"EUI48", 108},     {"EUI64", 109},     {"TKEY", 249},
    {"AXFR", 252},     {"ANY", 255},       {"URI", 256},       {"CAA", 257},
    {"AVC", 258},
}};

std::optional<std::uint16_t> parse_numeric_suffix(std::string_view text, std::string_view prefix) {
  if (text.size() <= prefix.size() || !labels_equal(text.substr(0, prefix.size()), prefix)) {
    return std::nullopt;
  }
  auto digits = text.substr(prefix.size());
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value > 0xffff) {
    return std::nullopt;
  }
  return static_cast<std::uint16_t>(value);
}

}  // namespace

std::span<const TypeInfo> known_types() { return kTypes; }

std::string type_to_string(std::uint16_t type) {
  for (const auto& info : kTypes) {
    if (info.code == type) return std::string(info.mnemonic);
  }
  return "TYPE" + std::to_string(type);
}

std::optional<std::uint16_t> type_from_string(std::string_view text) {
  for (const auto& info : kTypes) {
    if (labels_equal(info.mnemonic, text)) return info.code;
  }
  return parse_numeric_suffix(text, "TYPE");
}

std::string class_to_string(std::uint16_t klass) {
  switch (klass) {
    case rrclass::IN: return "IN";
    case rrclass::CH: return "CH";
    case rrclass::HS: return "HS";
    case rrclass::ANY: return "ANY";
    default: return "CLASS" + std::to_string(klass);
  }
}

std::optional<std::uint16_t> class_from_string(std::string_view text) {
  if (labels_equal(text, "IN")) return rrclass::IN;
  if (labels_equal(text, "CH") || labels_equal(text, "CHAOS")) return rrclass::CH;
  if (labels_equal(text, "HS")) return rrclass::HS;
  if (labels_equal(text, "ANY")) return rrclass::ANY;
  return parse_numeric_suffix(text, "CLASS");
}

}  // namespace bulkdns
