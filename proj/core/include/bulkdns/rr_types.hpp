#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace bulkdns {

namespace rrtype {
inline constexpr std::uint16_t A = 1;
inline constexpr std::uint16_t NS = 2;
inline constexpr std::uint16_t MD = 3;
inline constexpr std::uint16_t MF = 4;
inline constexpr std::uint16_t CNAME = 5;
inline constexpr std::uint16_t SOA = 6;
inline constexpr std::uint16_t MB = 7;
inline constexpr std::uint16_t MG = 8;
inline constexpr std::uint16_t MR = 9;
inline constexpr std::uint16_t PTR = 12;
inline constexpr std::uint16_t HINFO = 13;
inline constexpr std::uint16_t MX = 15;
inline constexpr std::uint16_t TXT = 16;
inline constexpr std::uint16_t AAAA = 28;
inline constexpr std::uint16_t SRV = 33;
inline constexpr std::uint16_t OPT = 41;
inline constexpr std::uint16_t DS = 43;
inline constexpr std::uint16_t RRSIG = 46;
inline constexpr std::uint16_t DNSKEY = 48;
inline constexpr std::uint16_t SPF = 99;
inline constexpr std::uint16_t AXFR = 252;
inline constexpr std::uint16_t ANY = 255;
inline constexpr std::uint16_t CAA = 257;
}  // namespace rrtype

namespace rrclass {
inline constexpr std::uint16_t IN = 1;
inline constexpr std::uint16_t CH = 3;
inline constexpr std::uint16_t HS = 4;
inline constexpr std::uint16_t ANY = 255;
}  // namespace rrclass

namespace rcode {
inline constexpr std::uint8_t NOERROR = 0;
inline constexpr std::uint8_t FORMERR = 1;
inline constexpr std::uint8_t SERVFAIL = 2;
inline constexpr std::uint8_t NXDOMAIN = 3;
inline constexpr std::uint8_t NOTIMP = 4;
inline constexpr std::uint8_t REFUSED = 5;
}  // namespace rcode

struct TypeInfo {
  std::string_view mnemonic;
  std::uint16_t code;
};

/// The record types with mnemonic names: the measured-type list plus OPT.
/// Anything outside it is rendered "TYPE<n>".
std::span<const TypeInfo> known_types();

/// "A", "NSAPPTR", ... or "TYPE<n>".
std::string type_to_string(std::uint16_t type);
/// Accepts mnemonics (any case) and the "TYPE<n>" form.
std::optional<std::uint16_t> type_from_string(std::string_view text);

/// "IN", "CH", "HS", "ANY" or "CLASS<n>".
std::string class_to_string(std::uint16_t klass);
std::optional<std::uint16_t> class_from_string(std::string_view text);

}  // namespace bulkdns
