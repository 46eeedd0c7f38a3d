#pragma once

// RFC 1035 message model and codec, with EDNS0 payload-size advertisement.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bulkdns/name.hpp"
#include "bulkdns/rr_types.hpp"

namespace bulkdns {

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EncodeError : public WireError {
 public:
  using WireError::WireError;
};

/// A malformed packet. `offset()` is the byte position where parsing failed.
class DecodeError : public WireError {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : WireError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct Question {
  DomainName name;
  std::uint16_t type = rrtype::A;
  std::uint16_t klass = rrclass::IN;

  friend bool operator==(const Question&, const Question&) = default;
};

struct Ipv4Rdata {
  std::array<std::uint8_t, 4> octets{};
  friend bool operator==(const Ipv4Rdata&, const Ipv4Rdata&) = default;
};

struct Ipv6Rdata {
  std::array<std::uint8_t, 16> octets{};
  friend bool operator==(const Ipv6Rdata&, const Ipv6Rdata&) = default;
};

/// NS, CNAME, PTR and the other single-target types.
struct NameRdata {
  DomainName target;
  friend bool operator==(const NameRdata&, const NameRdata&) = default;
};

struct MxRdata {
  std::uint16_t preference = 0;
  DomainName exchange;
  friend bool operator==(const MxRdata&, const MxRdata&) = default;
};

/// TXT and SPF character-strings, each at most 255 bytes.
struct TxtRdata {
  std::vector<std::string> strings;
  friend bool operator==(const TxtRdata&, const TxtRdata&) = default;
};

struct SoaRdata {
  DomainName mname;
  DomainName rname;
  std::uint32_t serial = 0;
  std::uint32_t refresh = 0;
  std::uint32_t retry = 0;
  std::uint32_t expire = 0;
  std::uint32_t minimum = 0;
  friend bool operator==(const SoaRdata&, const SoaRdata&) = default;
};

struct CaaRdata {
  std::uint8_t flags = 0;
  std::string tag;
  std::string value;
  friend bool operator==(const CaaRdata&, const CaaRdata&) = default;
};

struct RawRdata {
  std::vector<std::uint8_t> bytes;
  friend bool operator==(const RawRdata&, const RawRdata&) = default;
};

using Rdata = std::variant<RawRdata, Ipv4Rdata, Ipv6Rdata, NameRdata, MxRdata, TxtRdata, SoaRdata,
                           CaaRdata>;

struct ResourceRecord {
  DomainName name;
  std::uint16_t type = rrtype::A;
  std::uint16_t klass = rrclass::IN;
  std::uint32_t ttl = 0;
  Rdata rdata;

  friend bool operator==(const ResourceRecord&, const ResourceRecord&) = default;
};

struct MessageFlags {
  bool response = false;
  bool authoritative = false;
  bool truncated = false;
  bool recursion_desired = false;
  bool recursion_available = false;
  bool authenticated = false;
  bool checking_disabled = false;
  std::uint8_t opcode = 0;
  std::uint8_t rcode = 0;

  friend bool operator==(const MessageFlags&, const MessageFlags&) = default;
};

struct DnsMessage {
  std::uint16_t id = 0;
  MessageFlags flags;
  std::optional<Question> question;
  std::vector<ResourceRecord> answers;
  std::vector<ResourceRecord> authorities;
  std::vector<ResourceRecord> additionals;
  /// Payload size from an OPT pseudo-record; OPT never appears in `additionals`.
  std::optional<std::uint16_t> edns_udp_size;

  friend bool operator==(const DnsMessage&, const DnsMessage&) = default;
};

/// Types whose rdata is a single domain name (NS, CNAME, PTR, MB, MD, MF, MG, MR).
bool is_single_name_type(std::uint16_t type);

/// Serializes a message. `compress` enables RFC 1035 name compression for owner
/// names and for the names embedded in NS/CNAME/PTR/MX/SOA rdata.
std::vector<std::uint8_t> encode_message(const DnsMessage& message, bool compress = false);

/// Builds a query packet; attaches an OPT record when `udp_payload_size` > 512.
std::vector<std::uint8_t> encode_query(const Question& question, std::uint16_t id,
                                       bool recursion_desired, std::uint16_t udp_payload_size);

/// Reads the (possibly compressed) name at `offset`. The returned offset points
/// just past the name as written at `offset`.
std::pair<DomainName, std::size_t> decode_name(std::span<const std::uint8_t> packet,
                                               std::size_t offset);

DnsMessage decode_message(std::span<const std::uint8_t> packet);

/// Presentation form of the rdata ("192.5.6.30", "ns2.google.com.",
/// `0 issue "letsencrypt.org"`); unparsed rdata renders as lowercase hex.
std::string rdata_to_string(std::uint16_t type, const Rdata& rdata);

/// Parses zone-file rdata text for `type`. Relative names are completed with
/// `origin`. Unstructured types accept RFC 3597 `\# <len> <hex>`.
Rdata parse_rdata(std::uint16_t type, std::string_view text, const DomainName& origin = {});

/// {"answer","class","name","ttl","type"} with mnemonic class and type.
nlohmann::json record_to_json(const ResourceRecord& record);
nlohmann::json flags_to_json(const MessageFlags& flags);

std::string hex_encode(std::span<const std::uint8_t> bytes);

}  // namespace bulkdns
