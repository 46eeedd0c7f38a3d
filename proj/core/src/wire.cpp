#include "bulkdns/wire.hpp"

#include <unordered_map>

namespace bulkdns {
namespace {

constexpr std::size_t kHeaderSize = 12;

class Writer {
 public:
  explicit Writer(bool compress) : compress_(compress) { out_.reserve(512); }

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
  }
  void bytes(std::span<const std::uint8_t> data) { out_.insert(out_.end(), data.begin(), data.end()); }
  void bytes(std::string_view data) { out_.insert(out_.end(), data.begin(), data.end()); }

  void character_string(std::string_view s) {
    if (s.size() > 255) throw EncodeError("character-string exceeds 255 bytes");
    u8(static_cast<std::uint8_t>(s.size()));
    bytes(s);
  }

  void name(const DomainName& name, bool allow_compression) {
    const auto& labels = name.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (compress_ && allow_compression) {
        std::string key = name.suffix(labels.size() - i).canonical();
        if (auto it = offsets_.find(key); it != offsets_.end()) {
          u16(static_cast<std::uint16_t>(0xC000 | it->second));
          return;
        }
        if (out_.size() < 0x4000) offsets_.emplace(std::move(key), static_cast<std::uint16_t>(out_.size()));
      }
      u8(static_cast<std::uint8_t>(labels[i].size()));
      bytes(labels[i]);
    }
    u8(0);
  }

  std::size_t size() const { return out_.size(); }
  void patch_u16(std::size_t at, std::uint16_t v) {
    out_[at] = static_cast<std::uint8_t>(v >> 8);
    out_[at + 1] = static_cast<std::uint8_t>(v);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  bool compress_;
  std::vector<std::uint8_t> out_;
  std::unordered_map<std::string, std::uint16_t> offsets_;
};

std::uint16_t pack_flags(const MessageFlags& f) {
  std::uint16_t v = 0;
  if (f.response) v |= 0x8000;
  v |= static_cast<std::uint16_t>((f.opcode & 0x0f) << 11);
  if (f.authoritative) v |= 0x0400;
  if (f.truncated) v |= 0x0200;
  if (f.recursion_desired) v |= 0x0100;
  if (f.recursion_available) v |= 0x0080;
  if (f.authenticated) v |= 0x0020;
  if (f.checking_disabled) v |= 0x0010;
  v |= static_cast<std::uint16_t>(f.rcode & 0x0f);
  return v;
}

MessageFlags unpack_flags(std::uint16_t v) {
  MessageFlags f;
  f.response = v & 0x8000;
  f.opcode = static_cast<std::uint8_t>((v >> 11) & 0x0f);
  f.authoritative = v & 0x0400;
  f.truncated = v & 0x0200;
  f.recursion_desired = v & 0x0100;
  f.recursion_available = v & 0x0080;
  f.authenticated = v & 0x0020;
  f.checking_disabled = v & 0x0010;
  f.rcode = static_cast<std::uint8_t>(v & 0x0f);
  return f;
}

void write_rdata(Writer& w, std::uint16_t type, const Rdata& rdata) {
  // Compression inside rdata is only legal for the RFC 1035 well-known types.
  bool compressible = is_single_name_type(type) || type == rrtype::MX || type == rrtype::SOA;
  std::visit(
      [&](const auto& rd) {
        using T = std::decay_t<decltype(rd)>;
        if constexpr (std::is_same_v<T, RawRdata>) {
          w.bytes(rd.bytes);
        } else if constexpr (std::is_same_v<T, Ipv4Rdata> || std::is_same_v<T, Ipv6Rdata>) {
          w.bytes(rd.octets);
        } else if constexpr (std::is_same_v<T, NameRdata>) {
          w.name(rd.target, compressible);
        } else if constexpr (std::is_same_v<T, MxRdata>) {
          w.u16(rd.preference);
          w.name(rd.exchange, compressible);
        } else if constexpr (std::is_same_v<T, TxtRdata>) {
          for (const auto& s : rd.strings) w.character_string(s);
        } else if constexpr (std::is_same_v<T, SoaRdata>) {
          w.name(rd.mname, compressible);
          w.name(rd.rname, compressible);
          w.u32(rd.serial);
          w.u32(rd.refresh);
          w.u32(rd.retry);
          w.u32(rd.expire);
          w.u32(rd.minimum);
        } else if constexpr (std::is_same_v<T, CaaRdata>) {
          if (rd.tag.empty()) throw EncodeError("CAA tag must not be empty");
          w.u8(rd.flags);
          w.character_string(rd.tag);
          w.bytes(rd.value);
        }
      },
      rdata);
}

void write_record(Writer& w, const ResourceRecord& rr) {
  w.name(rr.name, true);
  w.u16(rr.type);
  w.u16(rr.klass);
  w.u32(rr.ttl);
  std::size_t length_at = w.size();
  w.u16(0);
  write_rdata(w, rr.type, rr.rdata);
  std::size_t length = w.size() - length_at - 2;
  if (length > 0xffff) throw EncodeError("rdata exceeds 65535 bytes");
  w.patch_u16(length_at, static_cast<std::uint16_t>(length));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> packet) : packet_(packet) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }
  std::size_t remaining() const { return packet_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (packet_.size() - pos_ < n) throw DecodeError(std::string("truncated ") + what, pos_);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return packet_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>((packet_[pos_] << 8) | packet_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t hi = u16(what);
    return (hi << 16) | u16(what);
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = packet_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  DomainName name() {
    auto [name, next] = decode_name(packet_, pos_);
    pos_ = next;
    return name;
  }
  std::span<const std::uint8_t> packet() const { return packet_; }

 private:
  std::span<const std::uint8_t> packet_;
  std::size_t pos_ = 0;
};

Rdata read_rdata(Reader& r, std::uint16_t type, std::size_t length) {
  std::size_t start = r.pos();
  std::size_t end = start + length;
  r.need(length, "rdata");
  auto expect_end = [&](const char* what) {
    if (r.pos() != end) throw DecodeError(std::string("rdata length mismatch for ") + what, start);
  };
  switch (type) {
    case rrtype::A: {
      if (length != 4) throw DecodeError("A rdata must be 4 bytes", start);
      Ipv4Rdata rd;
      auto s = r.take(4, "A rdata");
      std::copy(s.begin(), s.end(), rd.octets.begin());
      return rd;
    }
    case rrtype::AAAA: {
      if (length != 16) throw DecodeError("AAAA rdata must be 16 bytes", start);
      Ipv6Rdata rd;
      auto s = r.take(16, "AAAA rdata");
      std::copy(s.begin(), s.end(), rd.octets.begin());
      return rd;
    }
    case rrtype::MX: {
      MxRdata rd;
      rd.preference = r.u16("MX preference");
      rd.exchange = r.name();
      expect_end("MX");
      return rd;
    }
    case rrtype::TXT:
    case rrtype::SPF: {
      TxtRdata rd;
      while (r.pos() < end) {
        std::size_t len = r.u8("TXT length");
        if (r.pos() + len > end) throw DecodeError("TXT string overruns rdata", r.pos());
        auto s = r.take(len, "TXT string");
        rd.strings.emplace_back(s.begin(), s.end());
      }
      return rd;
    }
    case rrtype::SOA: {
      SoaRdata rd;
      rd.mname = r.name();
      rd.rname = r.name();
      rd.serial = r.u32("SOA serial");
      rd.refresh = r.u32("SOA refresh");
      rd.retry = r.u32("SOA retry");
      rd.expire = r.u32("SOA expire");
      rd.minimum = r.u32("SOA minimum");
      expect_end("SOA");
      return rd;
    }
    case rrtype::CAA: {
      CaaRdata rd;
      if (length < 2) throw DecodeError("CAA rdata too short", start);
      rd.flags = r.u8("CAA flags");
      std::size_t tag_len = r.u8("CAA tag length");
      if (tag_len == 0 || r.pos() + tag_len > end) throw DecodeError("bad CAA tag length", r.pos());
      auto tag = r.take(tag_len, "CAA tag");
      rd.tag.assign(tag.begin(), tag.end());
      auto value = r.take(end - r.pos(), "CAA value");
      rd.value.assign(value.begin(), value.end());
      return rd;
    }
    default:
      break;
  }
  if (is_single_name_type(type)) {
    NameRdata rd{r.name()};
    expect_end(type_to_string(type).c_str());
    return rd;
  }
  auto s = r.take(length, "rdata");
  return RawRdata{std::vector<std::uint8_t>(s.begin(), s.end())};
}

}  // namespace

bool is_single_name_type(std::uint16_t type) {
  switch (type) {
    case rrtype::NS:
    case rrtype::CNAME:
    case rrtype::PTR:
    case rrtype::MB:
    case rrtype::MD:
    case rrtype::MF:
    case rrtype::MG:
    case rrtype::MR:
      return true;
    default:
      return false;
  }
}

std::vector<std::uint8_t> encode_message(const DnsMessage& message, bool compress) {
  Writer w(compress);
  w.u16(message.id);
  w.u16(pack_flags(message.flags));
  w.u16(message.question ? 1 : 0);
  auto count = [](const std::vector<ResourceRecord>& section) {
    if (section.size() > 0xffff) throw EncodeError("section exceeds 65535 records");
    return static_cast<std::uint16_t>(section.size());
  };
  w.u16(count(message.answers));
  w.u16(count(message.authorities));
  w.u16(static_cast<std::uint16_t>(count(message.additionals) + (message.edns_udp_size ? 1 : 0)));
  if (message.question) {
    w.name(message.question->name, true);
    w.u16(message.question->type);
    w.u16(message.question->klass);
  }
  for (const auto& rr : message.answers) write_record(w, rr);
  for (const auto& rr : message.authorities) write_record(w, rr);
  for (const auto& rr : message.additionals) write_record(w, rr);
  if (message.edns_udp_size) {
    w.u8(0);
    w.u16(rrtype::OPT);
    w.u16(*message.edns_udp_size);
    w.u32(0);
    w.u16(0);
  }
  return w.take();
}

std::vector<std::uint8_t> encode_query(const Question& question, std::uint16_t id,
                                       bool recursion_desired, std::uint16_t udp_payload_size) {
  if (question.name.wire_length() > kMaxNameLength) throw EncodeError("name exceeds 255 bytes");
  DnsMessage m;
  m.id = id;
  m.flags.recursion_desired = recursion_desired;
  m.question = question;
  if (udp_payload_size > 512) m.edns_udp_size = udp_payload_size;
  return encode_message(m, false);
}

std::pair<DomainName, std::size_t> decode_name(std::span<const std::uint8_t> packet,
                                               std::size_t offset) {
  if (offset >= packet.size()) throw DecodeError("name offset beyond packet", offset);
  std::vector<std::string> labels;
  std::vector<std::size_t> visited;
  std::size_t pos = offset;
  std::optional<std::size_t> next;
  std::size_t total = 1;
  while (true) {
    if (pos >= packet.size()) throw DecodeError("name runs past end of packet", pos);
    std::uint8_t len = packet[pos];
    if ((len & 0xC0) == 0xC0) {
      if (pos + 1 >= packet.size()) throw DecodeError("truncated compression pointer", pos);
      std::size_t target = static_cast<std::size_t>(((len & 0x3F) << 8) | packet[pos + 1]);
      if (!next) next = pos + 2;
      for (std::size_t seen : visited) {
        if (seen == pos) throw DecodeError("compression pointer loop", pos);
      }
      visited.push_back(pos);
      if (target >= packet.size()) throw DecodeError("compression pointer beyond packet", pos);
      pos = target;
      continue;
    }
    if ((len & 0xC0) != 0) throw DecodeError("unsupported label type", pos);
    if (len == 0) {
      if (!next) next = pos + 1;
      break;
    }
    if (pos + 1 + len > packet.size()) throw DecodeError("label overruns packet", pos);
    total += len + 1u;
    if (total > kMaxNameLength) throw DecodeError("name exceeds 255 bytes", pos);
    labels.emplace_back(reinterpret_cast<const char*>(packet.data() + pos + 1), len);
    pos += 1 + len;
  }
  return {DomainName::from_labels(std::move(labels)), *next};
}

DnsMessage decode_message(std::span<const std::uint8_t> packet) {
  if (packet.size() < kHeaderSize) throw DecodeError("packet shorter than header", 0);
  Reader r(packet);
  DnsMessage m;
  m.id = r.u16("header");
  m.flags = unpack_flags(r.u16("header"));
  std::uint16_t qdcount = r.u16("header");
  std::uint16_t ancount = r.u16("header");
  std::uint16_t nscount = r.u16("header");
  std::uint16_t arcount = r.u16("header");

  for (std::uint16_t i = 0; i < qdcount; ++i) {
    Question q;
    q.name = r.name();
    q.type = r.u16("question");
    q.klass = r.u16("question");
    if (i == 0) m.question = std::move(q);
  }

  auto read_section = [&](std::uint16_t count, std::vector<ResourceRecord>& section, bool additional) {
    // Each record needs at least 11 bytes; reject absurd counts before reserving.
    if (static_cast<std::size_t>(count) * 11 > r.remaining()) {
      throw DecodeError("record count exceeds packet size", r.pos());
    }
    section.reserve(count);
    for (std::uint16_t i = 0; i < count; ++i) {
      ResourceRecord rr;
      rr.name = r.name();
      rr.type = r.u16("record header");
      rr.klass = r.u16("record header");
      rr.ttl = r.u32("record header");
      std::uint16_t rdlength = r.u16("record header");
      if (additional && rr.type == rrtype::OPT) {
        r.take(rdlength, "OPT rdata");
        m.edns_udp_size = rr.klass;
        continue;
      }
      rr.rdata = read_rdata(r, rr.type, rdlength);
      section.push_back(std::move(rr));
    }
  };
  read_section(ancount, m.answers, false);
  read_section(nscount, m.authorities, false);
  read_section(arcount, m.additionals, true);
  return m;
}

nlohmann::json flags_to_json(const MessageFlags& f) {
  return {
      {"authenticated", f.authenticated},
      {"authoritative", f.authoritative},
      {"checking_disabled", f.checking_disabled},
      {"error_code", f.rcode},
      {"opcode", f.opcode},
      {"recursion_available", f.recursion_available},
      {"recursion_desired", f.recursion_desired},
      {"response", f.response},
      {"truncated", f.truncated},
  };
}

nlohmann::json record_to_json(const ResourceRecord& rr) {
  return {
      {"answer", rdata_to_string(rr.type, rr.rdata)},
      {"class", class_to_string(rr.klass)},
      {"name", rr.name.to_string()},
      {"ttl", rr.ttl},
      {"type", type_to_string(rr.type)},
  };
}

}  // namespace bulkdns
