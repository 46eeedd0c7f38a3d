#include <arpa/inet.h>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "bulkdns/wire.hpp"

namespace bulkdns {
namespace {

struct Token {
  std::string text;
  bool quoted = false;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    Token tok;
    if (text[i] == '"') {
      tok.quoted = true;
      ++i;
      bool closed = false;
      while (i < text.size()) {
        char c = text[i];
        if (c == '\\' && i + 1 < text.size()) {
          if (std::isdigit(static_cast<unsigned char>(text[i + 1])) && i + 3 < text.size()) {
            tok.text.push_back(static_cast<char>((text[i + 1] - '0') * 100 + (text[i + 2] - '0') * 10 +
                                                 (text[i + 3] - '0')));
            i += 4;
          } else {
            tok.text.push_back(text[i + 1]);
            i += 2;
          }
          continue;
        }
        if (c == '"') {
          closed = true;
          ++i;
          break;
        }
        tok.text.push_back(c);
        ++i;
      }
      if (!closed) throw WireError("unterminated quoted string in rdata");
    } else {
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
        tok.text.push_back(text[i]);
        ++i;
      }
    }
    out.push_back(std::move(tok));
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw WireError(std::string("invalid ") + what + ": '" + text + "'");
  }
  return value;
}

DomainName resolve_name(const std::string& token, const DomainName& origin) {
  if (token == "@") return origin;
  if (!token.empty() && token.back() == '.') return DomainName::parse(token);
  auto relative = DomainName::parse(token);
  std::vector<std::string> labels = relative.labels();
  labels.insert(labels.end(), origin.labels().begin(), origin.labels().end());
  return DomainName::from_labels(std::move(labels));
}

void expect_count(const std::vector<Token>& tokens, std::size_t n, std::uint16_t type) {
  if (tokens.size() != n) {
    throw WireError(type_to_string(type) + " rdata expects " + std::to_string(n) + " fields");
  }
}

std::string quote(std::string_view value) {
  std::string out = "\"";
  for (unsigned char c : value) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(static_cast<char>(c));
    } else if (c < 0x20 || c > 0x7e) {
      char buf[5];
      std::snprintf(buf, sizeof buf, "\\%03u", c);
      out += buf;
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  out.push_back('"');
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string hex_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

std::string rdata_to_string(std::uint16_t /*type*/, const Rdata& rdata) {
  return std::visit(
      [](const auto& rd) -> std::string {
        using T = std::decay_t<decltype(rd)>;
        if constexpr (std::is_same_v<T, RawRdata>) {
          return hex_encode(rd.bytes);
        } else if constexpr (std::is_same_v<T, Ipv4Rdata>) {
          char buf[INET_ADDRSTRLEN];
          inet_ntop(AF_INET, rd.octets.data(), buf, sizeof buf);
          return buf;
        } else if constexpr (std::is_same_v<T, Ipv6Rdata>) {
          char buf[INET6_ADDRSTRLEN];
          inet_ntop(AF_INET6, rd.octets.data(), buf, sizeof buf);
          return buf;
        } else if constexpr (std::is_same_v<T, NameRdata>) {
          return rd.target.to_fqdn();
        } else if constexpr (std::is_same_v<T, MxRdata>) {
          return std::to_string(rd.preference) + " " + rd.exchange.to_fqdn();
        } else if constexpr (std::is_same_v<T, TxtRdata>) {
          std::string out;
          for (const auto& s : rd.strings) out += s;
          return out;
        } else if constexpr (std::is_same_v<T, SoaRdata>) {
          std::ostringstream os;
          os << rd.mname.to_fqdn() << ' ' << rd.rname.to_fqdn() << ' ' << rd.serial << ' '
             << rd.refresh << ' ' << rd.retry << ' ' << rd.expire << ' ' << rd.minimum;
          return os.str();
        } else {
          return std::to_string(rd.flags) + " " + rd.tag + " " + quote(rd.value);
        }
      },
      rdata);
}

Rdata parse_rdata(std::uint16_t type, std::string_view text, const DomainName& origin) {
  auto tokens = tokenize(text);
  if (!tokens.empty() && tokens[0].text == "\\#" && !tokens[0].quoted) {
    if (tokens.size() < 2) throw WireError("\\# rdata needs a length");
    auto length = parse_number<std::size_t>(tokens[1].text, "rdata length");
    std::string hex;
    for (std::size_t i = 2; i < tokens.size(); ++i) hex += tokens[i].text;
    if (hex.size() != length * 2) throw WireError("\\# rdata length mismatch");
    RawRdata raw;
    for (std::size_t i = 0; i < hex.size(); i += 2) {
      int hi = hex_value(hex[i]);
      int lo = hex_value(hex[i + 1]);
      if (hi < 0 || lo < 0) throw WireError("invalid hex in rdata");
      raw.bytes.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return raw;
  }
  switch (type) {
    case rrtype::A: {
      expect_count(tokens, 1, type);
      Ipv4Rdata rd;
      if (inet_pton(AF_INET, tokens[0].text.c_str(), rd.octets.data()) != 1) {
        throw WireError("invalid IPv4 address '" + tokens[0].text + "'");
      }
      return rd;
    }
    case rrtype::AAAA: {
      expect_count(tokens, 1, type);
      Ipv6Rdata rd;
      if (inet_pton(AF_INET6, tokens[0].text.c_str(), rd.octets.data()) != 1) {
        throw WireError("invalid IPv6 address '" + tokens[0].text + "'");
      }
      return rd;
    }
    case rrtype::MX: {
      expect_count(tokens, 2, type);
      return MxRdata{parse_number<std::uint16_t>(tokens[0].text, "MX preference"),
                     resolve_name(tokens[1].text, origin)};
    }
    case rrtype::TXT:
    case rrtype::SPF: {
      if (tokens.empty()) throw WireError("TXT rdata needs at least one string");
      TxtRdata rd;
      for (auto& tok : tokens) {
        if (tok.text.size() > 255) throw WireError("TXT string exceeds 255 bytes");
        rd.strings.push_back(std::move(tok.text));
      }
      return rd;
    }
    case rrtype::SOA: {
      expect_count(tokens, 7, type);
      SoaRdata rd;
      rd.mname = resolve_name(tokens[0].text, origin);
      rd.rname = resolve_name(tokens[1].text, origin);
      rd.serial = parse_number<std::uint32_t>(tokens[2].text, "SOA serial");
      rd.refresh = parse_number<std::uint32_t>(tokens[3].text, "SOA refresh");
      rd.retry = parse_number<std::uint32_t>(tokens[4].text, "SOA retry");
      rd.expire = parse_number<std::uint32_t>(tokens[5].text, "SOA expire");
      rd.minimum = parse_number<std::uint32_t>(tokens[6].text, "SOA minimum");
      return rd;
    }
    case rrtype::CAA: {
      expect_count(tokens, 3, type);
      CaaRdata rd;
      rd.flags = parse_number<std::uint8_t>(tokens[0].text, "CAA flags");
      rd.tag = tokens[1].text;
      if (rd.tag.empty() || rd.tag.size() > 255) throw WireError("invalid CAA tag");
      rd.value = tokens[2].text;
      return rd;
    }
    default:
      break;
  }
  if (is_single_name_type(type)) {
    expect_count(tokens, 1, type);
    return NameRdata{resolve_name(tokens[0].text, origin)};
  }
  throw WireError("no presentation parser for " + type_to_string(type) + "; use \\# syntax");
}

}  // namespace bulkdns
