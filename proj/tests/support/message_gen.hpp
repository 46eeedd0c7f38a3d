#pragma once

// Random DNS messages and fuzz packets for codec property checks.

#include <algorithm>
#include <random>

#include "bulkdns/wire.hpp"

namespace bulkdns::test {

class Generator {
 public:
  explicit Generator(std::uint32_t seed) : rng_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return uniform(0, 1) == 1; }

  std::string bytes_string(int lo, int hi) {
    std::string s(static_cast<std::size_t>(uniform(lo, hi)), '\0');
    for (auto& c : s) c = static_cast<char>(uniform(0, 255));
    return s;
  }

  DomainName name() {
    std::vector<std::string> labels;
    int budget = 254;
    int count = uniform(0, 5);
    for (int i = 0; i < count; ++i) {
      int max_len = std::min(63, budget - 2);
      if (max_len < 1) break;
      auto label = bytes_string(1, std::min(max_len, coin() ? 12 : 63));
      budget -= static_cast<int>(label.size()) + 1;
      labels.push_back(std::move(label));
    }
    return DomainName::from_labels(std::move(labels));
  }

  // Rdata shape follows the type the way the decoder maps it.
  ResourceRecord record() {
    static const std::uint16_t name_types[] = {2, 3, 4, 5, 7, 8, 9, 12};
    static const std::uint16_t typed[] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 15, 16, 28, 41, 99, 257};
    ResourceRecord rr;
    rr.name = name();
    rr.klass = static_cast<std::uint16_t>(coin() ? 1 : uniform(0, 65535));
    rr.ttl = static_cast<std::uint32_t>(uniform(0, 0x7fffffff)) * (coin() ? 2u : 1u);
    switch (uniform(0, 8)) {
      case 0: {
        rr.type = 1;
        Ipv4Rdata rd;
        for (auto& o : rd.octets) o = static_cast<std::uint8_t>(uniform(0, 255));
        rr.rdata = rd;
        break;
      }
      case 1: {
        rr.type = 28;
        Ipv6Rdata rd;
        for (auto& o : rd.octets) o = static_cast<std::uint8_t>(uniform(0, 255));
        rr.rdata = rd;
        break;
      }
      case 2:
        rr.type = name_types[uniform(0, 7)];
        rr.rdata = NameRdata{name()};
        break;
      case 3:
        rr.type = 15;
        rr.rdata = MxRdata{static_cast<std::uint16_t>(uniform(0, 65535)), name()};
        break;
      case 4: {
        rr.type = coin() ? 16 : 99;
        TxtRdata rd;
        int n = uniform(0, 4);
        for (int i = 0; i < n; ++i) rd.strings.push_back(bytes_string(0, coin() ? 20 : 255));
        rr.rdata = rd;
        break;
      }
      case 5: {
        rr.type = 6;
        SoaRdata rd{name(), name()};
        rd.serial = static_cast<std::uint32_t>(uniform(0, 0x7fffffff));
        rd.refresh = static_cast<std::uint32_t>(uniform(0, 100000));
        rd.retry = static_cast<std::uint32_t>(uniform(0, 100000));
        rd.expire = static_cast<std::uint32_t>(uniform(0, 100000));
        rd.minimum = static_cast<std::uint32_t>(uniform(0, 100000));
        rr.rdata = rd;
        break;
      }
      case 6: {
        rr.type = 257;
        CaaRdata rd;
        rd.flags = static_cast<std::uint8_t>(uniform(0, 255));
        rd.tag = bytes_string(1, 15);
        rd.value = bytes_string(0, 40);
        rr.rdata = rd;
        break;
      }
      default: {
        std::uint16_t type;
        do {
          type = static_cast<std::uint16_t>(uniform(0, 65535));
        } while (std::find(std::begin(typed), std::end(typed), type) != std::end(typed));
        rr.type = type;
        auto s = bytes_string(0, 64);
        rr.rdata = RawRdata{std::vector<std::uint8_t>(s.begin(), s.end())};
        break;
      }
    }
    return rr;
  }

  DnsMessage message() {
    DnsMessage m;
    m.id = static_cast<std::uint16_t>(uniform(0, 65535));
    m.flags.response = coin();
    m.flags.authoritative = coin();
    m.flags.truncated = coin();
    m.flags.recursion_desired = coin();
    m.flags.recursion_available = coin();
    m.flags.authenticated = coin();
    m.flags.checking_disabled = coin();
    m.flags.opcode = static_cast<std::uint8_t>(uniform(0, 15));
    m.flags.rcode = static_cast<std::uint8_t>(uniform(0, 15));
    if (uniform(0, 9) > 0) {
      m.question = Question{name(), static_cast<std::uint16_t>(uniform(0, 65535)),
                            static_cast<std::uint16_t>(uniform(0, 65535))};
    }
    for (auto* section : {&m.answers, &m.authorities, &m.additionals}) {
      int n = uniform(0, 4);
      for (int i = 0; i < n; ++i) section->push_back(record());
    }
    if (coin()) m.edns_udp_size = static_cast<std::uint16_t>(uniform(512, 65535));
    return m;
  }

  std::vector<std::uint8_t> noise(std::size_t max_len) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(uniform(0, static_cast<int>(max_len))));
    for (auto& b : out) b = static_cast<std::uint8_t>(uniform(0, 255));
    return out;
  }

  std::mt19937& rng() { return rng_; }

 private:
  std::mt19937 rng_;
};

// Fuzz packet number `index`: noise, a plausible header over noise, or a
// mutated encoding of one of `seeds`.
inline std::vector<std::uint8_t> fuzz_packet(Generator& gen, const std::vector<std::vector<std::uint8_t>>& seeds, int index) {
  std::vector<std::uint8_t> packet;
  switch (index % 4) {
    case 0:
      packet = gen.noise(600);
      break;
    case 1: {
      // Plausible header, random body.
      packet = gen.noise(300);
      if (packet.size() >= 12) {
        for (int k = 4; k < 12; k += 2) {
          packet[k] = 0;
          packet[k + 1] = static_cast<std::uint8_t>(gen.uniform(0, 4));
        }
      }
      break;
    }
    default: {
      packet = seeds[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(seeds.size()) - 1))];
      int flips = gen.uniform(1, 8);
      for (int f = 0; f < flips && !packet.empty(); ++f) {
        auto at = static_cast<std::size_t>(gen.uniform(0, static_cast<int>(packet.size()) - 1));
        switch (gen.uniform(0, 3)) {
          case 0:
            packet[at] ^= static_cast<std::uint8_t>(1u << gen.uniform(0, 7));
            break;
          case 1:
            packet[at] = static_cast<std::uint8_t>(gen.uniform(0, 255));
            break;
          case 2:
            packet.resize(at);
            break;
          default:
            packet[at] = 0xC0;  // plant a pointer
            break;
        }
      }
      break;
    }
  }
  return packet;
}

}  // namespace bulkdns::test
