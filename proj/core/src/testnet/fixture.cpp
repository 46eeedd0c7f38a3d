#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "bulkdns/testnet.hpp"

namespace bulkdns::testnet {

namespace {

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '\\') {
      ++i;
    } else if (c == '"') {
      quoted = !quoted;
    } else if (c == ';' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

// Splits off the next whitespace-delimited word; `rest` keeps what follows.
std::string_view next_word(std::string_view& rest) {
  auto begin = rest.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) {
    rest = {};
    return {};
  }
  auto end = rest.find_first_of(" \t\r", begin);
  auto word = rest.substr(begin, end == std::string_view::npos ? std::string_view::npos : end - begin);
  rest = end == std::string_view::npos ? std::string_view() : rest.substr(end);
  return word;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

DomainName resolve_owner(std::string_view token, const DomainName& origin) {
  if (token == "@") return origin;
  if (!token.empty() && token.back() == '.') return DomainName::parse(token);
  auto labels = DomainName::parse(token).labels();
  labels.insert(labels.end(), origin.labels().begin(), origin.labels().end());
  return DomainName::from_labels(std::move(labels));
}

struct LineState {
  DomainName origin;
  std::uint32_t ttl = 3600;
  std::optional<DomainName> last_owner;
};

// Returns nullopt for blank lines and directives.
std::optional<ResourceRecord> parse_record_line(std::string_view raw, LineState& state) {
  auto line = strip_comment(raw);
  if (line.find_first_not_of(" \t\r") == std::string_view::npos) return std::nullopt;

  std::string_view rest = line;
  bool inherits_owner = std::isspace(static_cast<unsigned char>(line.front()));
  if (!inherits_owner && line.front() == '$') {
    auto directive = next_word(rest);
    auto arg = next_word(rest);
    if (directive == "$TTL") {
      std::uint32_t ttl = 0;
      auto [p, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), ttl);
      if (ec != std::errc() || p != arg.data() + arg.size()) throw FixtureError("bad $TTL: " + std::string(arg));
      state.ttl = ttl;
    } else if (directive == "$ORIGIN") {
      state.origin = DomainName::parse(arg);
    } else {
      throw FixtureError("unknown directive " + std::string(directive));
    }
    return std::nullopt;
  }

  ResourceRecord rr;
  if (inherits_owner) {
    if (!state.last_owner) throw FixtureError("record without owner: " + std::string(raw));
    rr.name = *state.last_owner;
  } else {
    rr.name = resolve_owner(next_word(rest), state.origin);
  }
  rr.ttl = state.ttl;
  rr.klass = rrclass::IN;

  auto word = next_word(rest);
  std::optional<std::uint16_t> type;
  for (int field = 0; field < 3 && !word.empty(); ++field) {
    if (all_digits(word)) {
      std::from_chars(word.data(), word.data() + word.size(), rr.ttl);
    } else if (auto klass = class_from_string(word); klass && word != "ANY") {
      rr.klass = *klass;
    } else {
      type = type_from_string(word);
      break;
    }
    word = next_word(rest);
  }
  if (!type) throw FixtureError("missing or unknown record type: " + std::string(raw));
  rr.type = *type;
  try {
    rr.rdata = parse_rdata(rr.type, rest, state.origin);
  } catch (const std::exception& e) {
    throw FixtureError(std::string(e.what()) + " in: " + std::string(raw));
  }
  state.last_owner = rr.name;
  return rr;
}

}  // namespace

ZoneFixture ZoneFixture::parse(std::string_view text, const DomainName& origin, std::uint32_t default_ttl) {
  ZoneFixture zone;
  zone.zone = origin;
  LineState state{origin, default_ttl, std::nullopt};
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (auto rr = parse_record_line(line, state)) zone.records.push_back(std::move(*rr));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  zone.validate();
  return zone;
}

ZoneFixture& ZoneFixture::add(std::string_view line, std::uint32_t default_ttl) {
  LineState state{zone, default_ttl, std::nullopt};
  auto rr = parse_record_line(line, state);
  if (!rr) throw FixtureError("not a record line: " + std::string(line));
  return add(std::move(*rr));
}

ZoneFixture& ZoneFixture::add(ResourceRecord record) {
  if (!record.name.is_subdomain_of(zone)) {
    throw FixtureError(record.name.to_string() + " is outside zone " + zone.to_string());
  }
  records.push_back(std::move(record));
  return *this;
}

std::vector<ZoneDelegation> ZoneFixture::delegations() const {
  std::vector<ZoneDelegation> out;
  for (const auto& rr : records) {
    if (rr.type != rrtype::NS || rr.name == zone) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const ZoneDelegation& d) { return d.child == rr.name; });
    if (it == out.end()) {
      out.push_back(ZoneDelegation{rr.name, {}, {}});
      it = std::prev(out.end());
    }
    it->name_servers.push_back(std::get<NameRdata>(rr.rdata).target);
  }
  for (auto& d : out) {
    for (const auto& rr : records) {
      if ((rr.type == rrtype::A || rr.type == rrtype::AAAA) &&
          std::find(d.name_servers.begin(), d.name_servers.end(), rr.name) != d.name_servers.end()) {
        d.glue.push_back(rr);
      }
    }
  }
  return out;
}

void ZoneFixture::validate() const {
  for (const auto& rr : records) {
    if (!rr.name.is_subdomain_of(zone)) {
      throw FixtureError(rr.name.to_string() + " is outside zone " + zone.to_string());
    }
  }
}

bool glob_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' ||
                               std::tolower(static_cast<unsigned char>(pattern[p])) ==
                                   std::tolower(static_cast<unsigned char>(text[t])))) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

bool ServerBehavior::matches(const Question& q) const {
  if (qtype && *qtype != q.type) return false;
  return pattern == "*" || glob_match(pattern, q.name.to_string());
}

ServerBehavior ServerBehavior::parse(std::string_view text) {
  ServerBehavior b;
  std::string_view rest = text;
  for (auto word = next_word(rest); !word.empty(); word = next_word(rest)) {
    auto eq = word.find('=');
    if (eq == std::string_view::npos) throw FixtureError("behavior token without '=': " + std::string(word));
    auto key = word.substr(0, eq);
    auto value = std::string(word.substr(eq + 1));
    auto as_int = [&] {
      int v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || p != value.data() + value.size()) {
        throw FixtureError("behavior " + std::string(key) + " needs an integer");
      }
      return v;
    };
    auto as_bool = [&] { return value == "1" || value == "true" || value == "yes"; };
    if (key == "match") {
      b.pattern = value;
    } else if (key == "type") {
      b.qtype = type_from_string(value);
      if (!b.qtype) throw FixtureError("unknown type in behavior: " + value);
    } else if (key == "drop_first_n") {
      b.drop_first_n = as_int();
    } else if (key == "truncate_udp") {
      b.truncate_udp = as_bool();
    } else if (key == "delay_ms") {
      b.delay_ms = as_int();
    } else if (key == "lame") {
      b.lame = as_bool();
    } else if (key == "rcode") {
      static const std::map<std::string, std::uint8_t> names = {
          {"NOERROR", 0}, {"FORMERR", 1}, {"SERVFAIL", 2}, {"NXDOMAIN", 3}, {"NOTIMP", 4}, {"REFUSED", 5}};
      std::string upper = value;
      std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
      if (auto it = names.find(upper); it != names.end()) {
        b.rcode_override = it->second;
      } else {
        b.rcode_override = static_cast<std::uint8_t>(as_int());
      }
    } else if (key == "minimal") {
      b.minimal_responses = as_bool();
    } else {
      throw FixtureError("unknown behavior key: " + std::string(key));
    }
  }
  return b;
}

ServerSpec parse_server_file(std::string_view text, std::string label) {
  ServerSpec spec;
  spec.label = std::move(label);
  std::optional<LineState> state;
  std::uint32_t ttl = 3600;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;

    auto content = strip_comment(line);
    std::string_view rest = content;
    auto first = next_word(rest);
    if (first.empty()) continue;
    if (first == "$ADDRESS") {
      spec.address = boost::asio::ip::make_address_v4(std::string(next_word(rest)));
    } else if (first == "$ROOT") {
      spec.root = true;
    } else if (first == "$RECURSIVE") {
      spec.recursive = true;
    } else if (first == "$BEHAVIOR") {
      spec.behaviors.push_back(ServerBehavior::parse(rest));
    } else if (first == "$ORIGIN") {
      auto origin = DomainName::parse(next_word(rest));
      spec.zones.push_back(ZoneFixture{origin, {}});
      state = LineState{origin, ttl, std::nullopt};
    } else if (first == "$TTL" && !state) {
      auto arg = next_word(rest);
      std::from_chars(arg.data(), arg.data() + arg.size(), ttl);
    } else {
      if (!state) throw FixtureError("record before $ORIGIN in " + spec.label);
      if (auto rr = parse_record_line(line, *state)) spec.zones.back().add(std::move(*rr));
    }
  }
  return spec;
}

std::vector<ServerSpec> load_fixture_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".server") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw FixtureError("no .server files in " + dir.string());
  std::vector<ServerSpec> out;
  for (const auto& path : files) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    out.push_back(parse_server_file(buffer.str(), path.stem().string()));
  }
  return out;
}

}  // namespace bulkdns::testnet
