#include <algorithm>
#include <regex>

#include "bulkdns/modules.hpp"

namespace bulkdns {

namespace asio = boost::asio;

namespace {

constexpr int kMaxCnameLinks = 10;

bool looks_like_ipv4(std::string_view text) {
  return !text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return (c >= '0' && c <= '9') || c == '.'; }) &&
         std::count(text.begin(), text.end(), '.') == 3;
}

std::optional<DomainName> parse_input_name(const std::string& input, ModuleResult& out) {
  try {
    return DomainName::parse(input);
  } catch (const std::exception& e) {
    out.status = Status::kError;
    out.error = e.what();
    return std::nullopt;
  }
}

void append_trace(std::vector<TraceStep>& into, std::vector<TraceStep>& from) {
  into.insert(into.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
  from.clear();
}

bool external_tries(const Resolver& resolver, const std::optional<ServerAddress>& name_server) {
  return name_server || resolver.config().mode == ResolutionMode::kExternal;
}

ModuleResult from_resolution(Resolution& res, const Resolver& resolver,
                             const std::optional<ServerAddress>& name_server) {
  ModuleResult out;
  out.status = res.status;
  out.data = res.data();
  out.trace = std::move(res.trace);
  out.error = res.error;
  if (external_tries(resolver, name_server) && res.tries > 0) out.tries = res.tries;
  return out;
}

nlohmann::json nameserver_entry(const NameServerResponse& r) {
  nlohmann::json entry = {
      {"name_server", r.address ? r.address->to_string() : std::string()},
      {"ns_name", r.name_server.name.to_string()},
      {"status", to_string(r.status)},
      {"try", std::max(r.exchange.tries, 1)},
      {"data", r.exchange.response
                   ? response_to_json(*r.exchange.response, r.exchange.protocol, r.exchange.server.to_string())
                   : nlohmann::json::object()},
  };
  if (!r.exchange.error.empty()) entry["error"] = r.exchange.error;
  return entry;
}

struct ChainOutcome {
  Status status = Status::kError;
  std::vector<ResourceRecord> records;
  std::vector<std::string> chain;
  std::vector<TraceStep> trace;
  std::optional<int> tries;
  std::string error;
};

// Queries `type` at `name`, following CNAMEs inside each answer and across
// re-queries, until records of `type` appear at the end of the chain.
asio::awaitable<ChainOutcome> follow_chain(const DomainName& name, std::uint16_t type,
                                           std::optional<ServerAddress> name_server, Resolver& resolver) {
  ChainOutcome out;
  DomainName current = name;
  std::vector<DomainName> visited{current};
  int links = 0;
  while (true) {
    Question q{current, type, rrclass::IN};
    auto res = co_await resolver.lookup(q, name_server);
    append_trace(out.trace, res.trace);
    if (external_tries(resolver, name_server) && res.tries > 0) out.tries = res.tries;
    if (res.status != Status::kNoError || !res.response) {
      out.status = res.status;
      out.error = res.error;
      co_return out;
    }
    const auto& answers = res.response->answers;
    bool moved = false;
    while (true) {
      for (const auto& rr : answers) {
        if (rr.type == type && rr.name == current) out.records.push_back(rr);
      }
      if (!out.records.empty()) {
        out.status = Status::kNoError;
        co_return out;
      }
      auto cname = std::find_if(answers.begin(), answers.end(), [&](const ResourceRecord& rr) {
        return rr.type == rrtype::CNAME && rr.name == current;
      });
      if (cname == answers.end()) break;
      const auto& target = std::get<NameRdata>(cname->rdata).target;
      if (std::find(visited.begin(), visited.end(), target) != visited.end()) {
        out.status = Status::kError;
        out.error = "CNAME loop at " + target.to_string();
        co_return out;
      }
      if (++links > kMaxCnameLinks) {
        out.status = Status::kError;
        out.error = "CNAME chain longer than " + std::to_string(kMaxCnameLinks);
        co_return out;
      }
      visited.push_back(target);
      out.chain.push_back(target.to_string());
      current = target;
      moved = true;
    }
    if (!moved) {
      out.status = Status::kNoAnswer;
      co_return out;
    }
  }
}

std::vector<std::string> address_strings(const std::vector<ResourceRecord>& records, std::uint16_t type) {
  std::vector<std::string> out;
  for (const auto& rr : records) {
    if (rr.type != type) continue;
    auto text = rdata_to_string(rr.type, rr.rdata);
    if (std::find(out.begin(), out.end(), text) == out.end()) out.push_back(std::move(text));
  }
  return out;
}

}  // namespace

asio::awaitable<ModuleResult> raw_lookup(const std::string& input, std::uint16_t type, std::uint16_t klass,
                                         std::optional<ServerAddress> name_server, Resolver& resolver,
                                         const ModuleOptions& options) {
  ModuleResult out;
  std::optional<DomainName> name;
  if (type == rrtype::PTR && looks_like_ipv4(input)) {
    try {
      name = ptr_name(input);
    } catch (const std::exception& e) {
      out.status = Status::kError;
      out.error = e.what();
      co_return out;
    }
  } else {
    name = parse_input_name(input, out);
    if (!name) co_return out;
  }
  Question q{*name, type, klass};

  if (options.all_nameservers && !name_server && resolver.config().mode == ResolutionMode::kIterative) {
    auto all = co_await resolver.all_nameservers_lookup(q);
    out.trace = std::move(all.discovery.trace);
    out.status = all.discovery.status;
    out.error = all.discovery.error;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& r : all.responses) {
      entries.push_back(nameserver_entry(r));
      if (r.status == Status::kNoError) out.status = Status::kNoError;
    }
    out.data = {{"name_servers", std::move(entries)}};
    co_return out;
  }

  auto res = co_await resolver.lookup(q, name_server);
  co_return from_resolution(res, resolver, name_server);
}

asio::awaitable<ModuleResult> alookup(const std::string& input, bool want_ipv4, bool want_ipv6,
                                      std::optional<ServerAddress> name_server, Resolver& resolver) {
  ModuleResult out;
  auto name = parse_input_name(input, out);
  if (!name) co_return out;
  if (!want_ipv4 && !want_ipv6) want_ipv4 = true;

  std::optional<Status> status;
  auto run = [&](std::uint16_t type, const char* key) -> asio::awaitable<void> {
    auto chain = co_await follow_chain(*name, type, name_server, resolver);
    append_trace(out.trace, chain.trace);
    if (chain.tries) out.tries = chain.tries;
    out.data[key] = address_strings(chain.records, type);
    if (!status || (chain.status == Status::kNoError && *status != Status::kNoError)) {
      status = chain.status;
      out.error = chain.error;
    }
  };
  if (want_ipv4) co_await run(rrtype::A, "ipv4_addresses");
  if (want_ipv6) co_await run(rrtype::AAAA, "ipv6_addresses");
  out.status = *status;
  co_return out;
}

asio::awaitable<ModuleResult> mxlookup(const std::string& input, bool resolve_ipv4, bool resolve_ipv6,
                                       std::optional<ServerAddress> name_server, Resolver& resolver) {
  ModuleResult out;
  auto name = parse_input_name(input, out);
  if (!name) co_return out;
  if (!resolve_ipv4 && !resolve_ipv6) resolve_ipv4 = true;

  Question q{*name, rrtype::MX, rrclass::IN};
  auto res = co_await resolver.lookup(q, name_server);
  out.trace = std::move(res.trace);
  out.status = res.status;
  out.error = res.error;
  if (external_tries(resolver, name_server) && res.tries > 0) out.tries = res.tries;
  out.data = {{"exchanges", nlohmann::json::array()}};
  if (res.status != Status::kNoError || !res.response) co_return out;

  std::vector<ResourceRecord> mx;
  for (const auto& rr : res.response->answers) {
    if (rr.type == rrtype::MX && std::holds_alternative<MxRdata>(rr.rdata)) mx.push_back(rr);
  }
  std::stable_sort(mx.begin(), mx.end(), [](const ResourceRecord& a, const ResourceRecord& b) {
    return std::get<MxRdata>(a.rdata).preference < std::get<MxRdata>(b.rdata).preference;
  });
  if (mx.empty()) {
    out.status = Status::kNoAnswer;
    co_return out;
  }

  for (const auto& rr : mx) {
    const auto& rdata = std::get<MxRdata>(rr.rdata);
    std::vector<ResourceRecord> glue;
    for (const auto& add : res.response->additionals) {
      if ((add.type == rrtype::A || add.type == rrtype::AAAA) && add.name == rdata.exchange) glue.push_back(add);
    }
    nlohmann::json entry = {{"name", rdata.exchange.to_string()}, {"preference", rdata.preference}};
    if (glue.empty()) {
      if (resolve_ipv4) {
        auto chain = co_await follow_chain(rdata.exchange, rrtype::A, name_server, resolver);
        append_trace(out.trace, chain.trace);
        glue.insert(glue.end(), chain.records.begin(), chain.records.end());
      }
      if (resolve_ipv6) {
        auto chain = co_await follow_chain(rdata.exchange, rrtype::AAAA, name_server, resolver);
        append_trace(out.trace, chain.trace);
        glue.insert(glue.end(), chain.records.begin(), chain.records.end());
      }
    }
    if (resolve_ipv4) entry["ipv4_addresses"] = address_strings(glue, rrtype::A);
    if (resolve_ipv6) entry["ipv6_addresses"] = address_strings(glue, rrtype::AAAA);
    out.data["exchanges"].push_back(std::move(entry));
  }
  co_return out;
}

asio::awaitable<ModuleResult> caa_lookup(const std::string& input, std::optional<ServerAddress> name_server,
                                         Resolver& resolver) {
  ModuleResult out;
  auto name = parse_input_name(input, out);
  if (!name) co_return out;
  auto chain = co_await follow_chain(*name, rrtype::CAA, name_server, resolver);
  out.status = chain.status;
  out.error = chain.error;
  out.tries = chain.tries;
  out.trace = std::move(chain.trace);
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& rr : chain.records) {
    if (const auto* caa = std::get_if<CaaRdata>(&rr.rdata)) entries.push_back(caa_to_json(*caa));
  }
  out.data = {{"caa", std::move(entries)}};
  if (!chain.chain.empty()) out.data["cname_chain"] = chain.chain;
  co_return out;
}

asio::awaitable<ModuleResult> bind_version(const std::string& input, std::optional<ServerAddress> name_server,
                                           Resolver& resolver) {
  ModuleResult out;
  auto server = name_server ? name_server : ServerAddress::try_parse(input);
  if (!server) {
    out.status = Status::kError;
    out.error = "input is not a server address: " + input;
    co_return out;
  }
  Question q{DomainName::parse("version.bind"), rrtype::TXT, rrclass::CH};
  auto res = co_await resolver.external_lookup(q, server);
  out.status = res.status;
  out.error = res.error;
  if (res.tries > 0) out.tries = res.tries;
  if (res.status != Status::kNoError || !res.response) co_return out;
  for (const auto& rr : res.response->answers) {
    if (const auto* txt = std::get_if<TxtRdata>(&rr.rdata); txt && !txt->strings.empty()) {
      out.data = {{"version", txt->strings.front()}};
      co_return out;
    }
  }
  out.status = Status::kNoAnswer;
  co_return out;
}

asio::awaitable<ModuleResult> txt_filter_lookup(const std::string& input, std::string pattern,
                                                bool ignore_case, std::string key,
                                                std::optional<ServerAddress> name_server, Resolver& resolver) {
  ModuleResult out;
  auto name = parse_input_name(input, out);
  if (!name) co_return out;
  Question q{*name, rrtype::TXT, rrclass::IN};
  auto res = co_await resolver.lookup(q, name_server);
  out.status = res.status;
  out.error = res.error;
  out.trace = std::move(res.trace);
  if (external_tries(resolver, name_server) && res.tries > 0) out.tries = res.tries;
  if (res.status != Status::kNoError || !res.response) co_return out;

  auto flags = std::regex::ECMAScript;
  if (ignore_case) flags |= std::regex::icase;
  std::regex re(pattern, flags);
  for (const auto& rr : res.response->answers) {
    const auto* txt = std::get_if<TxtRdata>(&rr.rdata);
    if (!txt || rr.type != rrtype::TXT) continue;
    std::string joined;
    for (const auto& s : txt->strings) joined += s;
    if (std::regex_search(joined, re)) {
      out.data = {{key, joined}};
      co_return out;
    }
  }
  out.status = Status::kNoAnswer;
  co_return out;
}

void register_builtin_modules(ModuleRegistry& registry) {
  for (const auto& info : known_types()) {
    if (info.code == rrtype::OPT || info.code == rrtype::CAA || info.code == rrtype::SPF) continue;
    auto type = info.code;
    registry.register_module(ModuleDescriptor{
        std::string(info.mnemonic), type, rrclass::IN, "raw " + std::string(info.mnemonic) + " lookup",
        [type](const std::string& in, std::optional<ServerAddress> ns, Resolver& r, const ModuleOptions& o) {
          return raw_lookup(in, type, rrclass::IN, ns, r, o);
        }});
  }
  registry.register_module(ModuleDescriptor{
      "CAA", rrtype::CAA, rrclass::IN, "CAA records, following CNAMEs",
      [](const std::string& in, std::optional<ServerAddress> ns, Resolver& r, const ModuleOptions&) {
        return caa_lookup(in, ns, r);
      }});
  registry.register_module(ModuleDescriptor{
      "SPF", rrtype::TXT, rrclass::IN, "TXT record starting with v=spf1",
      [](const std::string& in, std::optional<ServerAddress> ns, Resolver& r, const ModuleOptions&) {
        return txt_filter_lookup(in, "^v=spf1", true, "spf", ns, r);
      }});
  registry.register_module(ModuleDescriptor{
      "DMARC", rrtype::TXT, rrclass::IN, "TXT record starting with v=DMARC1",
      [](const std::string& in, std::optional<ServerAddress> ns, Resolver& r, const ModuleOptions&) {
        return txt_filter_lookup(in, "^v=DMARC1", false, "dmarc", ns, r);
      }});
  registry.register_module(ModuleDescriptor{
      "ALOOKUP", rrtype::A, rrclass::IN, "IPv4/IPv6 addresses, following CNAMEs",
      [](const std::string& in, std::optional<ServerAddress> ns, Resolver& r, const ModuleOptions& o) {
        return alookup(in, o.ipv4_lookup, o.ipv6_lookup, ns, r);
      }});
  registry.register_module(ModuleDescriptor{
      "MXLOOKUP", rrtype::MX, rrclass::IN, "MX exchanges with their addresses",
      [](const std::string& in, std::optional<ServerAddress> ns, Resolver& r, const ModuleOptions& o) {
        return mxlookup(in, o.ipv4_lookup, o.ipv6_lookup, ns, r);
      }});
  registry.register_module(ModuleDescriptor{
      "BINDVERSION", rrtype::TXT, rrclass::CH, "version.bind of the given server",
      [](const std::string& in, std::optional<ServerAddress> ns, Resolver& r, const ModuleOptions&) {
        return bind_version(in, ns, r);
      }});
}

}  // namespace bulkdns
