// Iterative resolution: referral following, bailiwick checks, selective
// caching and the all-nameservers fan-out.

#include <algorithm>
#include <map>

#include "bulkdns/resolver.hpp"

namespace bulkdns {

namespace asio = boost::asio;
using Clock = std::chrono::steady_clock;

struct Resolver::IterationState {
  Clock::time_point deadline;
  int hops = 0;  // shared by the primary chain and nested nameserver lookups
  std::vector<TraceStep> trace;
};

namespace {

Status status_of(const ExchangeResult& ex) {
  if (ex.outcome != TransportOutcome::kResponse) {
    return ex.outcome == TransportOutcome::kTimeout ? Status::kTimeout : Status::kError;
  }
  if (ex.truncated_fallback_failed) return Status::kTruncated;
  const auto& m = *ex.response;
  bool delegation = m.answers.empty() && std::any_of(m.authorities.begin(), m.authorities.end(),
                                                     [](const ResourceRecord& rr) { return rr.type == rrtype::NS; });
  return classify_response(TransportOutcome::kResponse, m.flags.rcode, !m.answers.empty(), delegation);
}

std::optional<ServerAddress> first_address(const std::vector<ResourceRecord>& records, const DomainName& owner,
                                           std::uint16_t port) {
  for (const auto& rr : records) {
    if (rr.type != rrtype::A || !(rr.name == owner)) continue;
    if (const auto* v4 = std::get_if<Ipv4Rdata>(&rr.rdata)) {
      return ServerAddress{boost::asio::ip::address_v4(v4->octets), port};
    }
  }
  return std::nullopt;
}

void order_candidates(std::vector<NameServer>& servers, std::mt19937& rng) {
  std::shuffle(servers.begin(), servers.end(), rng);
  // Servers with a known address go first; glueless ones need a nested lookup.
  std::stable_partition(servers.begin(), servers.end(), [](const NameServer& ns) { return ns.address.has_value(); });
}

nlohmann::json failed_exchange_json(const ExchangeResult& ex) {
  nlohmann::json out = {
      {"protocol", ex.protocol},
      {"resolver", ex.server.to_string()},
      {"status", to_string(status_of(ex))},
  };
  if (!ex.error.empty()) out["error"] = ex.error;
  return out;
}

}  // namespace

std::optional<Delegation> select_next_server(const DnsMessage& response, const DomainName& current_layer,
                                             const DomainName& qname, std::mt19937& rng,
                                             std::uint16_t nameserver_port) {
  const DomainName* zone = nullptr;
  for (const auto& rr : response.authorities) {
    if (rr.type != rrtype::NS) continue;
    if (!qname.is_subdomain_of(rr.name)) continue;
    if (!rr.name.is_subdomain_of(current_layer) || rr.name.label_count() <= current_layer.label_count()) continue;
    if (!zone || rr.name.label_count() > zone->label_count()) zone = &rr.name;
  }
  if (!zone) return std::nullopt;

  Delegation d;
  d.zone = *zone;
  std::vector<DomainName> targets;
  for (const auto& rr : response.authorities) {
    if (rr.type != rrtype::NS || !(rr.name == d.zone)) continue;
    if (const auto* target = std::get_if<NameRdata>(&rr.rdata)) {
      d.ns_records.push_back(rr);
      if (std::find(targets.begin(), targets.end(), target->target) == targets.end()) {
        targets.push_back(target->target);
      }
    }
  }
  if (targets.empty()) return std::nullopt;

  for (const auto& rr : response.additionals) {
    if (rr.type != rrtype::A && rr.type != rrtype::AAAA) continue;
    if (!rr.name.is_subdomain_of(current_layer)) continue;
    if (std::find(targets.begin(), targets.end(), rr.name) == targets.end()) continue;
    d.glue.push_back(rr);
  }
  for (const auto& target : targets) {
    d.servers.push_back(NameServer{target, first_address(d.glue, target, nameserver_port)});
  }
  order_candidates(d.servers, rng);
  return d;
}

std::optional<Delegation> Resolver::cached_delegation(const DomainName& qname, const DomainName& layer) {
  auto& cache = ctx_.cache();
  if (cache.capacity() == 0) return std::nullopt;
  auto now = Clock::now();
  for (std::size_t n = qname.label_count(); n > layer.label_count(); --n) {
    DomainName zone = qname.suffix(n);
    auto ns = cache.get(CacheKey(zone, rrtype::NS), now);
    if (!ns) continue;
    Delegation d;
    d.zone = zone;
    d.ns_records = std::move(*ns);
    for (const auto& rr : d.ns_records) {
      const auto* target = std::get_if<NameRdata>(&rr.rdata);
      if (!target) continue;
      std::optional<ServerAddress> address;
      if (auto glue = cache.get(CacheKey(target->target, rrtype::A), now)) {
        address = first_address(*glue, target->target, config().nameserver_port);
        d.glue.insert(d.glue.end(), glue->begin(), glue->end());
      }
      d.servers.push_back(NameServer{target->target, address});
    }
    order_candidates(d.servers, rng_);
    return d;
  }
  return std::nullopt;
}

void Resolver::cache_delegation(const Delegation& delegation, const DomainName& qname) {
  auto& cache = ctx_.cache();
  if (cache.capacity() == 0) return;
  auto now = Clock::now();
  std::vector<DomainName> targets;
  for (const auto& ns : delegation.servers) targets.push_back(ns.name);

  std::vector<ResourceRecord> ns_set;
  for (const auto& rr : delegation.ns_records) {
    if (is_cacheable(rr, Section::kAuthority, qname, targets)) ns_set.push_back(rr);
  }
  if (!ns_set.empty()) cache.put(CacheKey(delegation.zone, rrtype::NS), std::move(ns_set), now);

  std::map<std::pair<std::string, std::uint16_t>, std::vector<ResourceRecord>> glue_sets;
  for (const auto& rr : delegation.glue) {
    if (is_cacheable(rr, Section::kAdditional, qname, targets)) {
      glue_sets[{rr.name.canonical(), rr.type}].push_back(rr);
    }
  }
  for (auto& [key, records] : glue_sets) {
    CacheKey cache_key(records.front().name, key.second);
    cache.put(cache_key, std::move(records), now);
  }
}

asio::awaitable<std::optional<ServerAddress>> Resolver::resolve_nameserver(const DomainName& ns,
                                                                           IterationState& state) {
  if (ctx_.cache().capacity() > 0) {
    if (auto glue = ctx_.cache().get(CacheKey(ns, rrtype::A), Clock::now())) {
      if (auto addr = first_address(*glue, ns, config().nameserver_port)) co_return addr;
    }
  }
  Question q{ns, rrtype::A, rrclass::IN};
  auto nested = co_await iterate(q, state);
  if (nested.status != Status::kNoError || !nested.response) co_return std::nullopt;
  if (auto addr = first_address(nested.response->answers, ns, config().nameserver_port)) co_return addr;
  // The answer may arrive through a CNAME; take any address in the answer set.
  for (const auto& rr : nested.response->answers) {
    if (const auto* v4 = std::get_if<Ipv4Rdata>(&rr.rdata)) {
      co_return ServerAddress{boost::asio::ip::address_v4(v4->octets), config().nameserver_port};
    }
  }
  co_return std::nullopt;
}

asio::awaitable<Resolution> Resolver::iterate(const Question& q, IterationState& st) {
  Resolution res;
  DomainName layer;
  std::vector<NameServer> servers = config().root_hints;
  order_candidates(servers, rng_);
  int depth = 1;

  while (true) {
    if (st.hops >= config().max_depth) {
      res.status = Status::kIterationLimit;
      res.error = "iteration limit reached";
      co_return res;
    }
    ++st.hops;
    if (Clock::now() >= st.deadline) {
      res.status = Status::kTimeout;
      co_return res;
    }

    std::string layer_server = servers.empty()                 ? std::string()
                               : servers.front().address ? servers.front().address->to_string()
                                                         : servers.front().name.to_string();
    if (auto d = cached_delegation(q.name, layer)) {
      TraceStep step;
      step.depth = depth;
      step.layer = layer;
      step.name = q.name;
      step.name_server = layer_server;
      step.cached = true;
      step.rrclass = q.klass;
      step.rrtype = q.type;
      DnsMessage synthetic;
      synthetic.flags.response = true;
      synthetic.authorities = d->ns_records;
      synthetic.additionals = d->glue;
      step.results = response_to_json(synthetic, "cache", layer_server);
      st.trace.push_back(std::move(step));
      layer = d->zone;
      servers = std::move(d->servers);
      ++depth;
      continue;
    }

    std::vector<ExchangeResult> exchanges;
    bool descended = false;
    bool saw_non_timeout_failure = false;
    for (const auto& ns : std::vector<NameServer>(servers)) {
      std::optional<ServerAddress> addr = ns.address;
      if (!addr) addr = co_await resolve_nameserver(ns.name, st);
      if (!addr) {
        saw_non_timeout_failure = true;
        continue;
      }
      auto ex = co_await exchange_with_retries(q, *addr, false, st.deadline);
      if (ex.tries == 0) {
        res.status = Status::kTimeout;
        res.error = "overall timeout";
        co_return res;
      }

      TraceStep step;
      step.depth = depth;
      step.layer = layer;
      step.name = q.name;
      step.name_server = addr->to_string();
      step.tries = ex.tries;
      step.rrclass = q.klass;
      step.rrtype = q.type;
      step.results = ex.response ? response_to_json(*ex.response, ex.protocol, step.name_server)
                                 : failed_exchange_json(ex);
      st.trace.push_back(std::move(step));
      exchanges.push_back(ex);

      if (ex.outcome != TransportOutcome::kResponse) {
        if (ex.outcome == TransportOutcome::kError) saw_non_timeout_failure = true;
        continue;
      }
      const DnsMessage& m = *ex.response;
      auto finish = [&](Status status) {
        res.status = status;
        res.response = m;
        res.protocol = ex.protocol;
        res.server = *addr;
        res.tries = ex.tries;
        res.error = ex.error;
        res.final_layer = layer;
        res.final_servers = servers;
        res.final_layer_exchanges = exchanges;
      };
      if (ex.truncated_fallback_failed) {
        finish(Status::kTruncated);
        co_return res;
      }
      if (m.flags.rcode == rcode::NXDOMAIN) {
        finish(Status::kNxDomain);
        co_return res;
      }
      if (m.flags.rcode != rcode::NOERROR) {
        saw_non_timeout_failure = true;
        continue;
      }
      if (!m.answers.empty()) {
        finish(Status::kNoError);
        co_return res;
      }
      if (auto d = select_next_server(m, layer, q.name, rng_, config().nameserver_port)) {
        cache_delegation(*d, q.name);
        layer = d->zone;
        servers = std::move(d->servers);
        ++depth;
        descended = true;
        break;
      }
      if (m.flags.authoritative) {
        finish(Status::kNoAnswer);
        co_return res;
      }
      // Lame: neither an answer nor a usable referral.
      saw_non_timeout_failure = true;
    }

    if (!descended) {
      res.status = (saw_non_timeout_failure || exchanges.empty()) ? Status::kServFail : Status::kTimeout;
      if (res.error.empty()) res.error = "all nameservers for " + layer.to_string() + " failed";
      res.final_layer = layer;
      res.final_servers = servers;
      res.final_layer_exchanges = std::move(exchanges);
      co_return res;
    }
  }
}

asio::awaitable<Resolution> Resolver::iterative_lookup(const Question& q) {
  IterationState st;
  st.deadline = Clock::now() + config().overall_timeout;
  auto res = co_await iterate(q, st);
  res.trace = std::move(st.trace);
  co_return res;
}

asio::awaitable<AllNameserversResult> Resolver::all_nameservers_lookup(const Question& q) {
  AllNameserversResult out;
  IterationState st;
  st.deadline = Clock::now() + config().overall_timeout;
  out.discovery = co_await iterate(q, st);
  out.discovery.trace = std::move(st.trace);
  if (out.discovery.status == Status::kIterationLimit) co_return out;

  for (const auto& ns : out.discovery.final_servers) {
    NameServerResponse entry;
    entry.name_server = ns;
    entry.address = ns.address;
    if (!entry.address) {
      IterationState nested;
      nested.deadline = Clock::now() + config().overall_timeout;
      entry.address = co_await resolve_nameserver(ns.name, nested);
    }
    if (!entry.address) {
      entry.status = Status::kError;
      entry.exchange.outcome = TransportOutcome::kError;
      entry.exchange.error = "could not resolve nameserver address";
      out.responses.push_back(std::move(entry));
      continue;
    }
    auto prior = std::find_if(out.discovery.final_layer_exchanges.begin(), out.discovery.final_layer_exchanges.end(),
                              [&](const ExchangeResult& ex) { return ex.server == *entry.address; });
    if (prior != out.discovery.final_layer_exchanges.end()) {
      entry.exchange = *prior;
    } else {
      entry.exchange = co_await exchange_with_retries(q, *entry.address, false,
                                                      Clock::now() + config().overall_timeout);
    }
    entry.status = entry.exchange.tries == 0 ? Status::kTimeout : status_of(entry.exchange);
    out.responses.push_back(std::move(entry));
  }
  co_return out;
}

}  // namespace bulkdns
