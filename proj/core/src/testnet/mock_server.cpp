#include <algorithm>
#include <unordered_set>

#include <sys/socket.h>

#include <boost/asio/co_spawn.hpp>
#include <boost/asio/detached.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/ip/udp.hpp>
#include <boost/asio/read.hpp>
#include <boost/asio/redirect_error.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/use_awaitable.hpp>
#include <boost/asio/write.hpp>

#include "bulkdns/testnet.hpp"

namespace bulkdns::testnet {

namespace asio = boost::asio;
using asio::ip::tcp;
using asio::ip::udp;

namespace {

constexpr std::size_t kUdpReceiveBuffer = 8 * 1024 * 1024;
constexpr int kMaxChaseDepth = 10;

void set_receive_buffer(udp::socket& socket) {
  // SO_RCVBUFFORCE ignores rmem_max but needs CAP_NET_ADMIN; fall back quietly.
  boost::system::error_code ec;
  socket.set_option(asio::detail::socket_option::integer<SOL_SOCKET, SO_RCVBUFFORCE>(kUdpReceiveBuffer), ec);
  if (ec) socket.set_option(udp::socket::receive_buffer_size(static_cast<int>(kUdpReceiveBuffer)), ec);
}

}  // namespace

struct MockServer::Impl {
  MockServer& owner;
  asio::io_context& io;
  udp::socket udp_socket;
  tcp::acceptor acceptor;
  std::unordered_map<std::string, const ZoneFixture*> zones_by_apex;
  std::unordered_set<std::string> interior_names;  // every ancestor of an owner, within its zone

  Impl(MockServer& o, asio::io_context& ctx) : owner(o), io(ctx), udp_socket(ctx), acceptor(ctx) {}

  asio::awaitable<void> udp_loop() {
    std::vector<std::uint8_t> buffer(65535);
    udp::endpoint from;
    while (true) {
      boost::system::error_code ec;
      std::size_t n = co_await udp_socket.async_receive_from(asio::buffer(buffer), from,
                                                             asio::redirect_error(asio::use_awaitable, ec));
      if (ec) {
        if (!udp_socket.is_open() || ec == asio::error::operation_aborted) break;
        continue;
      }
      int delay_ms = 0;
      auto reply = owner.respond(std::span<const std::uint8_t>(buffer.data(), n), true, delay_ms);
      if (!reply) continue;
      if (delay_ms > 0) {
        asio::co_spawn(io, delayed_send(std::move(*reply), from, delay_ms), asio::detached);
      } else {
        udp_socket.send_to(asio::buffer(*reply), from, 0, ec);
      }
    }
  }

  asio::awaitable<void> delayed_send(std::vector<std::uint8_t> reply, udp::endpoint to, int delay_ms) {
    asio::steady_timer timer(io, std::chrono::milliseconds(delay_ms));
    boost::system::error_code ec;
    co_await timer.async_wait(asio::redirect_error(asio::use_awaitable, ec));
    if (udp_socket.is_open()) udp_socket.send_to(asio::buffer(reply), to, 0, ec);
  }

  asio::awaitable<void> accept_loop() {
    while (true) {
      boost::system::error_code ec;
      tcp::socket socket(io);
      co_await acceptor.async_accept(socket, asio::redirect_error(asio::use_awaitable, ec));
      if (ec) {
        if (!acceptor.is_open() || ec == asio::error::operation_aborted) break;
        continue;
      }
      owner.log_.note_tcp_connection();
      asio::co_spawn(io, tcp_session(std::move(socket)), asio::detached);
    }
  }

  asio::awaitable<void> tcp_session(tcp::socket socket) {
    while (true) {
      boost::system::error_code ec;
      std::uint8_t length_bytes[2];
      co_await asio::async_read(socket, asio::buffer(length_bytes), asio::redirect_error(asio::use_awaitable, ec));
      if (ec) break;
      std::vector<std::uint8_t> query(static_cast<std::size_t>(length_bytes[0] << 8 | length_bytes[1]));
      co_await asio::async_read(socket, asio::buffer(query), asio::redirect_error(asio::use_awaitable, ec));
      if (ec) break;
      int delay_ms = 0;
      auto reply = owner.respond(query, false, delay_ms);
      if (!reply) continue;
      if (delay_ms > 0) {
        asio::steady_timer timer(io, std::chrono::milliseconds(delay_ms));
        co_await timer.async_wait(asio::redirect_error(asio::use_awaitable, ec));
      }
      std::uint8_t prefix[2] = {static_cast<std::uint8_t>(reply->size() >> 8),
                                static_cast<std::uint8_t>(reply->size())};
      std::array<asio::const_buffer, 2> out{asio::buffer(prefix), asio::buffer(*reply)};
      co_await asio::async_write(socket, out, asio::redirect_error(asio::use_awaitable, ec));
      if (ec) break;
    }
  }
};

MockServer::MockServer(asio::io_context& io, ServerSpec spec)
    : spec_(std::move(spec)), impl_(std::make_unique<Impl>(*this, io)) {
  if (!spec_.address) throw FixtureError("server " + spec_.label + " has no address");
  for (const auto& zone : spec_.zones) zone.validate();
  index();
}

MockServer::~MockServer() { close(); }

void MockServer::index() {
  for (const auto& zone : spec_.zones) {
    impl_->zones_by_apex[zone.zone.canonical()] = &zone;
    for (const auto& rr : zone.records) {
      by_owner_[rr.name.canonical()].push_back(&rr);
      for (auto name = rr.name; name.label_count() > zone.zone.label_count();) {
        name = name.parent();
        impl_->interior_names.insert(name.canonical());
      }
    }
  }
}

bool MockServer::bind(std::uint16_t port, boost::system::error_code& ec) {
  close();
  udp::endpoint udp_ep(*spec_.address, port);
  impl_->udp_socket.open(udp::v4(), ec);
  if (!ec) impl_->udp_socket.bind(udp_ep, ec);
  if (ec) {
    close();
    return false;
  }
  set_receive_buffer(impl_->udp_socket);
  tcp::endpoint tcp_ep(*spec_.address, port);
  impl_->acceptor.open(tcp::v4(), ec);
  if (!ec) impl_->acceptor.set_option(tcp::acceptor::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(tcp_ep, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    close();
    return false;
  }
  return true;
}

void MockServer::serve() {
  asio::co_spawn(impl_->io, impl_->udp_loop(), asio::detached);
  asio::co_spawn(impl_->io, impl_->accept_loop(), asio::detached);
}

void MockServer::close() {
  boost::system::error_code ignored;
  impl_->udp_socket.close(ignored);
  impl_->acceptor.close(ignored);
}

MockServer::Verdict MockServer::judge(const Question& q) {
  Verdict v;
  std::lock_guard lock(behavior_mutex_);
  for (std::size_t i = 0; i < spec_.behaviors.size(); ++i) {
    const auto& rule = spec_.behaviors[i];
    if (!rule.matches(q)) continue;
    int hits = ++behavior_hits_[{i, q.name.canonical(), q.type}];
    if (hits <= rule.drop_first_n) v.drop = true;
    v.truncate_udp |= rule.truncate_udp;
    v.delay_ms = std::max(v.delay_ms, rule.delay_ms);
    v.lame |= rule.lame;
    if (rule.rcode_override) v.rcode = rule.rcode_override;
    v.minimal |= rule.minimal_responses;
  }
  return v;
}

std::optional<std::vector<std::uint8_t>> MockServer::respond(std::span<const std::uint8_t> packet, bool udp,
                                                             int& delay_ms) {
  DnsMessage query;
  try {
    query = decode_message(packet);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (!query.question || query.flags.response) return std::nullopt;
  log_.record(*query.question, udp ? "udp" : "tcp", std::chrono::steady_clock::now());

  auto verdict = judge(*query.question);
  delay_ms = verdict.delay_ms;
  if (verdict.drop) return std::nullopt;

  auto header_only = [&] {
    DnsMessage m;
    m.id = query.id;
    m.flags.response = true;
    m.flags.opcode = query.flags.opcode;
    m.flags.recursion_desired = query.flags.recursion_desired;
    m.flags.recursion_available = spec_.recursive;
    m.question = query.question;
    return m;
  };

  DnsMessage reply;
  if (verdict.rcode) {
    reply = header_only();
    reply.flags.rcode = *verdict.rcode;
  } else if (verdict.lame) {
    reply = header_only();
  } else {
    reply = answer(query);
  }
  if (verdict.minimal) reply.additionals.clear();
  if (query.edns_udp_size) reply.edns_udp_size = 1232;

  auto bytes = encode_message(reply, true);
  if (udp) {
    std::size_t limit = query.edns_udp_size ? std::max<std::size_t>(512, *query.edns_udp_size) : 512;
    if (verdict.truncate_udp || bytes.size() > limit) {
      DnsMessage tc = header_only();
      tc.flags.truncated = true;
      tc.flags.authoritative = reply.flags.authoritative;
      tc.edns_udp_size = reply.edns_udp_size;
      bytes = encode_message(tc, true);
    }
  }
  return bytes;
}

const std::vector<const ResourceRecord*>* MockServer::records_at(const DomainName& name) const {
  auto it = by_owner_.find(name.canonical());
  return it == by_owner_.end() ? nullptr : &it->second;
}

const ZoneFixture* MockServer::best_zone(const DomainName& qname) const {
  for (std::size_t n = qname.label_count() + 1; n-- > 0;) {
    auto it = impl_->zones_by_apex.find(qname.suffix(n).canonical());
    if (it != impl_->zones_by_apex.end()) return it->second;
  }
  return nullptr;
}

DnsMessage MockServer::answer(const DnsMessage& query) const {
  DnsMessage reply;
  reply.id = query.id;
  reply.flags.response = true;
  reply.flags.opcode = query.flags.opcode;
  reply.flags.recursion_desired = query.flags.recursion_desired;
  reply.flags.recursion_available = spec_.recursive;
  reply.question = query.question;
  if (!query.question) {
    reply.flags.rcode = rcode::FORMERR;
    return reply;
  }
  const auto& q = *query.question;
  answer_name(q.name, q.type, q.klass, reply, 0);
  add_additionals(reply);
  return reply;
}

void MockServer::answer_name(const DomainName& qname, std::uint16_t qtype, std::uint16_t qclass, DnsMessage& reply,
                             int depth) const {
  const ZoneFixture* zone = best_zone(qname);
  if (!zone) {
    if (depth == 0) reply.flags.rcode = rcode::REFUSED;
    return;
  }
  auto class_ok = [&](const ResourceRecord& rr) { return qclass == rrclass::ANY || rr.klass == qclass; };
  auto add_soa = [&] {
    if (const auto* apex = records_at(zone->zone)) {
      for (const auto* rr : *apex) {
        if (rr->type == rrtype::SOA) reply.authorities.push_back(*rr);
      }
    }
  };

  if (!spec_.recursive) {
    for (std::size_t n = zone->zone.label_count() + 1; n <= qname.label_count(); ++n) {
      auto cut = qname.suffix(n);
      const auto* records = records_at(cut);
      if (!records) continue;
      bool delegated = false;
      for (const auto* rr : *records) {
        if (rr->type == rrtype::NS) {
          reply.authorities.push_back(*rr);
          delegated = true;
        }
      }
      if (delegated) {
        reply.flags.authoritative = false;
        return;
      }
    }
  }
  reply.flags.authoritative = !spec_.recursive;

  auto emit = [&](const std::vector<const ResourceRecord*>& records, const DomainName& owner) {
    bool any = false;
    for (const auto* rr : records) {
      if (class_ok(*rr) && (rr->type == qtype || qtype == rrtype::ANY)) {
        reply.answers.push_back(*rr);
        reply.answers.back().name = owner;
        any = true;
      }
    }
    if (any) return true;
    for (const auto* rr : records) {
      if (class_ok(*rr) && rr->type == rrtype::CNAME) {
        reply.answers.push_back(*rr);
        reply.answers.back().name = owner;
        if (spec_.recursive && depth < kMaxChaseDepth) {
          answer_name(std::get<NameRdata>(rr->rdata).target, qtype, qclass, reply, depth + 1);
        }
        return true;
      }
    }
    return false;
  };

  if (const auto* records = records_at(qname)) {
    if (!emit(*records, qname)) add_soa();
    return;
  }
  if (impl_->interior_names.count(qname.canonical())) {
    add_soa();
    return;
  }
  for (DomainName encloser = qname.parent(); encloser.label_count() >= zone->zone.label_count();
       encloser = encloser.parent()) {
    if (const auto* wild = records_at(encloser.child("*"))) {
      if (!emit(*wild, qname)) add_soa();
      return;
    }
    if (records_at(encloser) || impl_->interior_names.count(encloser.canonical()) ||
        encloser.label_count() == zone->zone.label_count()) {
      break;
    }
  }
  reply.flags.rcode = rcode::NXDOMAIN;
  add_soa();
}

void MockServer::add_additionals(DnsMessage& reply) const {
  std::vector<DomainName> targets;
  auto collect = [&](const std::vector<ResourceRecord>& section) {
    for (const auto& rr : section) {
      if (rr.type == rrtype::NS) {
        targets.push_back(std::get<NameRdata>(rr.rdata).target);
      } else if (rr.type == rrtype::MX) {
        targets.push_back(std::get<MxRdata>(rr.rdata).exchange);
      }
    }
  };
  collect(reply.answers);
  collect(reply.authorities);
  for (const auto& target : targets) {
    const auto* records = records_at(target);
    if (!records) continue;
    for (const auto* rr : *records) {
      if ((rr->type == rrtype::A || rr->type == rrtype::AAAA) &&
          std::find(reply.additionals.begin(), reply.additionals.end(), *rr) == reply.additionals.end()) {
        reply.additionals.push_back(*rr);
      }
    }
  }
}

}  // namespace bulkdns::testnet
