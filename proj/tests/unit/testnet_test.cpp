#include <poll.h>

#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/ip/udp.hpp>
#include <boost/asio/read.hpp>
#include <boost/asio/write.hpp>
#include <gtest/gtest.h>

#include "bulkdns/testnet.hpp"
#include "harness.hpp"

namespace bulkdns {
namespace {

namespace asio = boost::asio;
using namespace std::chrono_literals;
using testnet::ServerBehavior;

// Blocking client used to look at raw server behavior without the resolver.
class RawClient {
 public:
  explicit RawClient(ServerAddress server) : server_(server), udp_(io_, asio::ip::udp::endpoint(asio::ip::udp::v4(), 0)) {}

  std::optional<std::vector<std::uint8_t>> udp(const std::vector<std::uint8_t>& query) {
    udp_.send_to(asio::buffer(query), server_.udp_endpoint());
    pollfd pfd{udp_.native_handle(), POLLIN, 0};
    if (::poll(&pfd, 1, 300) <= 0) return std::nullopt;
    std::vector<std::uint8_t> buf(65535);
    asio::ip::udp::endpoint from;
    boost::system::error_code ec;
    auto n = udp_.receive_from(asio::buffer(buf), from, 0, ec);
    if (ec) return std::nullopt;
    buf.resize(n);
    return buf;
  }

  std::vector<std::uint8_t> tcp(const std::vector<std::uint8_t>& query) {
    asio::ip::tcp::socket sock(io_);
    sock.connect(asio::ip::tcp::endpoint(server_.ip, server_.port));
    std::vector<std::uint8_t> framed{static_cast<std::uint8_t>(query.size() >> 8),
                                     static_cast<std::uint8_t>(query.size() & 0xff)};
    framed.insert(framed.end(), query.begin(), query.end());
    asio::write(sock, asio::buffer(framed));
    std::uint8_t len[2];
    asio::read(sock, asio::buffer(len));
    std::vector<std::uint8_t> body((len[0] << 8) | len[1]);
    asio::read(sock, asio::buffer(body));
    return body;
  }

 private:
  ServerAddress server_;
  asio::io_context io_;
  asio::ip::udp::socket udp_;
};

std::vector<std::uint8_t> query(const std::string& name, std::uint16_t type = rrtype::A, std::uint16_t size = 512,
                                std::uint16_t id = 1) {
  return encode_query(Question{DomainName::parse(name), type, rrclass::IN}, id, false, size);
}

constexpr const char* kRootZone =
    "@ SOA a.root-servers.net. nstld.verisign-grs.com. 1 1800 900 604800 86400\n"
    "com. 172800 NS a.gtld-servers.net.\n"
    "com. 172800 NS b.gtld-servers.net.\n"
    "a.gtld-servers.net. 172800 A 192.5.6.30\n"
    "b.gtld-servers.net. 172800 A 192.33.14.30\n";

TEST(Testnet, RootReferral) {
  testnet::Testnet net;
  testnet::ServerSpec spec;
  spec.label = "root";
  spec.zones.push_back(test::zone(".", kRootZone));
  auto& root = net.add_server(std::move(spec));
  net.start();
  RawClient client(net.address_of(root));
  auto reply = decode_message(*client.udp(query("google.com")));
  EXPECT_TRUE(reply.flags.response);
  EXPECT_FALSE(reply.flags.authoritative);
  EXPECT_EQ(reply.flags.rcode, 0);
  EXPECT_TRUE(reply.answers.empty());
  ASSERT_EQ(reply.authorities.size(), 2u);
  for (const auto& rr : reply.authorities) {
    EXPECT_EQ(rr.type, rrtype::NS);
    EXPECT_EQ(rr.name, DomainName::parse("com"));
  }
  ASSERT_EQ(reply.additionals.size(), 2u);
  EXPECT_EQ(rdata_to_string(rrtype::A, reply.additionals[0].rdata), "192.5.6.30");
}

TEST(Testnet, AuthoritativeAnswersAndNxDomain) {
  testnet::Testnet net;
  for (auto& spec : testnet::load_fixture_dir(test::data_dir() + "/hierarchy")) net.add_server(std::move(spec));
  net.start();
  RawClient client(net.address_of(*net.find("google")));
  auto a = decode_message(*client.udp(query("google.com")));
  EXPECT_TRUE(a.flags.authoritative);
  ASSERT_EQ(a.answers.size(), 1u);
  EXPECT_EQ(a.answers[0].ttl, 300u);
  auto nx = decode_message(*client.udp(query("nope.google.com")));
  EXPECT_EQ(nx.flags.rcode, rcode::NXDOMAIN);
  ASSERT_EQ(nx.authorities.size(), 1u);
  EXPECT_EQ(nx.authorities[0].type, rrtype::SOA);
  auto wild = decode_message(*client.udp(query("anything.example.com")));
  ASSERT_EQ(wild.answers.size(), 1u);
  EXPECT_EQ(wild.answers[0].name, DomainName::parse("anything.example.com"));
  auto refused = decode_message(*client.udp(query("example.org")));
  EXPECT_EQ(refused.flags.rcode, rcode::REFUSED);
}

TEST(Testnet, RecursiveChasesCname) {
  testnet::Testnet net;
  testnet::ServerSpec spec;
  spec.label = "rec";
  spec.recursive = true;
  spec.zones.push_back(test::zone("example.com", "www CNAME web\nweb A 10.0.0.7\n"));
  auto& rec = net.add_server(std::move(spec));
  net.start();
  RawClient client(net.address_of(rec));
  auto reply = decode_message(*client.udp(query("www.example.com")));
  EXPECT_TRUE(reply.flags.recursion_available);
  ASSERT_EQ(reply.answers.size(), 2u);
  EXPECT_EQ(reply.answers[0].type, rrtype::CNAME);
  EXPECT_EQ(reply.answers[1].type, rrtype::A);
}

TEST(Testnet, TruncateUdpOnly) {
  testnet::Testnet net;
  testnet::ServerSpec spec;
  spec.label = "tc";
  std::string body;
  for (int i = 1; i <= 40; ++i) body += "big A 10.0.0." + std::to_string(i) + "\n";
  spec.zones.push_back(test::zone("example.com", body));
  spec.behaviors.push_back(ServerBehavior::parse("match=big.example.com truncate_udp=1"));
  auto& server = net.add_server(std::move(spec));
  net.start();
  RawClient client(net.address_of(server));
  auto udp_bytes = *client.udp(query("big.example.com", rrtype::A, 4096));
  EXPECT_LE(udp_bytes.size(), 512u);
  auto udp = decode_message(udp_bytes);
  EXPECT_TRUE(udp.flags.truncated);
  EXPECT_TRUE(udp.answers.empty());
  auto tcp = decode_message(client.tcp(query("big.example.com", rrtype::A, 4096)));
  EXPECT_FALSE(tcp.flags.truncated);
  EXPECT_EQ(tcp.answers.size(), 40u);
  EXPECT_EQ(server.log().tcp_connections(), 1u);
  EXPECT_EQ(server.log().udp_queries(), 1u);
  EXPECT_EQ(server.log().tcp_queries(), 1u);
}

TEST(Testnet, OversizedAnswerTruncatedAt512WithoutEdns) {
  testnet::Testnet net;
  testnet::ServerSpec spec;
  spec.label = "big";
  std::string body;
  for (int i = 1; i <= 60; ++i) body += "big A 10.0.1." + std::to_string(i) + "\n";
  spec.zones.push_back(test::zone("example.com", body));
  auto& server = net.add_server(std::move(spec));
  net.start();
  RawClient client(net.address_of(server));
  auto bytes = *client.udp(query("big.example.com", rrtype::A, 512));
  EXPECT_LE(bytes.size(), 512u);
  EXPECT_TRUE(decode_message(bytes).flags.truncated);
  EXPECT_EQ(decode_message(*client.udp(query("big.example.com", rrtype::A, 1232))).answers.size(), 60u);
}

TEST(Testnet, DropFirstN) {
  testnet::Testnet net;
  testnet::ServerSpec spec;
  spec.label = "drop";
  spec.zones.push_back(test::zone("example.com", "www A 10.0.0.1\nmail A 10.0.0.2\n"));
  spec.behaviors.push_back(ServerBehavior::parse("drop_first_n=2"));
  auto& server = net.add_server(std::move(spec));
  net.start();
  RawClient client(net.address_of(server));
  EXPECT_FALSE(client.udp(query("www.example.com")));
  EXPECT_FALSE(client.udp(query("www.example.com")));
  EXPECT_TRUE(client.udp(query("www.example.com")));
  // Counted per question.
  EXPECT_FALSE(client.udp(query("mail.example.com")));
  EXPECT_EQ(server.log().count(DomainName::parse("www.example.com"), rrtype::A), 3u);
}

TEST(Testnet, DelayLameRcodeMinimal) {
  testnet::Testnet net;
  testnet::ServerSpec spec;
  spec.label = "faults";
  spec.zones.push_back(test::zone("example.com", "@ MX 10 mail\nmail A 10.0.0.25\nslow A 10.0.0.3\n"));
  spec.behaviors.push_back(ServerBehavior::parse("match=slow.* delay_ms=150"));
  spec.behaviors.push_back(ServerBehavior::parse("match=lame.* lame=1"));
  spec.behaviors.push_back(ServerBehavior::parse("match=fail.* rcode=SERVFAIL"));
  spec.behaviors.push_back(ServerBehavior::parse("match=fail.* rcode=5"));
  spec.behaviors.push_back(ServerBehavior::parse("match=example.com type=MX minimal=1"));
  auto& server = net.add_server(std::move(spec));
  net.start();
  RawClient client(net.address_of(server));

  auto begin = std::chrono::steady_clock::now();
  auto slow = client.udp(query("slow.example.com"));
  EXPECT_TRUE(slow);
  EXPECT_GE(std::chrono::steady_clock::now() - begin, 150ms);

  auto lame = decode_message(*client.udp(query("lame.example.com")));
  EXPECT_FALSE(lame.flags.authoritative);
  EXPECT_EQ(lame.flags.rcode, 0);
  EXPECT_TRUE(lame.answers.empty() && lame.authorities.empty());

  // The last matching rcode rule wins.
  EXPECT_EQ(decode_message(*client.udp(query("fail.example.com"))).flags.rcode, rcode::REFUSED);

  auto mx = decode_message(*client.udp(query("example.com", rrtype::MX)));
  EXPECT_EQ(mx.answers.size(), 1u);
  EXPECT_TRUE(mx.additionals.empty());
  auto mx_a = decode_message(*client.udp(query("example.com", rrtype::A)));
  EXPECT_EQ(mx_a.flags.rcode, 0);
}

TEST(Testnet, DeterministicLogs) {
  auto run = [] {
    testnet::Testnet net;
    for (auto& spec : testnet::load_fixture_dir(test::data_dir() + "/hierarchy")) net.add_server(std::move(spec));
    net.start();
    auto c = test::iterative_config(net);
    test::scan(c, {"google.com", "www.google.com", "nope.google.com", "x.example.com"});
    std::vector<std::tuple<std::string, std::string, std::uint16_t, std::string>> out;
    for (auto* server : net.servers()) {
      for (const auto& e : server->log().entries()) {
        out.emplace_back(server->label(), e.question.name.canonical(), e.question.type, e.transport);
      }
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

// Serving a fixture and decoding the wire reply yields the fixture's records.
TEST(Testnet, WireRecordsEqualFixture) {
  auto fixture = test::zone("example.com",
                            "@ SOA ns1 hostmaster 1 7200 3600 1209600 300\n"
                            "www A 10.0.0.1\nwww AAAA 2001:db8::1\n@ MX 5 mx.other.org.\n"
                            "@ TXT \"a\" \"b c\"\n@ CAA 0 issuewild \";\"\nalias CNAME www\n"
                            "x TYPE65280 \\# 3 010203\n");
  testnet::Testnet net;
  testnet::ServerSpec spec;
  spec.label = "auth";
  spec.zones.push_back(fixture);
  auto& server = net.add_server(std::move(spec));
  net.start();
  RawClient client(net.address_of(server));
  for (const auto& rr : fixture.records) {
    auto reply = decode_message(*client.udp(query(rr.name.to_string(), rr.type, 1232)));
    auto it = std::find(reply.answers.begin(), reply.answers.end(), rr);
    EXPECT_NE(it, reply.answers.end()) << rr.name.to_string() << " " << type_to_string(rr.type);
  }
}

TEST(Fixture, ParseSyntax) {
  auto z = test::zone("example.com",
                      "$TTL 60\n"
                      "@ IN NS ns1 ; comment\n"
                      "  IN NS ns2.example.net.\n"
                      "ns1 120 A 10.0.0.1\n"
                      "txt TXT \"has ; semicolon\"\n");
  ASSERT_EQ(z.records.size(), 4u);
  EXPECT_EQ(z.records[0].name, DomainName::parse("example.com"));
  EXPECT_EQ(z.records[0].ttl, 60u);
  EXPECT_EQ(std::get<NameRdata>(z.records[0].rdata).target, DomainName::parse("ns1.example.com"));
  EXPECT_EQ(z.records[1].name, DomainName::parse("example.com"));
  EXPECT_EQ(std::get<NameRdata>(z.records[1].rdata).target, DomainName::parse("ns2.example.net"));
  EXPECT_EQ(z.records[2].ttl, 120u);
  EXPECT_EQ(std::get<TxtRdata>(z.records[3].rdata).strings.at(0), "has ; semicolon");
}

TEST(Fixture, Delegations) {
  auto z = test::zone("com", "google NS ns1.google.com.\ngoogle NS ns2.google.com.\nns1.google A 10.0.0.1\n");
  auto d = z.delegations();
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].child, DomainName::parse("google.com"));
  EXPECT_EQ(d[0].name_servers.size(), 2u);
  EXPECT_EQ(d[0].glue.size(), 1u);
}

TEST(Fixture, Errors) {
  EXPECT_THROW(test::zone("example.com", "www.example.org. A 10.0.0.1\n"), testnet::FixtureError);
  EXPECT_THROW(test::zone("example.com", "www BOGUS 1\n"), testnet::FixtureError);
  EXPECT_THROW(test::zone("example.com", "www A 999.0.0.1\n"), testnet::FixtureError);
  EXPECT_THROW(ServerBehavior::parse("drop_first_n=x"), testnet::FixtureError);
  EXPECT_THROW(ServerBehavior::parse("nonsense=1"), testnet::FixtureError);
  EXPECT_THROW(testnet::load_fixture_dir(test::data_dir() + "/golden"), testnet::FixtureError);
}

TEST(Fixture, ServerFile) {
  auto spec = testnet::parse_server_file(
      "$ADDRESS 127.53.9.9\n$ROOT\n$BEHAVIOR match=*.example.com type=A drop_first_n=3 delay_ms=10\n"
      "$ORIGIN example.com.\n$TTL 30\nwww A 10.0.0.1\n",
      "label");
  EXPECT_EQ(spec.label, "label");
  EXPECT_EQ(spec.address->to_string(), "127.53.9.9");
  EXPECT_TRUE(spec.root);
  EXPECT_FALSE(spec.recursive);
  ASSERT_EQ(spec.behaviors.size(), 1u);
  EXPECT_EQ(spec.behaviors[0].drop_first_n, 3);
  EXPECT_EQ(spec.behaviors[0].delay_ms, 10);
  EXPECT_EQ(spec.behaviors[0].qtype, rrtype::A);
  ASSERT_EQ(spec.zones.size(), 1u);
  EXPECT_EQ(spec.zones[0].records.at(0).ttl, 30u);
}

TEST(Fixture, Glob) {
  EXPECT_TRUE(testnet::glob_match("*", "anything"));
  EXPECT_TRUE(testnet::glob_match("*.example.com", "www.EXAMPLE.com"));
  EXPECT_FALSE(testnet::glob_match("*.example.com", "example.com"));
  EXPECT_TRUE(testnet::glob_match("n?.example.com", "n1.example.com"));
  EXPECT_FALSE(testnet::glob_match("n?.example.com", "n10.example.com"));
}

TEST(QueryLog, AssertCountsReportsDiffs) {
  testnet::QueryLog log;
  auto now = std::chrono::steady_clock::now();
  Question root_ns{DomainName(), rrtype::NS, rrclass::IN};
  log.record(root_ns, "udp", now);
  log.record(root_ns, "udp", now + 10ms);
  log.record(Question{DomainName::parse("x"), rrtype::A, rrclass::IN}, "tcp", now + 2s);
  log.note_tcp_connection();

  testnet::CountExpectations ok;
  ok.counts.emplace_back(DomainName(), rrtype::NS, 2);
  ok.total = 3;
  ok.udp_queries = 2;
  ok.tcp_queries = 1;
  ok.tcp_connections = 1;
  ok.max_per_second = 2;
  EXPECT_TRUE(testnet::assert_counts(log, ok).ok);

  testnet::CountExpectations bad;
  bad.counts.emplace_back(DomainName(), rrtype::NS, 1);
  bad.tcp_connections = 0;
  bad.max_per_second = 1;
  auto report = testnet::assert_counts(log, bad);
  EXPECT_FALSE(report.ok);
  EXPECT_EQ(report.diffs.size(), 3u);
  EXPECT_NE(report.to_string().find("expected 1, got 2"), std::string::npos);
}

TEST(Testnet, AutoAddressesAndDuplicates) {
  testnet::Testnet net;
  testnet::ServerSpec a;
  a.zones.push_back(test::zone("a.test", "@ A 10.0.0.1\n"));
  testnet::ServerSpec b = a;
  auto& first = net.add_server(a);
  auto& second = net.add_server(b);
  EXPECT_NE(first.address(), second.address());
  testnet::ServerSpec dup = a;
  dup.address = first.address();
  EXPECT_THROW(net.add_server(dup), testnet::FixtureError);
  net.start();
  EXPECT_NE(net.port(), 0);
  EXPECT_THROW(net.add_server(a), testnet::FixtureError);
}

}  // namespace
}  // namespace bulkdns
