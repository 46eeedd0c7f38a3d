#include <gtest/gtest.h>

#include "bulkdns/load_balancer.hpp"
#include "bulkdns/result.hpp"
#include "bulkdns/status.hpp"

namespace bulkdns {
namespace {

TEST(Status, WireNames) {
  EXPECT_EQ(to_string(Status::kNoError), "NOERROR");
  EXPECT_EQ(to_string(Status::kNxDomain), "NXDOMAIN");
  EXPECT_EQ(to_string(Status::kIterationLimit), "ITERATION_LIMIT");
  EXPECT_EQ(to_string(Status::kNoAnswer), "NO_ANSWER");
  for (auto s : kAllStatuses) EXPECT_EQ(status_from_string(to_string(s)), s);
  EXPECT_FALSE(status_from_string("nope"));
}

TEST(Status, SuccessIsNoErrorOrNxDomain) {
  for (auto s : kAllStatuses) {
    EXPECT_EQ(is_success(s), s == Status::kNoError || s == Status::kNxDomain) << to_string(s);
  }
}

TEST(Status, Classification) {
  using T = TransportOutcome;
  EXPECT_EQ(classify_response(T::kResponse, 0, true, false), Status::kNoError);
  EXPECT_EQ(classify_response(T::kResponse, 0, false, false), Status::kNoAnswer);
  EXPECT_EQ(classify_response(T::kResponse, 0, false, true), Status::kNoError);
  EXPECT_EQ(classify_response(T::kResponse, 3, false, false), Status::kNxDomain);
  EXPECT_EQ(classify_response(T::kResponse, 2, false, false), Status::kServFail);
  EXPECT_EQ(classify_response(T::kResponse, 5, false, false), Status::kRefused);
  EXPECT_EQ(classify_response(T::kResponse, 4, false, false), Status::kError);
  EXPECT_EQ(classify_response(T::kTimeout, 0, false, false), Status::kTimeout);
  EXPECT_EQ(classify_response(T::kError, 0, false, false), Status::kError);
}

TEST(ResultJson, ExternalResultOmitsTrace) {
  LookupResult r;
  r.name = "google.com";
  r.status = Status::kNoError;
  r.timestamp = "2022-05-18T19:19:58Z";
  r.data = {{"protocol", "udp"}};
  auto j = to_json(r);
  EXPECT_FALSE(j.contains("trace"));
  EXPECT_FALSE(j.contains("error"));
  EXPECT_EQ(j["status"], "NOERROR");
}

TEST(ResultJson, TraceStepKeys) {
  TraceStep step;
  step.layer = DomainName();
  step.name = DomainName::parse("google.com");
  step.name_server = "198.41.0.4:53";
  auto j = to_json(step);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"cached", "class", "depth", "layer", "name", "name_server", "results",
                                            "try", "type"}));
  EXPECT_EQ(j["layer"], ".");
  EXPECT_EQ(j["class"], 1);
  EXPECT_EQ(j["type"], 1);
}

TEST(ResultJson, TimestampFormat) {
  // 2022-05-18T19:19:58Z
  std::chrono::system_clock::time_point t{std::chrono::seconds(1652901598)};
  EXPECT_EQ(format_timestamp(t), "2022-05-18T19:19:58Z");
}

TEST(ResultJson, InvalidUtf8Replaced) {
  LookupResult r;
  r.name = std::string("bad\xff", 4);
  r.timestamp = "t";
  auto line = serialize_line(r);
  EXPECT_NO_THROW(nlohmann::json::parse(line));
  EXPECT_EQ(line.find('\n'), std::string::npos);
}

TEST(LoadBalance, SingleResolver) {
  std::vector<ServerAddress> servers{ServerAddress::parse("1.1.1.1")};
  std::uint64_t counter = 17;
  for (int i = 0; i < 10; ++i) EXPECT_EQ(load_balance(servers, counter), servers[0]);
}

TEST(LoadBalance, RoundRobin) {
  std::vector<ServerAddress> servers{ServerAddress::parse("1.1.1.1"), ServerAddress::parse("8.8.8.8:5353")};
  LoadBalancer lb(servers, 1);
  EXPECT_EQ(lb.next(), servers[1]);
  EXPECT_EQ(lb.next(), servers[0]);
  EXPECT_EQ(lb.next(), servers[1]);
  std::uint64_t counter = 0;
  std::vector<ServerAddress> none;
  EXPECT_THROW(load_balance(none, counter), std::invalid_argument);
}

TEST(ServerAddress, Parse) {
  auto a = ServerAddress::parse("8.8.8.8");
  EXPECT_EQ(a.port, 53);
  EXPECT_EQ(a.to_string(), "8.8.8.8:53");
  EXPECT_EQ(ServerAddress::parse("127.0.0.1:5353").port, 5353);
  EXPECT_EQ(ServerAddress::parse("[::1]:5300").port, 5300);
  EXPECT_THROW(ServerAddress::parse("999.1.1.1"), std::invalid_argument);
  EXPECT_THROW(ServerAddress::parse("1.1.1.1:99999"), std::invalid_argument);
  EXPECT_FALSE(ServerAddress::try_parse("not an address"));
}

TEST(ServerAddress, RootHintsAndResolvConf) {
  std::istringstream hints("# comment\na.root-servers.net 198.41.0.4\nb.root-servers.net 170.247.170.2 ; x\n");
  auto parsed = parse_root_hints(hints);
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0].name, DomainName::parse("a.root-servers.net"));
  EXPECT_EQ(parsed[0].address->to_string(), "198.41.0.4:53");
  EXPECT_EQ(builtin_root_hints().size(), 13u);

  std::istringstream conf("search example\nnameserver 10.0.0.2\n# nameserver 1.2.3.4\nnameserver 10.0.0.3\n");
  auto servers = parse_resolv_conf(conf);
  ASSERT_EQ(servers.size(), 2u);
  EXPECT_EQ(servers[1].to_string(), "10.0.0.3:53");
}

}  // namespace
}  // namespace bulkdns
