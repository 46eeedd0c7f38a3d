#include <random>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "bulkdns/cache.hpp"

namespace bulkdns {
namespace {

using namespace std::chrono_literals;
using Clock = RecordCache::Clock;

ResourceRecord ns(const std::string& owner, const std::string& target, std::uint32_t ttl = 172800) {
  return ResourceRecord{DomainName::parse(owner), rrtype::NS, rrclass::IN, ttl, NameRdata{DomainName::parse(target)}};
}

ResourceRecord a(const std::string& owner, std::array<std::uint8_t, 4> ip, std::uint32_t ttl = 172800) {
  return ResourceRecord{DomainName::parse(owner), rrtype::A, rrclass::IN, ttl, Ipv4Rdata{ip}};
}

TEST(IsCacheable, DelegationNs) {
  EXPECT_TRUE(is_cacheable(ns("com", "a.gtld-servers.net"), Section::kAuthority, DomainName::parse("google.com")));
}

TEST(IsCacheable, LeafAnswerNeverCached) {
  EXPECT_FALSE(is_cacheable(a("google.com", {216, 58, 195, 78}), Section::kAnswer, DomainName::parse("google.com")));
  EXPECT_FALSE(is_cacheable(ns("google.com", "ns1.google.com"), Section::kAuthority, DomainName::parse("GOOGLE.com")));
}

TEST(IsCacheable, GlueForSeenNsTarget) {
  std::vector<DomainName> targets{DomainName::parse("a.gtld-servers.net")};
  EXPECT_TRUE(is_cacheable(a("a.gtld-servers.net", {192, 5, 6, 30}), Section::kAdditional,
                           DomainName::parse("google.com"), targets));
  EXPECT_FALSE(is_cacheable(a("a.gtld-servers.net", {192, 5, 6, 30}), Section::kAdditional,
                            DomainName::parse("google.com")));
  EXPECT_FALSE(is_cacheable(a("a.gtld-servers.net", {192, 5, 6, 30}), Section::kAnswer,
                            DomainName::parse("google.com"), targets));
  EXPECT_FALSE(is_cacheable(a("unrelated.example", {10, 0, 0, 1}), Section::kAdditional,
                            DomainName::parse("google.com"), targets));
}

TEST(IsCacheable, OtherTypesRejected) {
  ResourceRecord mx{DomainName::parse("google.com"), rrtype::MX, rrclass::IN, 300,
                    MxRdata{10, DomainName::parse("smtp.google.com")}};
  EXPECT_FALSE(is_cacheable(mx, Section::kAnswer, DomainName::parse("www.google.com")));
}

TEST(RecordCache, EmptyGetMisses) {
  RecordCache cache(10);
  EXPECT_FALSE(cache.get(CacheKey(DomainName::parse("com"), rrtype::NS), Clock::now()));
  EXPECT_EQ(cache.stats().misses, 1u);
}

TEST(RecordCache, CapacityOneEvicts) {
  RecordCache cache(1);
  auto now = Clock::now();
  cache.put(CacheKey(DomainName::parse("com"), rrtype::NS), {ns("com", "a.gtld-servers.net")}, now);
  cache.put(CacheKey(DomainName::parse("net"), rrtype::NS), {ns("net", "a.gtld-servers.net")}, now);
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_EQ(cache.stats().evictions, 1u);
  EXPECT_FALSE(cache.get(CacheKey(DomainName::parse("com"), rrtype::NS), now));
  EXPECT_TRUE(cache.get(CacheKey(DomainName::parse("net"), rrtype::NS), now));
}

TEST(RecordCache, ExpiresAtMinimumTtl) {
  RecordCache cache(10);
  auto now = Clock::now();
  CacheKey key(DomainName::parse("com"), rrtype::NS);
  cache.put(key, {ns("com", "a.gtld-servers.net", 172800), ns("com", "b.gtld-servers.net", 300)}, now);
  EXPECT_TRUE(cache.get(key, now + 299s));
  EXPECT_FALSE(cache.get(key, now + 300s));
  EXPECT_EQ(cache.size(), 0u);
  EXPECT_FALSE(cache.get(key, now + 301s));
}

TEST(RecordCache, ExpiredAfterTtlPlusOne) {
  RecordCache cache(10);
  auto now = Clock::now();
  CacheKey key(DomainName::parse("com"), rrtype::NS);
  cache.put(key, {ns("com", "a.gtld-servers.net", 60)}, now);
  EXPECT_FALSE(cache.get(key, now + 61s));
  EXPECT_EQ(cache.size(), 0u);
}

TEST(RecordCache, CaseInsensitiveKeys) {
  RecordCache cache(10);
  auto now = Clock::now();
  cache.put(CacheKey(DomainName::parse("GOOGLE.com"), rrtype::NS), {ns("google.com", "ns1.google.com")}, now);
  EXPECT_TRUE(cache.get(CacheKey(DomainName::parse("google.COM"), rrtype::NS), now));
}

TEST(RecordCache, GetRefreshesRecency) {
  RecordCache cache(2);
  auto now = Clock::now();
  CacheKey com(DomainName::parse("com"), rrtype::NS);
  CacheKey net(DomainName::parse("net"), rrtype::NS);
  CacheKey org(DomainName::parse("org"), rrtype::NS);
  cache.put(com, {ns("com", "x")}, now);
  cache.put(net, {ns("net", "x")}, now);
  ASSERT_TRUE(cache.get(com, now));
  cache.put(org, {ns("org", "x")}, now);
  EXPECT_TRUE(cache.get(com, now));
  EXPECT_FALSE(cache.get(net, now));
}

TEST(RecordCache, OverwriteIsLastWriterWins) {
  RecordCache cache(10);
  auto now = Clock::now();
  CacheKey key(DomainName::parse("com"), rrtype::NS);
  cache.put(key, {ns("com", "a.gtld-servers.net", 60)}, now);
  cache.put(key, {ns("com", "b.gtld-servers.net", 600)}, now + 30s);
  auto got = cache.get(key, now + 120s);
  ASSERT_TRUE(got);
  EXPECT_EQ(std::get<NameRdata>(got->front().rdata).target, DomainName::parse("b.gtld-servers.net"));
  EXPECT_EQ(cache.size(), 1u);
}

TEST(RecordCache, EmptyPutIgnored) {
  RecordCache cache(10);
  cache.put(CacheKey(DomainName::parse("com"), rrtype::NS), {}, Clock::now());
  EXPECT_EQ(cache.size(), 0u);
  EXPECT_EQ(cache.stats().insertions, 0u);
}

TEST(RecordCache, NoEvictionsBelowCapacity) {
  constexpr std::size_t kCapacity = 600000;
  RecordCache cache(kCapacity);
  auto now = Clock::now();
  auto rr = ns("com", "a.gtld-servers.net");
  for (std::size_t i = 0; i < kCapacity; ++i) {
    CacheKey key;
    key.name = "z" + std::to_string(i) + ".com";
    key.type = rrtype::NS;
    cache.put(key, {rr}, now);
  }
  EXPECT_EQ(cache.size(), kCapacity);
  EXPECT_EQ(cache.stats().evictions, 0u);
  EXPECT_EQ(cache.stats().insertions, kCapacity);
}

TEST(RecordCache, RandomOperationInvariants) {
  std::mt19937 rng(5);
  auto now = Clock::now();
  for (std::size_t capacity : {1u, 3u, 17u, 64u}) {
    RecordCache cache(capacity);
    std::uint64_t gets = 0;
    CacheStats last;
    for (int i = 0; i < 20000; ++i) {
      now += std::chrono::milliseconds(rng() % 2000);
      CacheKey key(DomainName::parse("n" + std::to_string(rng() % 100) + ".example"), rrtype::NS);
      if (rng() % 2) {
        cache.put(key, {ns(key.name, "ns.example", 1 + rng() % 30)}, now);
      } else {
        ++gets;
        if (auto got = cache.get(key, now)) {
          ASSERT_FALSE(got->empty());
        }
      }
      ASSERT_LE(cache.size(), capacity);
      auto s = cache.stats();
      ASSERT_EQ(s.hits + s.misses, gets);
      ASSERT_GE(s.hits, last.hits);
      ASSERT_GE(s.misses, last.misses);
      ASSERT_GE(s.evictions, last.evictions);
      ASSERT_GE(s.insertions, last.insertions);
      last = s;
    }
  }
}

// Entries are only ever served before their deadline, under a virtual clock.
TEST(RecordCache, ExpiredNeverReturned) {
  std::mt19937 rng(6);
  RecordCache cache(50);
  auto base = Clock::now();
  std::map<std::string, Clock::time_point> deadline;
  auto now = base;
  for (int i = 0; i < 20000; ++i) {
    now += std::chrono::milliseconds(rng() % 500);
    std::string owner = "d" + std::to_string(rng() % 40) + ".example";
    CacheKey key(DomainName::parse(owner), rrtype::NS);
    if (rng() % 3 == 0) {
      std::uint32_t ttl = 1 + rng() % 5;
      cache.put(key, {ns(owner, "ns.example", ttl)}, now);
      deadline[key.name] = now + std::chrono::seconds(ttl);
    } else if (cache.get(key, now)) {
      ASSERT_LT(now, deadline.at(key.name));
    }
  }
}

}  // namespace
}  // namespace bulkdns
