#pragma once

#include <chrono>
#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bulkdns/wire.hpp"

namespace bulkdns {

enum class Section { kAnswer, kAuthority, kAdditional };

/// Selective caching policy: only delegation NS sets and their glue addresses
/// are kept, and nothing owned by the name actually being looked up.
///
/// `ns_targets` are the NS rdata targets seen in the same message; an
/// additional-section A/AAAA is glue only when its owner is one of them.
bool is_cacheable(const ResourceRecord& record, Section section, const DomainName& query_leaf,
                  const std::vector<DomainName>& ns_targets = {});

struct CacheKey {
  std::string name;  // canonical (lower-case) presentation form
  std::uint16_t type = 0;

  CacheKey() = default;
  CacheKey(const DomainName& owner, std::uint16_t rrtype) : name(owner.canonical()), type(rrtype) {}

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& key) const {
    return std::hash<std::string>{}(key.name) * 31 + key.type;
  }
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t insertions = 0;
};

/// LRU-bounded record cache with per-entry expiry at the minimum TTL of the
/// stored set. All operations are serialized by one mutex.
class RecordCache {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RecordCache(std::size_t capacity) : capacity_(capacity) {}

  RecordCache(const RecordCache&) = delete;
  RecordCache& operator=(const RecordCache&) = delete;

  /// Stores `records` under `key`, replacing any existing entry. Empty record
  /// lists are ignored.
  void put(const CacheKey& key, std::vector<ResourceRecord> records, Clock::time_point now);
  std::optional<std::vector<ResourceRecord>> get(const CacheKey& key, Clock::time_point now);

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  CacheStats stats() const;

  /// Snapshot of all live keys; used by tests to audit cache contents.
  std::vector<CacheKey> keys() const;

 private:
  struct Entry {
    CacheKey key;
    std::vector<ResourceRecord> records;
    Clock::time_point inserted_at;
    Clock::time_point expires_at;
  };
  using Lru = std::list<Entry>;

  std::size_t capacity_;
  mutable std::mutex mu_;
  Lru lru_;  // front = most recently used
  std::unordered_map<CacheKey, Lru::iterator, CacheKeyHash> index_;
  CacheStats stats_;
};

}  // namespace bulkdns
