#include "bulkdns/cache.hpp"

#include <algorithm>

namespace bulkdns {

bool is_cacheable(const ResourceRecord& record, Section section, const DomainName& query_leaf,
                  const std::vector<DomainName>& ns_targets) {
  if (record.name == query_leaf) return false;
  if (record.type == rrtype::NS) return true;
  if ((record.type == rrtype::A || record.type == rrtype::AAAA) && section == Section::kAdditional) {
    return std::any_of(ns_targets.begin(), ns_targets.end(),
                       [&](const DomainName& target) { return target == record.name; });
  }
  return false;
}

void RecordCache::put(const CacheKey& key, std::vector<ResourceRecord> records,
                      Clock::time_point now) {
  if (records.empty() || capacity_ == 0) return;
  std::uint32_t min_ttl = records.front().ttl;
  for (const auto& rr : records) min_ttl = std::min(min_ttl, rr.ttl);

  std::lock_guard lock(mu_);
  ++stats_.insertions;
  if (auto it = index_.find(key); it != index_.end()) {
    lru_.erase(it->second);
    index_.erase(it);
  }
  lru_.push_front(Entry{key, std::move(records), now, now + std::chrono::seconds(min_ttl)});
  index_.emplace(key, lru_.begin());
  while (lru_.size() > capacity_) {
    index_.erase(lru_.back().key);
    lru_.pop_back();
    ++stats_.evictions;
  }
}

std::optional<std::vector<ResourceRecord>> RecordCache::get(const CacheKey& key,
                                                           Clock::time_point now) {
  std::lock_guard lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) {
    ++stats_.misses;
    return std::nullopt;
  }
  if (now >= it->second->expires_at) {
    lru_.erase(it->second);
    index_.erase(it);
    ++stats_.misses;
    return std::nullopt;
  }
  lru_.splice(lru_.begin(), lru_, it->second);
  ++stats_.hits;
  return it->second->records;
}

std::size_t RecordCache::size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

CacheStats RecordCache::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::vector<CacheKey> RecordCache::keys() const {
  std::lock_guard lock(mu_);
  std::vector<CacheKey> out;
  out.reserve(lru_.size());
  for (const auto& e : lru_) out.push_back(e.key);
  return out;
}

}  // namespace bulkdns
