#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bulkdns {

inline constexpr std::size_t kMaxLabelLength = 63;
inline constexpr std::size_t kMaxNameLength = 255;

/// Raised when text or wire data cannot form a valid domain name.
class NameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A domain name held as an ordered list of raw labels, most specific first.
///
/// Labels are byte strings of 1-63 octets; the encoded form (labels plus
/// length octets plus the terminating root octet) never exceeds 255 bytes.
/// Equality, ordering and hashing ignore ASCII letter case.
class DomainName {
 public:
  DomainName() = default;  // the root

  /// Parses presentation form. A trailing dot is optional; "." and "" are
  /// the root. Supports `\.` and `\DDD` escapes.
  static DomainName parse(std::string_view text);
  static DomainName from_labels(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t label_count() const { return labels_.size(); }
  bool is_root() const { return labels_.empty(); }

  /// Dot-joined form without trailing dot ("google.com"); root is ".".
  std::string to_string() const;
  /// Fully qualified form with trailing dot ("google.com.").
  std::string to_fqdn() const;
  /// Lower-cased presentation form; the identity used for keys.
  std::string canonical() const;

  std::size_t wire_length() const;

  /// True when this name equals `zone` or lies beneath it.
  bool is_subdomain_of(const DomainName& zone) const;
  /// The rightmost `count` labels.
  DomainName suffix(std::size_t count) const;
  DomainName parent() const;
  /// Prepends a single label.
  DomainName child(std::string_view label) const;

  friend bool operator==(const DomainName& a, const DomainName& b);
  friend bool operator<(const DomainName& a, const DomainName& b);

 private:
  explicit DomainName(std::vector<std::string> labels) : labels_(std::move(labels)) {}
  static void validate(const std::vector<std::string>& labels);

  std::vector<std::string> labels_;
};

bool labels_equal(std::string_view a, std::string_view b);
std::string ascii_lower(std::string_view text);

struct DomainNameHash {
  std::size_t operator()(const DomainName& name) const;
};

}  // namespace bulkdns
