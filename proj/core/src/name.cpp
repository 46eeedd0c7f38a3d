#include "bulkdns/name.hpp"

#include <algorithm>
#include <cctype>

namespace bulkdns {
namespace {

char fold(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

void append_escaped(std::string& out, std::string_view label) {
  for (unsigned char c : label) {
    if (c == '.' || c == '\\') {
      out.push_back('\\');
      out.push_back(static_cast<char>(c));
    } else if (c < 0x21 || c > 0x7e) {
      out.push_back('\\');
      out.push_back(static_cast<char>('0' + c / 100));
      out.push_back(static_cast<char>('0' + (c / 10) % 10));
      out.push_back(static_cast<char>('0' + c % 10));
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
}

}  // namespace

bool labels_equal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (fold(a[i]) != fold(b[i])) return false;
  }
  return true;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), fold);
  return out;
}

void DomainName::validate(const std::vector<std::string>& labels) {
  std::size_t total = 1;
  for (const auto& label : labels) {
    if (label.empty()) throw NameError("empty label");
    if (label.size() > kMaxLabelLength) throw NameError("label exceeds 63 bytes");
    total += label.size() + 1;
  }
  if (total > kMaxNameLength) throw NameError("name exceeds 255 bytes");
}

DomainName DomainName::from_labels(std::vector<std::string> labels) {
  validate(labels);
  return DomainName(std::move(labels));
}

DomainName DomainName::parse(std::string_view text) {
  if (text.empty() || text == ".") return DomainName();
  std::vector<std::string> labels;
  std::string current;
  bool pending_label = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\\') {
      if (i + 1 >= text.size()) throw NameError("dangling escape");
      if (std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
        if (i + 3 >= text.size()) throw NameError("short \\DDD escape");
        int value = 0;
        for (int k = 1; k <= 3; ++k) {
          char d = text[i + k];
          if (!std::isdigit(static_cast<unsigned char>(d))) throw NameError("bad \\DDD escape");
          value = value * 10 + (d - '0');
        }
        if (value > 255) throw NameError("\\DDD escape out of range");
        current.push_back(static_cast<char>(value));
        i += 3;
      } else {
        current.push_back(text[i + 1]);
        ++i;
      }
      pending_label = true;
    } else if (c == '.') {
      if (current.empty()) throw NameError("empty label in '" + std::string(text) + "'");
      labels.push_back(std::move(current));
      current.clear();
      pending_label = false;
    } else {
      current.push_back(c);
      pending_label = true;
    }
  }
  if (pending_label) labels.push_back(std::move(current));
  validate(labels);
  return DomainName(std::move(labels));
}

std::string DomainName::to_string() const {
  if (labels_.empty()) return ".";
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) out.push_back('.');
    append_escaped(out, labels_[i]);
  }
  return out;
}

std::string DomainName::to_fqdn() const {
  if (labels_.empty()) return ".";
  return to_string() + ".";
}

std::string DomainName::canonical() const { return ascii_lower(to_string()); }

std::size_t DomainName::wire_length() const {
  std::size_t total = 1;
  for (const auto& label : labels_) total += label.size() + 1;
  return total;
}

bool DomainName::is_subdomain_of(const DomainName& zone) const {
  if (zone.labels_.size() > labels_.size()) return false;
  std::size_t offset = labels_.size() - zone.labels_.size();
  for (std::size_t i = 0; i < zone.labels_.size(); ++i) {
    if (!labels_equal(labels_[offset + i], zone.labels_[i])) return false;
  }
  return true;
}

DomainName DomainName::suffix(std::size_t count) const {
  if (count >= labels_.size()) return *this;
  return DomainName(std::vector<std::string>(labels_.end() - static_cast<std::ptrdiff_t>(count), labels_.end()));
}

DomainName DomainName::parent() const {
  if (labels_.empty()) return *this;
  return DomainName(std::vector<std::string>(labels_.begin() + 1, labels_.end()));
}

DomainName DomainName::child(std::string_view label) const {
  std::vector<std::string> labels;
  labels.reserve(labels_.size() + 1);
  labels.emplace_back(label);
  labels.insert(labels.end(), labels_.begin(), labels_.end());
  return from_labels(std::move(labels));
}

bool operator==(const DomainName& a, const DomainName& b) {
  if (a.labels_.size() != b.labels_.size()) return false;
  for (std::size_t i = 0; i < a.labels_.size(); ++i) {
    if (!labels_equal(a.labels_[i], b.labels_[i])) return false;
  }
  return true;
}

bool operator<(const DomainName& a, const DomainName& b) {
  return a.canonical() < b.canonical();
}

std::size_t DomainNameHash::operator()(const DomainName& name) const {
  std::size_t h = 1469598103934665603ull;
  for (const auto& label : name.labels()) {
    for (char c : label) {
      h ^= static_cast<unsigned char>(fold(c));
      h *= 1099511628211ull;
    }
    h ^= 0x2e;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace bulkdns
