#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace bulkdns {

enum class Status : std::uint8_t {
  kNoError,
  kNxDomain,
  kServFail,
  kRefused,
  kTruncated,
  kTimeout,
  kIterationLimit,
  kNoAnswer,
  kError,
};

inline constexpr std::array<Status, 9> kAllStatuses{
    Status::kNoError, Status::kNxDomain,       Status::kServFail,
    Status::kRefused, Status::kTruncated,      Status::kTimeout,
    Status::kIterationLimit, Status::kNoAnswer, Status::kError,
};

/// Uppercase wire name, e.g. "NOERROR", "ITERATION_LIMIT".
std::string_view to_string(Status status);
std::optional<Status> status_from_string(std::string_view text);

/// NOERROR and NXDOMAIN both count as a successful measurement.
constexpr bool is_success(Status status) {
  return status == Status::kNoError || status == Status::kNxDomain;
}

enum class TransportOutcome { kResponse, kTimeout, kError };

/// Maps an exchange outcome onto a status. Rcode 0 without answers is
/// NO_ANSWER unless the response is a referral.
Status classify_response(TransportOutcome outcome, std::uint8_t rcode, bool has_answers,
                         bool is_delegation);

}  // namespace bulkdns
