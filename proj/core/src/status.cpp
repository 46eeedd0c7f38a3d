#include "bulkdns/status.hpp"

#include "bulkdns/rr_types.hpp"

namespace bulkdns {

std::string_view to_string(Status status) {
  switch (status) {
    case Status::kNoError: return "NOERROR";
    case Status::kNxDomain: return "NXDOMAIN";
    case Status::kServFail: return "SERVFAIL";
    case Status::kRefused: return "REFUSED";
    case Status::kTruncated: return "TRUNCATED";
    case Status::kTimeout: return "TIMEOUT";
    case Status::kIterationLimit: return "ITERATION_LIMIT";
    case Status::kNoAnswer: return "NO_ANSWER";
    case Status::kError: return "ERROR";
  }
  return "ERROR";
}

std::optional<Status> status_from_string(std::string_view text) {
  for (auto s : kAllStatuses) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

Status classify_response(TransportOutcome outcome, std::uint8_t code, bool has_answers,
                         bool is_delegation) {
  switch (outcome) {
    case TransportOutcome::kTimeout: return Status::kTimeout;
    case TransportOutcome::kError: return Status::kError;
    case TransportOutcome::kResponse: break;
  }
  switch (code) {
    case rcode::NOERROR:
      if (has_answers || is_delegation) return Status::kNoError;
      return Status::kNoAnswer;
    case rcode::NXDOMAIN: return Status::kNxDomain;
    case rcode::SERVFAIL: return Status::kServFail;
    case rcode::REFUSED: return Status::kRefused;
    default: return Status::kError;
  }
}

}  // namespace bulkdns
