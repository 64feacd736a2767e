#pragma once

#include <stdexcept>
#include <string>

namespace peerrank {

/// Failure categories surfaced by the library. Every error carries one of
/// these codes so callers (and the CLI) can map failures to exit codes
/// without string matching.
enum class Errc {
  duplicate_candidate,
  missing_candidate,
  empty_group,
  candidate_mismatch,
  degenerate_variance,
  empty_profile,
  ties_unsupported,
  size_limit_exceeded,
  missing_self_ballot,
  insufficient_peers,
  invalid_config,
  parse_error,
  duplicate_ballot,
  unknown_model,
  out_of_range,
  arity_mismatch,
  malformed_reply,
  incomplete_ranking,
  gateway_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::duplicate_candidate: return "DuplicateCandidate";
    case Errc::missing_candidate: return "MissingCandidate";
    case Errc::empty_group: return "EmptyGroup";
    case Errc::candidate_mismatch: return "CandidateMismatch";
    case Errc::degenerate_variance: return "DegenerateVariance";
    case Errc::empty_profile: return "EmptyProfile";
    case Errc::ties_unsupported: return "TiesUnsupported";
    case Errc::size_limit_exceeded: return "SizeLimitExceeded";
    case Errc::missing_self_ballot: return "MissingSelfBallot";
    case Errc::insufficient_peers: return "InsufficientPeers";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::parse_error: return "ParseError";
    case Errc::duplicate_ballot: return "DuplicateBallot";
    case Errc::unknown_model: return "UnknownModelId";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::arity_mismatch: return "ArityMismatch";
    case Errc::malformed_reply: return "MalformedReply";
    case Errc::incomplete_ranking: return "IncompleteRanking";
    case Errc::gateway_error: return "GatewayError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

  /// Process exit code: 2 = input/validation, 3 = size limit, 4 = gateway.
  int exit_code() const noexcept {
    switch (code_) {
      case Errc::size_limit_exceeded: return 3;
      case Errc::gateway_error: return 4;
      default: return 2;
    }
  }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace peerrank
