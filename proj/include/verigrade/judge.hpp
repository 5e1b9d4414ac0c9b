#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "verigrade/backend.hpp"
#include "verigrade/exercise.hpp"
#include "verigrade/oracle.hpp"

namespace verigrade::judge {

inline constexpr std::size_t kMaxFeedback = 500;

struct AttemptVerdict {
    bool completed = false;
    std::string feedback;
    int verified_count = 0;
    int error_count = 0;
};

/// Everything the checks produced for one attempt. Fields a policy does
/// not use stay empty.
struct AttemptEvidence {
    backend::VerificationReport verification;
    std::optional<backend::RunReport> run;
    std::optional<bank::CharLimitResult> char_limit;
    std::optional<oracle::OracleVerdict> oracle;
    std::optional<oracle::OracleError> oracle_error;
};

AttemptVerdict judge(const bank::Exercise& exercise, const AttemptEvidence& evidence);

/// Byte-exact comparison, with CRLF folded in the actual output when asked.
bool output_matches(std::string_view expected, std::string_view actual, bool normalize_eol);

struct AttemptOutcome {
    AttemptVerdict verdict;
    AttemptEvidence evidence;
    std::string submission_hash;  // hex SHA-256 of the answer
};

/// splice -> verify -> (run | oracle check) -> judge.
AttemptOutcome evaluate_attempt(const bank::Exercise& exercise, std::string_view answer,
                                const backend::BackendConfig& cfg);

std::string sha256_hex(std::string_view data);

}  // namespace verigrade::judge
