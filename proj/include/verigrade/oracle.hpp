#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "verigrade/backend.hpp"
#include "verigrade/expected.hpp"
#include "verigrade/syntax/ast.hpp"

namespace verigrade::oracle {

/// Hidden reference for a specification question: the oracle file parsed,
/// plus the declaration whose spec students must write.
struct OracleAsset {
    std::string target_name;
    syntax::SpecClauses oracle_spec;
    syntax::Decl oracle_impl;
    syntax::ProgramUnit unit;
    std::string source;
};

enum class OracleErrorKind { ParseFailed, TargetNotFound, SignatureMismatch, UnsupportedConstruct };

/// Messages are safe to show students; they never quote the oracle.
struct OracleError {
    OracleErrorKind kind;
    std::string message;
};

const char* to_string(OracleErrorKind kind);

/// Parses an oracle file. Without a target, the first top-level callable is used.
Expected<OracleAsset, OracleError> load_oracle_asset(std::string_view source,
                                                     std::optional<std::string_view> target = std::nullopt);

/// Names, arity and whitespace-normalized types of parameters and results must agree.
std::optional<OracleError> check_signature(const syntax::Decl& student, const OracleAsset& asset);

/// The oracle program with the target re-specified by the student's requires/ensures.
Expected<std::string, OracleError> build_consistency_harness(const syntax::ProgramUnit& student_unit,
                                                             const OracleAsset& asset);

/// A body-less `Stu__` carrying the student's spec, and a method asserting every
/// oracle postcondition about a call to it under the oracle's preconditions.
Expected<std::string, OracleError> build_capture_harness(const syntax::ProgramUnit& student_unit,
                                                         const OracleAsset& asset);

struct OracleChecks {
    bool consistency = true;
    bool capture = true;
};

struct OracleVerdict {
    bool consistent = false;
    bool captures = false;
    std::optional<backend::VerificationReport> consistency_report;
    std::optional<backend::VerificationReport> capture_report;
};

/// Disabled checks count as satisfied and carry no report.
Expected<OracleVerdict, OracleError> check_spec(std::string_view student_source, const OracleAsset& asset,
                                                const backend::BackendConfig& cfg, OracleChecks checks = {});

}  // namespace verigrade::oracle
