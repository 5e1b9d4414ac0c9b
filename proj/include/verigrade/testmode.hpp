#pragma once

#include <optional>
#include <string>
#include <vector>

#include "verigrade/syntax/ast.hpp"

namespace verigrade::testmode {

struct TransformOptions {
    bool check_requires = true;
    bool check_ensures = true;
    bool check_asserts = true;
    bool check_assumes = true;
    bool check_invariants = true;

    bool any() const { return check_requires || check_ensures || check_asserts || check_assumes || check_invariants; }
};

enum class SkipReason {
    UnsupportedOld,    // old(...) over something other than a bare parameter
    FunctionEnsures,   // expression bodies cannot host statements
    FunctionRequires,
    NoBody,            // body-less method
    Disabled,          // option turned off
};

const char* to_string(SkipReason r);

struct SkippedClause {
    SkipReason reason;
    syntax::ClauseKind kind;
    std::string decl_name;
    std::string text;
    std::optional<std::size_t> offset;  // byte offset of the clause keyword
};

struct RewriteCounts {
    int asserts = 0;
    int assumes = 0;
    int preconditions = 0;
    int postconditions = 0;
    int invariants = 0;

    friend bool operator==(const RewriteCounts&, const RewriteCounts&) = default;
};

struct TransformReport {
    RewriteCounts rewritten;
    std::vector<SkippedClause> skipped;
};

/// Turns asserts, assumes, method pre/postconditions and loop invariants
/// into runtime `expect` statements. Everything else is left byte-identical.
syntax::ProgramUnit to_test_mode(const syntax::ProgramUnit& unit, const TransformOptions& opts = {});

/// Counts what disappeared between the two units and explains every
/// specification clause still left in `after`.
TransformReport transform_report(const syntax::ProgramUnit& before, const syntax::ProgramUnit& after,
                                 const TransformOptions& opts = {});

}  // namespace verigrade::testmode
