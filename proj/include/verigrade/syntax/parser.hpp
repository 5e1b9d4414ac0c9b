#pragma once

#include <string>
#include <string_view>

#include "verigrade/expected.hpp"
#include "verigrade/syntax/ast.hpp"

namespace verigrade::syntax {

enum class ParseErrorKind { UnterminatedString, UnterminatedComment, UnbalancedDelimiters };

struct ParseError {
    ParseErrorKind kind;
    std::size_t offset;
    std::string message;
};

/// Parses a compilation unit. Constructs outside the subset become Opaque
/// declarations or statements; the only failures are lexical errors and
/// unbalanced delimiters.
Expected<ProgramUnit, ParseError> parse_unit(std::string_view source);

std::string emit(const ProgramUnit& unit);
std::string emit(const Decl& decl);
std::string emit(const Stmt& stmt);
std::string emit(const Block& block);
std::string emit(const Clause& clause);

/// Spec clauses of a callable declaration, in source order per kind.
SpecClauses extract_spec(const Decl& decl);

/// First declaration with this name, searching class/module members too.
const Decl* find_decl(const ProgramUnit& unit, std::string_view name);
Decl* find_decl(ProgramUnit& unit, std::string_view name);

/// Same token kinds and texts, ignoring trivia. False if either side fails to lex.
bool token_equivalent(std::string_view a, std::string_view b);

/// Collapses whitespace runs to one space and trims.
std::string normalize_whitespace(std::string_view text);

}  // namespace verigrade::syntax
