#pragma once

// Statement-level syntax tree for a Dafny subset.
//
// Every node keeps the verbatim text it was parsed from, split into pieces
// that each carry their leading trivia. Concatenating the pieces of a tree
// in order reproduces the original source byte for byte. Expressions are
// never interpreted; they travel as ExprSpan text.

#include <optional>
#include <string>
#include <vector>

#include "verigrade/syntax/token.hpp"

namespace verigrade::syntax {

/// Verbatim text plus the whitespace/comments in front of it.
/// Synthesized pieces have no source range.
struct Piece {
    std::string trivia;
    std::string text;
    std::optional<SourceRange> range;
};

/// Opaque expression text. Balanced delimiters, never empty.
struct ExprSpan {
    std::string trivia;
    std::string text;
    std::optional<SourceRange> range;
};

enum class ClauseKind { Requires, Ensures, Decreases, Invariant, Modifies, Reads };

struct Clause {
    ClauseKind kind;
    Piece keyword;
    ExprSpan body;
    // Comma-separated items for decreases/modifies/reads; {body} otherwise.
    std::vector<ExprSpan> items;
};

struct SpecClauses {
    std::vector<ExprSpan> preconditions;   // requires
    std::vector<ExprSpan> postconditions;  // ensures
    std::vector<ExprSpan> decreases;
    std::vector<ExprSpan> modifies_reads;
};

struct Param {
    std::string name;       // empty for anonymous parameters
    std::string type_text;  // verbatim
    bool ghost = false;
};

enum class StmtKind {
    Assert,
    Assume,
    Expect,
    VarDecl,
    Assign,
    Call,
    If,
    While,
    Return,
    Print,
    Block,
    Opaque,
};

struct Stmt;

/// `{ stmts }`. An `else if` branch is stored as an unbraced block whose
/// open/close pieces are empty and whose only statement is the nested if.
struct Block {
    Piece open;
    std::vector<Stmt> stmts;
    Piece close;
    bool braced = true;
};

struct Stmt {
    StmtKind kind = StmtKind::Opaque;
    std::optional<SourceRange> range;

    // Keyword for assert/assume/expect/if/while/return; the whole statement
    // text for VarDecl, Assign, Call, Print and Opaque; empty for Block.
    Piece head;
    std::optional<ExprSpan> expr;  // asserted expression, guard, or returned values
    std::optional<Piece> message_comma;
    std::optional<ExprSpan> message;  // `expect e, "message";`
    std::vector<Clause> clauses;      // loop specification
    std::vector<Block> blocks;        // body / then [, else]
    std::optional<Piece> else_keyword;
    std::optional<Piece> tail;        // trailing `;`
};

enum class DeclKind { Method, FunctionMethod, Function, Predicate, Datatype, Opaque };

struct FunctionBody {
    Piece open;
    ExprSpan expr;
    Piece close;
};

struct Decl {
    DeclKind kind = DeclKind::Opaque;
    std::optional<SourceRange> range;
    std::string name;

    // Declaration keywords (`function`, `method`). For Opaque and Datatype
    // declarations this holds the whole text (containers: text up to `{`).
    std::vector<Piece> keywords;
    std::optional<Piece> name_piece;
    std::optional<Piece> type_params;
    std::optional<Piece> params_text;
    std::vector<Param> params;
    std::optional<Piece> returns_keyword;  // `returns` or `:`
    std::optional<Piece> returns_text;
    std::vector<Param> returns;            // named method outputs
    std::string result_type;               // function result type text
    std::vector<Clause> clauses;
    std::optional<Block> body;             // methods
    std::optional<FunctionBody> function_body;

    std::vector<std::string> constructors;  // datatypes

    // class/trait/module bodies, parsed best-effort and passed through.
    std::vector<Decl> members;
    std::optional<Piece> members_close;

    bool is_callable() const {
        return kind == DeclKind::Method || kind == DeclKind::FunctionMethod || kind == DeclKind::Function ||
               kind == DeclKind::Predicate;
    }
    bool is_function_like() const {
        return kind == DeclKind::FunctionMethod || kind == DeclKind::Function || kind == DeclKind::Predicate;
    }
};

struct ProgramUnit {
    std::vector<Decl> declarations;
    std::string trailing;  // trivia after the last token
};

const char* to_string(StmtKind kind);
const char* to_string(DeclKind kind);
const char* to_string(ClauseKind kind);

}  // namespace verigrade::syntax
