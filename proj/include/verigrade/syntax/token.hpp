#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "verigrade/expected.hpp"

namespace verigrade::syntax {

/// Half-open byte range [begin, end) into the source text.
struct SourceRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool empty() const { return begin == end; }
    friend bool operator==(const SourceRange&, const SourceRange&) = default;
};

enum class TokenKind {
    Ident,
    Number,
    String,
    Char,
    Assign,     // :=
    Eq,         // ==
    Neq,        // !=
    Semi,
    Comma,
    Colon,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Operator,   // any other punctuation run
};

enum class TriviaKind { Whitespace, LineComment, BlockComment };

struct Trivia {
    TriviaKind kind;
    SourceRange range;
};

/// A token plus the whitespace and comments immediately before it.
struct Token {
    TokenKind kind;
    SourceRange range;
    SourceRange leading;  // trivia before the token, possibly empty
    std::vector<Trivia> trivia;
};

struct TokenStream {
    std::vector<Token> tokens;
    SourceRange trailing;  // trivia after the last token
    std::vector<Trivia> trailing_trivia;
};

enum class LexErrorKind { UnterminatedString, UnterminatedComment };

struct LexError {
    LexErrorKind kind;
    std::size_t offset;
    std::string message() const;
};

Expected<TokenStream, LexError> tokenize(std::string_view source);

const char* to_string(TokenKind kind);

}  // namespace verigrade::syntax
