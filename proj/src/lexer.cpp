#include <array>
#include <cctype>
#include <optional>
#include <string>

#include "verigrade/syntax/token.hpp"

namespace verigrade::syntax {

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }

bool is_ident_part(unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '\'' || c == '?' || c >= 0x80;
}

// Longest first.
constexpr std::array<std::string_view, 17> kMultiCharOps = {
    "<==>", "==>", "<==", ":=", ":|", "::", "==", "!=", "<=",
    ">=",   "&&",  "||",  "!!", "..", "=>", "->", "<-",
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Expected<TokenStream, LexError> run() {
        TokenStream out;
        for (;;) {
            std::size_t trivia_begin = pos_;
            std::vector<Trivia> trivia;
            if (auto err = skip_trivia(trivia)) return unexpected(*err);
            SourceRange leading{trivia_begin, pos_};
            if (pos_ >= src_.size()) {
                out.trailing = leading;
                out.trailing_trivia = std::move(trivia);
                return out;
            }
            auto tok = next_token();
            if (!tok) return unexpected(tok.error());
            tok->leading = leading;
            tok->trivia = std::move(trivia);
            out.tokens.push_back(std::move(*tok));
        }
    }

private:
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    std::optional<LexError> skip_trivia(std::vector<Trivia>& trivia) {
        while (pos_ < src_.size()) {
            std::size_t start = pos_;
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
                while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
                trivia.push_back({TriviaKind::Whitespace, {start, pos_}});
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && peek() != '\n') ++pos_;
                trivia.push_back({TriviaKind::LineComment, {start, pos_}});
            } else if (c == '/' && peek(1) == '*') {
                // Block comments nest.
                pos_ += 2;
                int depth = 1;
                while (depth > 0) {
                    if (pos_ >= src_.size()) return LexError{LexErrorKind::UnterminatedComment, start};
                    if (peek() == '/' && peek(1) == '*') {
                        ++depth;
                        pos_ += 2;
                    } else if (peek() == '*' && peek(1) == '/') {
                        --depth;
                        pos_ += 2;
                    } else {
                        ++pos_;
                    }
                }
                trivia.push_back({TriviaKind::BlockComment, {start, pos_}});
            } else {
                break;
            }
        }
        return std::nullopt;
    }

    Token make(TokenKind kind, std::size_t start) { return Token{kind, {start, pos_}, {}, {}}; }

    Expected<Token, LexError> next_token() {
        std::size_t start = pos_;
        auto c = static_cast<unsigned char>(peek());

        if (c == '@' && peek(1) == '"') {
            pos_ += 2;
            for (;;) {
                if (pos_ >= src_.size()) return unexpected(LexError{LexErrorKind::UnterminatedString, start});
                if (peek() == '"') {
                    if (peek(1) == '"') {
                        pos_ += 2;
                        continue;
                    }
                    ++pos_;
                    return make(TokenKind::String, start);
                }
                ++pos_;
            }
        }
        if (c == '"') {
            ++pos_;
            for (;;) {
                if (pos_ >= src_.size()) return unexpected(LexError{LexErrorKind::UnterminatedString, start});
                char d = peek();
                if (d == '\\') {
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                if (d == '"') return make(TokenKind::String, start);
            }
        }
        if (c == '\'') {
            if (auto len = char_literal_length()) {
                pos_ += *len;
                return make(TokenKind::Char, start);
            }
            ++pos_;
            return make(TokenKind::Operator, start);
        }
        if (is_ident_start(c)) {
            while (pos_ < src_.size() && is_ident_part(static_cast<unsigned char>(peek()))) ++pos_;
            return make(TokenKind::Ident, start);
        }
        if (std::isdigit(c)) {
            if (c == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
                pos_ += 2;
                while (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
            } else {
                while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
                if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                    ++pos_;
                    while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
                }
            }
            return make(TokenKind::Number, start);
        }

        for (auto op : kMultiCharOps) {
            if (src_.substr(pos_, op.size()) == op) {
                pos_ += op.size();
                if (op == ":=") return make(TokenKind::Assign, start);
                if (op == "==") return make(TokenKind::Eq, start);
                if (op == "!=") return make(TokenKind::Neq, start);
                return make(TokenKind::Operator, start);
            }
        }

        ++pos_;
        switch (c) {
            case ';': return make(TokenKind::Semi, start);
            case ',': return make(TokenKind::Comma, start);
            case ':': return make(TokenKind::Colon, start);
            case '(': return make(TokenKind::LParen, start);
            case ')': return make(TokenKind::RParen, start);
            case '{': return make(TokenKind::LBrace, start);
            case '}': return make(TokenKind::RBrace, start);
            case '[': return make(TokenKind::LBracket, start);
            case ']': return make(TokenKind::RBracket, start);
            default: return make(TokenKind::Operator, start);
        }
    }

    // Length of a char literal starting at pos_, if one is there.
    std::optional<std::size_t> char_literal_length() const {
        std::size_t i = pos_ + 1;
        if (i >= src_.size()) return std::nullopt;
        if (src_[i] == '\\') {
            for (std::size_t j = i + 2; j < src_.size() && j < i + 12; ++j) {
                if (src_[j] == '\'') return j + 1 - pos_;
                if (src_[j] == '\n') break;
            }
            return std::nullopt;
        }
        // One UTF-8 encoded code point, then the closing quote.
        auto lead = static_cast<unsigned char>(src_[i]);
        std::size_t width = lead < 0x80 ? 1 : (lead >> 5) == 0x6 ? 2 : (lead >> 4) == 0xE ? 3 : 4;
        if (lead == '\'' || lead == '\n') return std::nullopt;
        if (i + width < src_.size() && src_[i + width] == '\'') return width + 2;
        return std::nullopt;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string LexError::message() const {
    const char* what = kind == LexErrorKind::UnterminatedString ? "unterminated string" : "unterminated comment";
    return std::string(what) + " at offset " + std::to_string(offset);
}

Expected<TokenStream, LexError> tokenize(std::string_view source) { return Lexer(source).run(); }

const char* to_string(TokenKind kind) {
    switch (kind) {
        case TokenKind::Ident: return "IDENT";
        case TokenKind::Number: return "NUMBER";
        case TokenKind::String: return "STRING";
        case TokenKind::Char: return "CHAR";
        case TokenKind::Assign: return "ASSIGN";
        case TokenKind::Eq: return "EQ";
        case TokenKind::Neq: return "NEQ";
        case TokenKind::Semi: return "SEMI";
        case TokenKind::Comma: return "COMMA";
        case TokenKind::Colon: return "COLON";
        case TokenKind::LParen: return "LPAREN";
        case TokenKind::RParen: return "RPAREN";
        case TokenKind::LBrace: return "LBRACE";
        case TokenKind::RBrace: return "RBRACE";
        case TokenKind::LBracket: return "LBRACKET";
        case TokenKind::RBracket: return "RBRACKET";
        case TokenKind::Operator: return "OP";
    }
    return "?";
}

}  // namespace verigrade::syntax
