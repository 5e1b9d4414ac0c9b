#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "verigrade/syntax/parser.hpp"

namespace verigrade::syntax {

namespace {

const std::unordered_set<std::string_view> kDeclStart = {
    "method",   "function",   "predicate", "lemma",     "datatype",  "codatatype",  "class",
    "trait",    "module",     "import",    "const",     "type",      "newtype",     "iterator",
    "ghost",    "static",     "include",   "abstract",  "twostate",  "least",       "greatest",
    "inductive", "copredicate", "colemma", "constructor", "var",     "opaque",      "export",
};

const std::unordered_set<std::string_view> kDeclModifiers = {
    "ghost", "static", "abstract", "twostate", "least", "greatest", "inductive", "opaque",
};

// Identifiers that cannot end an operand, so a following `{` opens a set
// display rather than a block.
const std::unordered_set<std::string_view> kNonOperandWords = {
    "in",     "then",  "else",    "requires", "ensures", "decreases", "invariant", "modifies",
    "reads",  "assert", "assume", "expect",   "if",      "while",     "return",    "print",
    "var",    "by",     "match",  "case",     "calc",    "forall",    "exists",    "new",
    "returns", "notin", "as",     "is",       "old",     "fresh",     "yield",
};

// Statement keywords the parser does not model; they go through the opaque path.
const std::unordered_set<std::string_view> kUnmodelledStmt = {
    "match", "calc", "forall", "label", "break", "continue", "modify", "reveal", "for",
    "new",   "yield", "ghost", "assert", "assume", "expect", "if", "while", "return", "print", "var",
};

const std::unordered_set<std::string_view> kStmtStart = {
    "assert", "assume", "expect", "var", "if", "while", "return", "print", "match", "calc",
    "forall", "label", "break", "continue", "modify", "reveal", "for", "ghost",
};

struct Failure {};

class Parser {
public:
    Parser(std::string_view src, TokenStream ts) : src_(src), ts_(std::move(ts)), toks_(ts_.tokens) {}

    Expected<ProgramUnit, ParseError> run() {
        if (auto err = compute_matches()) return unexpected(*err);
        ProgramUnit unit;
        std::size_t i = 0;
        unit.declarations = parse_decls(i, toks_.size());
        unit.trailing = std::string(text_of(ts_.trailing));
        return unit;
    }

private:
    // ---- token helpers ----

    std::string_view text_of(SourceRange r) const { return src_.substr(r.begin, r.size()); }
    std::string_view text(std::size_t i) const { return i < toks_.size() ? text_of(toks_[i].range) : ""; }
    TokenKind kind(std::size_t i) const { return toks_[i].kind; }
    bool is(std::size_t i, std::string_view word) const {
        return i < toks_.size() && toks_[i].kind == TokenKind::Ident && text(i) == word;
    }
    bool is_opener(std::size_t i) const {
        auto k = toks_[i].kind;
        return k == TokenKind::LParen || k == TokenKind::LBracket || k == TokenKind::LBrace;
    }

    std::optional<ParseError> compute_matches() {
        match_.assign(toks_.size(), 0);
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            auto k = toks_[i].kind;
            if (is_opener(i)) {
                stack.push_back(i);
            } else if (k == TokenKind::RParen || k == TokenKind::RBracket || k == TokenKind::RBrace) {
                auto want = k == TokenKind::RParen ? TokenKind::LParen
                            : k == TokenKind::RBracket ? TokenKind::LBracket
                                                       : TokenKind::LBrace;
                if (stack.empty() || toks_[stack.back()].kind != want) {
                    return ParseError{ParseErrorKind::UnbalancedDelimiters, toks_[i].range.begin,
                                      "unbalanced '" + std::string(text(i)) + "' at offset " +
                                          std::to_string(toks_[i].range.begin)};
                }
                match_[stack.back()] = i;
                stack.pop_back();
            }
        }
        if (!stack.empty()) {
            auto off = toks_[stack.front()].range.begin;
            return ParseError{ParseErrorKind::UnbalancedDelimiters, off,
                              "unclosed '" + std::string(text(stack.front())) + "' at offset " + std::to_string(off)};
        }
        return std::nullopt;
    }

    // Index just past token i, or past its whole group if it opens one.
    std::size_t skip(std::size_t i) const { return is_opener(i) ? match_[i] + 1 : i + 1; }

    Piece piece(std::size_t first, std::size_t last_excl) const {
        Piece p;
        p.trivia = std::string(text_of(toks_[first].leading));
        SourceRange r{toks_[first].range.begin, toks_[last_excl - 1].range.end};
        p.text = std::string(text_of(r));
        p.range = r;
        return p;
    }
    Piece piece(std::size_t i) const { return piece(i, i + 1); }

    ExprSpan span(std::size_t first, std::size_t last_excl) const {
        if (last_excl <= first) throw Failure{};
        auto p = piece(first, last_excl);
        return ExprSpan{std::move(p.trivia), std::move(p.text), p.range};
    }

    SourceRange range(std::size_t first, std::size_t last_excl) const {
        return {toks_[first].range.begin, toks_[last_excl - 1].range.end};
    }

    bool is_decl_start(std::size_t i) const {
        return i < toks_.size() && kind(i) == TokenKind::Ident && kDeclStart.count(text(i));
    }

    // Whether a `{` at i opens a block (true) or a set/map display (false).
    bool is_block_open(std::size_t i) const {
        if (kind(i) != TokenKind::LBrace) return false;
        if (i == 0) return true;
        std::size_t p = i - 1;
        switch (kind(p)) {
            case TokenKind::Ident: return !kNonOperandWords.count(text(p));
            case TokenKind::Number:
            case TokenKind::String:
            case TokenKind::Char:
            case TokenKind::RParen:
            case TokenKind::RBracket:
            case TokenKind::RBrace: return true;
            case TokenKind::Operator:
                if (text(p) == ">") return true;
                if (text(p) == "*" && p > 0)
                    return is(p - 1, "decreases") || is(p - 1, "while") || is(p - 1, "if");
                return false;
            default: return false;
        }
    }

    static std::optional<ClauseKind> clause_kind(std::string_view w) {
        if (w == "requires") return ClauseKind::Requires;
        if (w == "ensures") return ClauseKind::Ensures;
        if (w == "decreases") return ClauseKind::Decreases;
        if (w == "invariant") return ClauseKind::Invariant;
        if (w == "modifies") return ClauseKind::Modifies;
        if (w == "reads") return ClauseKind::Reads;
        return std::nullopt;
    }
    std::optional<ClauseKind> clause_at(std::size_t i) const {
        if (i >= toks_.size() || kind(i) != TokenKind::Ident) return std::nullopt;
        return clause_kind(text(i));
    }

    // ---- declarations ----

    std::vector<Decl> parse_decls(std::size_t& i, std::size_t end) {
        std::vector<Decl> out;
        while (i < end) {
            std::size_t start = i;
            try {
                out.push_back(parse_structured_decl(i, end));
            } catch (const Failure&) {
                i = start;
                out.push_back(parse_opaque_decl(i, end));
            }
        }
        return out;
    }

    Decl parse_opaque_decl(std::size_t& i, std::size_t end) {
        std::size_t j = i;
        while (j < end && kind(j) == TokenKind::Ident && kDeclModifiers.count(text(j))) ++j;
        if (j < end && is_decl_start(j)) {
            bool fn = is(j, "function") || is(j, "predicate");
            ++j;
            if (fn && is(j, "method")) ++j;
        }
        if (j == i) j = skip(j);
        while (j < end && !is_decl_start(j)) j = skip(j);
        Decl d;
        d.kind = DeclKind::Opaque;
        d.keywords.push_back(piece(i, j));
        d.range = range(i, j);
        i = j;
        return d;
    }

    Decl parse_structured_decl(std::size_t& i, std::size_t end) {
        if (is(i, "method")) return parse_callable(i, end, DeclKind::Method);
        if (is(i, "function")) {
            return parse_callable(i, end, is(i + 1, "method") ? DeclKind::FunctionMethod : DeclKind::Function);
        }
        if (is(i, "predicate")) return parse_callable(i, end, DeclKind::Predicate);
        if (is(i, "datatype") || is(i, "codatatype")) return parse_datatype(i, end);
        if (is(i, "class") || is(i, "trait") || is(i, "module")) return parse_container(i, end);
        throw Failure{};
    }

    std::size_t expect_ident(std::size_t i, std::size_t end) const {
        if (i >= end || kind(i) != TokenKind::Ident || kDeclStart.count(text(i)) || clause_kind(text(i)))
            throw Failure{};
        return i;
    }

    // End of a token run that stops at clause keywords, block openers and
    // declaration boundaries.
    std::size_t scan_spec_run(std::size_t j, std::size_t end) const {
        while (j < end) {
            if (clause_at(j) || is_decl_start(j)) break;
            if (kind(j) == TokenKind::LBrace && is_block_open(j)) break;
            j = skip(j);
        }
        return j;
    }

    std::vector<Param> parse_params(std::size_t lo, std::size_t hi) const {
        std::vector<Param> out;
        std::size_t j = lo;
        while (j < hi) {
            std::size_t seg_end = j;
            while (seg_end < hi && kind(seg_end) != TokenKind::Comma) seg_end = skip(seg_end);
            Param p;
            std::size_t k = j;
            while (k < seg_end && (is(k, "ghost") || is(k, "new") || is(k, "nameless") || is(k, "older") ||
                                   is(k, "linear"))) {
                if (is(k, "ghost")) p.ghost = true;
                ++k;
            }
            std::size_t colon = k;
            while (colon < seg_end && kind(colon) != TokenKind::Colon) colon = skip(colon);
            if (colon < seg_end && colon > k) {
                p.name = std::string(text_of(range(k, colon)));
                std::size_t type_end = colon + 1;
                while (type_end < seg_end && kind(type_end) != TokenKind::Assign) type_end = skip(type_end);
                if (type_end > colon + 1) p.type_text = std::string(text_of(range(colon + 1, type_end)));
            } else if (k < seg_end) {
                p.type_text = std::string(text_of(range(k, seg_end)));
            }
            if (k < seg_end) out.push_back(std::move(p));
            j = seg_end < hi ? seg_end + 1 : seg_end;
        }
        return out;
    }

    Decl parse_callable(std::size_t& i, std::size_t end, DeclKind dk) {
        Decl d;
        d.kind = dk;
        std::size_t start = i;
        std::size_t j = i;
        d.keywords.push_back(piece(j++));
        if ((dk == DeclKind::FunctionMethod) || (dk == DeclKind::Predicate && is(j, "method"))) {
            d.keywords.push_back(piece(j++));
        }
        j = expect_ident(j, end);
        d.name = std::string(text(j));
        d.name_piece = piece(j++);

        if (j < end && text(j) == "<") {
            std::size_t k = j;
            while (k < end && kind(k) != TokenKind::LParen) {
                if (kind(k) == TokenKind::LBrace || kind(k) == TokenKind::Semi) throw Failure{};
                k = skip(k);
            }
            if (k >= end) throw Failure{};
            d.type_params = piece(j, k);
            j = k;
        }
        if (j >= end || kind(j) != TokenKind::LParen) throw Failure{};
        d.params_text = piece(j, match_[j] + 1);
        d.params = parse_params(j + 1, match_[j]);
        j = match_[j] + 1;

        if (dk == DeclKind::Method) {
            if (is(j, "returns")) {
                d.returns_keyword = piece(j++);
                if (j >= end || kind(j) != TokenKind::LParen) throw Failure{};
                d.returns_text = piece(j, match_[j] + 1);
                d.returns = parse_params(j + 1, match_[j]);
                j = match_[j] + 1;
            }
        } else if (j < end && kind(j) == TokenKind::Colon) {
            d.returns_keyword = piece(j++);
            std::size_t k = scan_spec_run(j, end);
            if (k == j) throw Failure{};
            d.returns_text = piece(j, k);
            d.result_type = d.returns_text->text;
            j = k;
        } else if (dk != DeclKind::Predicate) {
            throw Failure{};
        }

        d.clauses = parse_clauses(j, end, /*in_loop=*/false);

        if (j < end && kind(j) == TokenKind::LBrace) {
            if (dk == DeclKind::Method) {
                d.body = parse_block(j);
            } else {
                std::size_t close = match_[j];
                FunctionBody fb{piece(j), span(j + 1, close), piece(close)};
                d.function_body = std::move(fb);
                j = close + 1;
            }
        }
        if (j < end && !is_decl_start(j)) throw Failure{};
        d.range = range(start, j);
        i = j;
        return d;
    }

    std::vector<Clause> parse_clauses(std::size_t& j, std::size_t end, bool in_loop) {
        std::vector<Clause> out;
        while (auto ck = clause_at(j)) {
            if (in_loop && *ck != ClauseKind::Invariant && *ck != ClauseKind::Decreases && *ck != ClauseKind::Modifies)
                break;
            Clause c;
            c.kind = *ck;
            c.keyword = piece(j++);
            std::size_t k = scan_spec_run(j, end);
            c.body = span(j, k);
            if (c.kind == ClauseKind::Decreases || c.kind == ClauseKind::Modifies || c.kind == ClauseKind::Reads) {
                std::size_t a = j;
                while (a < k) {
                    std::size_t b = a;
                    while (b < k && kind(b) != TokenKind::Comma) b = skip(b);
                    if (b > a) c.items.push_back(span(a, b));
                    a = b < k ? b + 1 : b;
                }
            } else {
                c.items.push_back(c.body);
            }
            j = k;
            out.push_back(std::move(c));
        }
        return out;
    }

    Decl parse_datatype(std::size_t& i, std::size_t end) {
        Decl d;
        d.kind = DeclKind::Datatype;
        std::size_t j = i + 1;
        j = expect_ident(j, end);
        d.name = std::string(text(j));
        std::size_t eq = j + 1;
        while (eq < end && !is_decl_start(eq) && text(eq) != "=") eq = skip(eq);
        if (eq >= end || text(eq) != "=") throw Failure{};
        std::size_t stop = eq + 1;
        while (stop < end && !is_decl_start(stop)) stop = skip(stop);
        // Constructors: `|`-separated alternatives, up to any member block.
        std::size_t a = eq + 1;
        while (a < stop) {
            while (a < stop && kind(a) == TokenKind::Ident && (text(a) == "ghost")) ++a;
            if (a < stop && kind(a) == TokenKind::Ident) d.constructors.emplace_back(text(a));
            while (a < stop && text(a) != "|" && kind(a) != TokenKind::LBrace) a = skip(a);
            if (a < stop && kind(a) == TokenKind::LBrace) break;
            if (a < stop) ++a;
        }
        d.keywords.push_back(piece(i, stop));
        d.range = range(i, stop);
        i = stop;
        return d;
    }

    Decl parse_container(std::size_t& i, std::size_t end) {
        Decl d;
        d.kind = DeclKind::Opaque;
        std::size_t j = i + 1;
        if (j < end && kind(j) == TokenKind::Ident) d.name = std::string(text(j));
        while (j < end && kind(j) != TokenKind::LBrace) {
            if (is_decl_start(j) || kind(j) == TokenKind::Semi) throw Failure{};
            j = skip(j);
        }
        if (j >= end) throw Failure{};
        std::size_t close = match_[j];
        d.keywords.push_back(piece(i, j + 1));
        std::size_t k = j + 1;
        d.members = parse_decls(k, close);
        d.members_close = piece(close);
        d.range = range(i, close + 1);
        i = close + 1;
        if (i < end && !is_decl_start(i)) throw Failure{};
        return d;
    }

    // ---- statements ----

    Block parse_block(std::size_t& j) {
        if (kind(j) != TokenKind::LBrace) throw Failure{};
        std::size_t close = match_[j];
        Block b;
        b.open = piece(j);
        std::size_t k = j + 1;
        b.stmts = parse_stmts(k, close);
        b.close = piece(close);
        j = close + 1;
        return b;
    }

    std::vector<Stmt> parse_stmts(std::size_t& i, std::size_t end) {
        std::vector<Stmt> out;
        while (i < end) {
            std::size_t start = i;
            try {
                out.push_back(parse_stmt(i, end));
            } catch (const Failure&) {
                i = start;
                out.push_back(parse_opaque_stmt(i, end));
            }
        }
        return out;
    }

    std::size_t find_semi(std::size_t j, std::size_t end) const {
        while (j < end && kind(j) != TokenKind::Semi) j = skip(j);
        if (j >= end) throw Failure{};
        return j;
    }

    Stmt parse_stmt(std::size_t& i, std::size_t end) {
        std::size_t start = i;
        Stmt s;
        auto finish = [&](std::size_t j) {
            s.range = range(start, j);
            i = j;
            return s;
        };

        if (is(i, "assert") || is(i, "assume") || is(i, "expect")) {
            s.kind = is(i, "assert") ? StmtKind::Assert : is(i, "assume") ? StmtKind::Assume : StmtKind::Expect;
            std::size_t semi = find_semi(i + 1, end);
            for (std::size_t k = i + 1; k < semi; k = skip(k))
                if (is(k, "by")) throw Failure{};
            s.head = piece(i);
            std::size_t expr_end = semi;
            if (s.kind == StmtKind::Expect && semi >= i + 4 && kind(semi - 1) == TokenKind::String &&
                kind(semi - 2) == TokenKind::Comma) {
                expr_end = semi - 2;
                s.message_comma = piece(semi - 2);
                s.message = span(semi - 1, semi);
            }
            s.expr = span(i + 1, expr_end);
            s.tail = piece(semi);
            return finish(semi + 1);
        }
        if (is(i, "var") || (is(i, "ghost") && is(i + 1, "var"))) {
            std::size_t semi = find_semi(i + 1, end);
            s.kind = StmtKind::VarDecl;
            s.head = piece(i, semi + 1);
            return finish(semi + 1);
        }
        if (is(i, "print")) {
            std::size_t semi = find_semi(i + 1, end);
            s.kind = StmtKind::Print;
            s.head = piece(i, semi + 1);
            return finish(semi + 1);
        }
        if (is(i, "return")) {
            std::size_t semi = find_semi(i + 1, end);
            s.kind = StmtKind::Return;
            s.head = piece(i);
            if (semi > i + 1) s.expr = span(i + 1, semi);
            s.tail = piece(semi);
            return finish(semi + 1);
        }
        if (is(i, "if")) return finish(parse_if(s, i, end));
        if (is(i, "while")) {
            s.kind = StmtKind::While;
            s.head = piece(i);
            std::size_t j = i + 1;
            std::size_t g = j;
            while (g < end && !clause_at(g) && !(kind(g) == TokenKind::LBrace && is_block_open(g))) {
                if (kind(g) == TokenKind::Semi) throw Failure{};
                g = skip(g);
            }
            s.expr = span(j, g);
            j = g;
            s.clauses = parse_clauses(j, end, /*in_loop=*/true);
            if (j >= end || kind(j) != TokenKind::LBrace) throw Failure{};
            s.blocks.push_back(parse_block(j));
            return finish(j);
        }
        if (kind(i) == TokenKind::LBrace) {
            s.kind = StmtKind::Block;
            std::size_t j = i;
            s.blocks.push_back(parse_block(j));
            return finish(j);
        }
        if (kind(i) == TokenKind::Ident && kUnmodelledStmt.count(text(i))) throw Failure{};

        std::size_t semi = find_semi(i, end);
        bool assign = false, call = false;
        for (std::size_t k = i; k < semi; k = skip(k)) {
            if (kind(k) == TokenKind::Assign || text(k) == ":|") assign = true;
            if (kind(k) == TokenKind::LParen) call = true;
        }
        if (kind(i) != TokenKind::Ident) throw Failure{};
        s.kind = assign ? StmtKind::Assign : call ? StmtKind::Call : StmtKind::Opaque;
        s.head = piece(i, semi + 1);
        return finish(semi + 1);
    }

    std::size_t parse_if(Stmt& s, std::size_t i, std::size_t end) {
        s.kind = StmtKind::If;
        s.head = piece(i);
        std::size_t g = i + 1;
        while (g < end && !(kind(g) == TokenKind::LBrace && is_block_open(g))) {
            if (kind(g) == TokenKind::Semi) throw Failure{};
            g = skip(g);
        }
        if (g >= end) throw Failure{};
        s.expr = span(i + 1, g);
        std::size_t j = g;
        s.blocks.push_back(parse_block(j));
        if (is(j, "else")) {
            s.else_keyword = piece(j++);
            if (is(j, "if")) {
                Stmt nested;
                std::size_t nested_start = j;
                j = parse_if(nested, j, end);
                nested.range = range(nested_start, j);
                Block b;
                b.braced = false;
                b.stmts.push_back(std::move(nested));
                s.blocks.push_back(std::move(b));
            } else if (j < end && kind(j) == TokenKind::LBrace) {
                s.blocks.push_back(parse_block(j));
            } else {
                throw Failure{};
            }
        }
        return j;
    }

    Stmt parse_opaque_stmt(std::size_t& i, std::size_t end) {
        std::size_t j = i;
        while (j < end) {
            if (kind(j) == TokenKind::Semi) {
                ++j;
                break;
            }
            bool brace = kind(j) == TokenKind::LBrace;
            j = skip(j);
            if (brace && (j >= end || (kind(j) == TokenKind::Ident && kStmtStart.count(text(j))))) break;
        }
        Stmt s;
        s.kind = StmtKind::Opaque;
        s.head = piece(i, j);
        s.range = range(i, j);
        i = j;
        return s;
    }

    std::string_view src_;
    TokenStream ts_;
    const std::vector<Token>& toks_;
    std::vector<std::size_t> match_;
};

void append(std::string& out, const Piece& p) {
    out += p.trivia;
    out += p.text;
}
void append(std::string& out, const ExprSpan& e) {
    out += e.trivia;
    out += e.text;
}
void append(std::string& out, const std::optional<Piece>& p) {
    if (p) append(out, *p);
}

void emit_into(std::string& out, const Block& b);

void emit_into(std::string& out, const Clause& c) {
    append(out, c.keyword);
    append(out, c.body);
}

void emit_into(std::string& out, const Stmt& s) {
    switch (s.kind) {
        case StmtKind::Assert:
        case StmtKind::Assume:
        case StmtKind::Expect:
        case StmtKind::Return:
            append(out, s.head);
            if (s.expr) append(out, *s.expr);
            append(out, s.message_comma);
            if (s.message) append(out, *s.message);
            append(out, s.tail);
            break;
        case StmtKind::If:
            append(out, s.head);
            append(out, *s.expr);
            emit_into(out, s.blocks.at(0));
            append(out, s.else_keyword);
            if (s.blocks.size() > 1) emit_into(out, s.blocks[1]);
            break;
        case StmtKind::While:
            append(out, s.head);
            append(out, *s.expr);
            for (const auto& c : s.clauses) emit_into(out, c);
            emit_into(out, s.blocks.at(0));
            break;
        case StmtKind::Block:
            emit_into(out, s.blocks.at(0));
            break;
        default:
            append(out, s.head);
            break;
    }
}

void emit_into(std::string& out, const Block& b) {
    append(out, b.open);
    for (const auto& s : b.stmts) emit_into(out, s);
    append(out, b.close);
}

void emit_into(std::string& out, const Decl& d) {
    for (const auto& k : d.keywords) append(out, k);
    if (d.kind == DeclKind::Opaque || d.kind == DeclKind::Datatype) {
        for (const auto& m : d.members) emit_into(out, m);
        append(out, d.members_close);
        return;
    }
    append(out, d.name_piece);
    append(out, d.type_params);
    append(out, d.params_text);
    append(out, d.returns_keyword);
    append(out, d.returns_text);
    for (const auto& c : d.clauses) emit_into(out, c);
    if (d.body) emit_into(out, *d.body);
    if (d.function_body) {
        append(out, d.function_body->open);
        append(out, d.function_body->expr);
        append(out, d.function_body->close);
    }
}

template <typename T>
std::string emit_one(const T& node) {
    std::string out;
    emit_into(out, node);
    return out;
}

template <typename DeclT, typename Range>
DeclT* find_in(Range& decls, std::string_view name) {
    for (auto& d : decls) {
        if (d.kind != DeclKind::Opaque && d.name == name) return &d;
        if (auto* m = find_in<DeclT>(d.members, name)) return m;
    }
    return nullptr;
}

}  // namespace

Expected<ProgramUnit, ParseError> parse_unit(std::string_view source) {
    auto ts = tokenize(source);
    if (!ts) {
        const auto& e = ts.error();
        auto kind = e.kind == LexErrorKind::UnterminatedString ? ParseErrorKind::UnterminatedString
                                                               : ParseErrorKind::UnterminatedComment;
        return unexpected(ParseError{kind, e.offset, e.message()});
    }
    return Parser(source, std::move(*ts)).run();
}

std::string emit(const ProgramUnit& unit) {
    std::string out;
    for (const auto& d : unit.declarations) emit_into(out, d);
    out += unit.trailing;
    return out;
}
std::string emit(const Decl& decl) { return emit_one(decl); }
std::string emit(const Stmt& stmt) { return emit_one(stmt); }
std::string emit(const Block& block) { return emit_one(block); }
std::string emit(const Clause& clause) { return emit_one(clause); }

SpecClauses extract_spec(const Decl& decl) {
    SpecClauses spec;
    for (const auto& c : decl.clauses) {
        switch (c.kind) {
            case ClauseKind::Requires: spec.preconditions.push_back(c.body); break;
            case ClauseKind::Ensures: spec.postconditions.push_back(c.body); break;
            case ClauseKind::Decreases:
                spec.decreases.insert(spec.decreases.end(), c.items.begin(), c.items.end());
                break;
            case ClauseKind::Modifies:
            case ClauseKind::Reads: spec.modifies_reads.push_back(c.body); break;
            case ClauseKind::Invariant: break;
        }
    }
    return spec;
}

const Decl* find_decl(const ProgramUnit& unit, std::string_view name) {
    return find_in<const Decl>(unit.declarations, name);
}
Decl* find_decl(ProgramUnit& unit, std::string_view name) { return find_in<Decl>(unit.declarations, name); }

bool token_equivalent(std::string_view a, std::string_view b) {
    auto ta = tokenize(a);
    auto tb = tokenize(b);
    if (!ta || !tb) return false;
    if (ta->tokens.size() != tb->tokens.size()) return false;
    for (std::size_t i = 0; i < ta->tokens.size(); ++i) {
        const auto& x = ta->tokens[i];
        const auto& y = tb->tokens[i];
        if (x.kind != y.kind) return false;
        if (a.substr(x.range.begin, x.range.size()) != b.substr(y.range.begin, y.range.size())) return false;
    }
    return true;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += c;
        }
    }
    return out;
}

const char* to_string(StmtKind kind) {
    switch (kind) {
        case StmtKind::Assert: return "Assert";
        case StmtKind::Assume: return "Assume";
        case StmtKind::Expect: return "Expect";
        case StmtKind::VarDecl: return "VarDecl";
        case StmtKind::Assign: return "Assign";
        case StmtKind::Call: return "Call";
        case StmtKind::If: return "If";
        case StmtKind::While: return "While";
        case StmtKind::Return: return "Return";
        case StmtKind::Print: return "Print";
        case StmtKind::Block: return "Block";
        case StmtKind::Opaque: return "Opaque";
    }
    return "?";
}

const char* to_string(DeclKind kind) {
    switch (kind) {
        case DeclKind::Method: return "Method";
        case DeclKind::FunctionMethod: return "FunctionMethod";
        case DeclKind::Function: return "Function";
        case DeclKind::Predicate: return "Predicate";
        case DeclKind::Datatype: return "Datatype";
        case DeclKind::Opaque: return "Opaque";
    }
    return "?";
}

const char* to_string(ClauseKind kind) {
    switch (kind) {
        case ClauseKind::Requires: return "requires";
        case ClauseKind::Ensures: return "ensures";
        case ClauseKind::Decreases: return "decreases";
        case ClauseKind::Invariant: return "invariant";
        case ClauseKind::Modifies: return "modifies";
        case ClauseKind::Reads: return "reads";
    }
    return "?";
}

}  // namespace verigrade::syntax
