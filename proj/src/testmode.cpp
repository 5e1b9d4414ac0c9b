#include "verigrade/testmode.hpp"

#include <set>

#include "verigrade/syntax/parser.hpp"

namespace verigrade::testmode {

using namespace syntax;

const char* to_string(SkipReason r) {
    switch (r) {
        case SkipReason::UnsupportedOld: return "UnsupportedOld";
        case SkipReason::FunctionEnsures: return "FunctionEnsures";
        case SkipReason::FunctionRequires: return "FunctionRequires";
        case SkipReason::NoBody: return "NoBody";
        case SkipReason::Disabled: return "Disabled";
    }
    return "?";
}

namespace {

struct OldRewrite {
    bool ok = true;
    std::string text;
    std::set<std::string> snapshots;
};

// old(p) over a bare parameter p becomes p__old; anything else is unsupported.
OldRewrite rewrite_old(std::string_view text, const std::set<std::string>& params) {
    OldRewrite r;
    auto ts = tokenize(text);
    if (!ts) {
        r.ok = false;
        return r;
    }
    const auto& t = ts->tokens;
    auto tok = [&](std::size_t i) { return text.substr(t[i].range.begin, t[i].range.size()); };
    std::size_t pos = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].kind != TokenKind::Ident || tok(i) != "old") continue;
        if (i + 3 < t.size() && t[i + 1].kind == TokenKind::LParen && t[i + 2].kind == TokenKind::Ident &&
            t[i + 3].kind == TokenKind::RParen && params.count(std::string(tok(i + 2)))) {
            std::string p(tok(i + 2));
            r.text.append(text.substr(pos, t[i].range.begin - pos));
            r.text += p + "__old";
            pos = t[i + 3].range.end;
            r.snapshots.insert(p);
            i += 3;
            continue;
        }
        r.ok = false;
        return r;
    }
    r.text.append(text.substr(pos));
    return r;
}

std::string indent_of(const std::string& trivia) {
    auto nl = trivia.rfind('\n');
    if (nl == std::string::npos) return {};
    std::string out;
    for (std::size_t i = nl + 1; i < trivia.size() && (trivia[i] == ' ' || trivia[i] == '\t'); ++i) out += trivia[i];
    return out;
}

// Separator for a statement placed next to one whose leading trivia is given.
std::string separator_like(const std::string& trivia) {
    if (trivia.find('\n') == std::string::npos) return " ";
    return "\n" + indent_of(trivia);
}

bool has_comment(const std::string& trivia) {
    return trivia.find("//") != std::string::npos || trivia.find("/*") != std::string::npos;
}

// Comments in the trivia of a removed clause, without trailing whitespace.
std::string kept_comments(const std::string& trivia) {
    if (!has_comment(trivia)) return {};
    auto end = trivia.find_last_not_of(" \t\r\n");
    return trivia.substr(0, end + 1);
}

std::string& lead_trivia(Stmt& s) { return s.kind == StmtKind::Block ? s.blocks.at(0).open.trivia : s.head.trivia; }

Stmt make_expect(std::string trivia, std::string expr) {
    Stmt s;
    s.kind = StmtKind::Expect;
    s.head = Piece{std::move(trivia), "expect", std::nullopt};
    s.expr = ExprSpan{" ", std::move(expr), std::nullopt};
    s.tail = Piece{"", ";", std::nullopt};
    return s;
}

Stmt make_plain(StmtKind kind, std::string trivia, std::string text) {
    Stmt s;
    s.kind = kind;
    s.head = Piece{std::move(trivia), std::move(text), std::nullopt};
    return s;
}

// Inserts `fresh` before `anchor`, moving the anchor's leading trivia to the first new statement.
void insert_before(std::vector<Stmt>& out, std::vector<Stmt> fresh, Stmt anchor) {
    if (fresh.empty()) {
        out.push_back(std::move(anchor));
        return;
    }
    auto& lead = lead_trivia(anchor);
    auto sep = separator_like(lead);
    fresh.front().head.trivia = lead;
    for (std::size_t i = 1; i < fresh.size(); ++i) fresh[i].head.trivia = sep;
    lead = sep;
    for (auto& f : fresh) out.push_back(std::move(f));
    out.push_back(std::move(anchor));
}

void append_to_block(Block& b, std::vector<Stmt> fresh) {
    if (fresh.empty()) return;
    std::string sep;
    if (!b.stmts.empty()) {
        sep = separator_like(lead_trivia(b.stmts.back()));
    } else if (b.close.trivia.find('\n') != std::string::npos) {
        sep = "\n" + indent_of(b.close.trivia) + "  ";
    } else {
        sep = " ";
    }
    for (auto& f : fresh) {
        f.head.trivia = sep;
        b.stmts.push_back(std::move(f));
    }
}

void prepend_to_block(Block& b, std::vector<Stmt> fresh) {
    if (fresh.empty()) return;
    if (b.stmts.empty()) {
        append_to_block(b, std::move(fresh));
        return;
    }
    std::vector<Stmt> out;
    auto rest = std::move(b.stmts);
    insert_before(out, std::move(fresh), std::move(rest.front()));
    for (std::size_t i = 1; i < rest.size(); ++i) out.push_back(std::move(rest[i]));
    b.stmts = std::move(out);
}

std::vector<Stmt> expects(const std::vector<std::string>& exprs) {
    std::vector<Stmt> out;
    for (const auto& e : exprs) out.push_back(make_expect("", e));
    return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

struct MethodContext {
    const TransformOptions& opts;
    std::set<std::string> params;
    std::vector<std::string> outs;
    std::vector<std::string> post;  // rewritten ensures
    std::set<std::string> snapshots;
};

// Removes the clauses for which `take` returns true, keeping their comments.
// Returns the comments that must precede whatever follows the last clause.
template <typename Pred>
std::string drop_clauses(std::vector<Clause>& clauses, Pred take) {
    std::vector<Clause> kept;
    std::string carry;
    for (auto& c : clauses) {
        if (take(c)) {
            carry += kept_comments(c.keyword.trivia);
        } else {
            c.keyword.trivia = carry + c.keyword.trivia;
            carry.clear();
            kept.push_back(std::move(c));
        }
    }
    clauses = std::move(kept);
    return carry;
}

void process_block(Block& b, MethodContext& ctx);

void process_stmt(Stmt s, std::vector<Stmt>& out, MethodContext& ctx) {
    const auto& o = ctx.opts;
    switch (s.kind) {
        case StmtKind::Assert:
        case StmtKind::Assume:
            if ((s.kind == StmtKind::Assert && o.check_asserts) || (s.kind == StmtKind::Assume && o.check_assumes)) {
                s.kind = StmtKind::Expect;
                s.head.text = "expect";
            }
            out.push_back(std::move(s));
            return;
        case StmtKind::If:
        case StmtKind::Block:
            for (auto& b : s.blocks) process_block(b, ctx);
            out.push_back(std::move(s));
            return;
        case StmtKind::While: {
            process_block(s.blocks.at(0), ctx);
            std::vector<std::string> inv;
            if (o.check_invariants) {
                auto carry = drop_clauses(s.clauses, [&](const Clause& c) {
                    if (c.kind != ClauseKind::Invariant) return false;
                    auto r = rewrite_old(c.body.text, ctx.params);
                    if (!r.ok) return false;
                    inv.push_back(r.text);
                    ctx.snapshots.insert(r.snapshots.begin(), r.snapshots.end());
                    return true;
                });
                s.blocks.at(0).open.trivia = carry + s.blocks.at(0).open.trivia;
            }
            append_to_block(s.blocks.at(0), expects(inv));
            insert_before(out, expects(inv), std::move(s));
            return;
        }
        case StmtKind::Return: {
            if (ctx.post.empty()) break;
            std::vector<Stmt> fresh;
            if (s.expr && !ctx.outs.empty()) {
                fresh.push_back(make_plain(StmtKind::Assign, "", join(ctx.outs, ", ") + " :=" + s.expr->trivia +
                                                                     s.expr->text + ";"));
                s.expr.reset();
            }
            for (auto& e : expects(ctx.post)) fresh.push_back(std::move(e));
            insert_before(out, std::move(fresh), std::move(s));
            return;
        }
        default: break;
    }
    out.push_back(std::move(s));
}

void process_block(Block& b, MethodContext& ctx) {
    std::vector<Stmt> out;
    for (auto& s : b.stmts) process_stmt(std::move(s), out, ctx);
    b.stmts = std::move(out);
}

void transform_method(Decl& d, const TransformOptions& opts) {
    if (!d.body) return;
    MethodContext ctx{opts, {}, {}, {}, {}};
    for (const auto& p : d.params)
        if (!p.name.empty()) ctx.params.insert(p.name);
    for (const auto& r : d.returns)
        if (!r.name.empty()) ctx.outs.push_back(r.name);

    std::vector<std::string> pre;
    auto carry = drop_clauses(d.clauses, [&](const Clause& c) {
        if (c.kind == ClauseKind::Requires && opts.check_requires) {
            pre.push_back(c.body.text);
            return true;
        }
        if (c.kind == ClauseKind::Ensures && opts.check_ensures) {
            auto r = rewrite_old(c.body.text, ctx.params);
            if (!r.ok) return false;
            ctx.post.push_back(r.text);
            ctx.snapshots.insert(r.snapshots.begin(), r.snapshots.end());
            return true;
        }
        return false;
    });
    Block& body = *d.body;
    body.open.trivia = carry + body.open.trivia;

    process_block(body, ctx);
    if (body.stmts.empty() || body.stmts.back().kind != StmtKind::Return) append_to_block(body, expects(ctx.post));

    auto entry = expects(pre);
    for (const auto& p : ctx.snapshots)
        entry.push_back(make_plain(StmtKind::VarDecl, "", "var " + p + "__old := " + p + ";"));
    prepend_to_block(body, std::move(entry));
}

void transform_decl(Decl& d, const TransformOptions& opts) {
    if (d.kind == DeclKind::Method) transform_method(d, opts);
    for (auto& m : d.members) transform_decl(m, opts);
}

// --- reporting ---

void tally(const std::vector<Stmt>& stmts, RewriteCounts& c) {
    for (const auto& s : stmts) {
        if (s.kind == StmtKind::Assert) ++c.asserts;
        if (s.kind == StmtKind::Assume) ++c.assumes;
        for (const auto& cl : s.clauses)
            if (cl.kind == ClauseKind::Invariant) ++c.invariants;
        for (const auto& b : s.blocks) tally(b.stmts, c);
    }
}

void tally(const Decl& d, RewriteCounts& c) {
    if (d.kind == DeclKind::Method) {
        for (const auto& cl : d.clauses) {
            if (cl.kind == ClauseKind::Requires) ++c.preconditions;
            if (cl.kind == ClauseKind::Ensures) ++c.postconditions;
        }
        if (d.body) tally(d.body->stmts, c);
    }
    for (const auto& m : d.members) tally(m, c);
}

RewriteCounts tally(const ProgramUnit& u) {
    RewriteCounts c;
    for (const auto& d : u.declarations) tally(d, c);
    return c;
}

SkippedClause skipped(SkipReason r, const Clause& c, const std::string& name) {
    std::optional<std::size_t> off;
    if (c.keyword.range) off = c.keyword.range->begin;
    return {r, c.kind, name, c.body.text, off};
}

std::set<std::string> param_names(const Decl& d) {
    std::set<std::string> out;
    for (const auto& p : d.params)
        if (!p.name.empty()) out.insert(p.name);
    return out;
}

SkipReason leftover_reason(bool enabled, const Clause& c, const std::set<std::string>& params) {
    if (!enabled) return SkipReason::Disabled;
    return rewrite_old(c.body.text, params).ok ? SkipReason::Disabled : SkipReason::UnsupportedOld;
}

void explain_loops(const std::vector<Stmt>& stmts, const Decl& d, const TransformOptions& opts,
                   std::vector<SkippedClause>& out) {
    for (const auto& s : stmts) {
        for (const auto& c : s.clauses)
            if (c.kind == ClauseKind::Invariant)
                out.push_back(skipped(leftover_reason(opts.check_invariants, c, param_names(d)), c, d.name));
        for (const auto& b : s.blocks) explain_loops(b.stmts, d, opts, out);
    }
}

void explain(const Decl& d, const TransformOptions& opts, std::vector<SkippedClause>& out) {
    if (d.is_callable()) {
        auto params = param_names(d);
        for (const auto& c : d.clauses) {
            if (c.kind != ClauseKind::Requires && c.kind != ClauseKind::Ensures) continue;
            bool req = c.kind == ClauseKind::Requires;
            SkipReason r;
            if (d.is_function_like()) r = req ? SkipReason::FunctionRequires : SkipReason::FunctionEnsures;
            else if (!d.body) r = SkipReason::NoBody;
            else r = leftover_reason(req ? opts.check_requires : opts.check_ensures, c, params);
            out.push_back(skipped(r, c, d.name));
        }
        if (d.body) explain_loops(d.body->stmts, d, opts, out);
    }
    for (const auto& m : d.members) explain(m, opts, out);
}

}  // namespace

ProgramUnit to_test_mode(const ProgramUnit& unit, const TransformOptions& opts) {
    ProgramUnit out = unit;
    if (!opts.any()) return out;
    for (auto& d : out.declarations) transform_decl(d, opts);
    return out;
}

TransformReport transform_report(const ProgramUnit& before, const ProgramUnit& after, const TransformOptions& opts) {
    TransformReport r;
    auto b = tally(before);
    auto a = tally(after);
    r.rewritten = {b.asserts - a.asserts, b.assumes - a.assumes, b.preconditions - a.preconditions,
                   b.postconditions - a.postconditions, b.invariants - a.invariants};
    for (const auto& d : after.declarations) explain(d, opts, r.skipped);
    return r;
}

}  // namespace verigrade::testmode
