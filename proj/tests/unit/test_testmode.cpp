#include "doctest.h"
#include "support.hpp"
#include "verigrade/syntax/parser.hpp"
#include "verigrade/testmode.hpp"

#include <set>

using namespace verigrade;
using namespace verigrade::testmode;
using syntax::ClauseKind;
using testing::Gen;

namespace {

syntax::ProgramUnit parse(const std::string& src) {
    auto u = syntax::parse_unit(src);
    REQUIRE(u);
    return *u;
}

std::string transform(const std::string& src, const TransformOptions& opts = {}) {
    return syntax::emit(to_test_mode(parse(src), opts));
}

std::vector<std::string> token_texts(std::string_view src) {
    auto ts = syntax::tokenize(src);
    REQUIRE(ts);
    std::vector<std::string> out;
    for (const auto& t : ts->tokens) out.emplace_back(src.substr(t.range.begin, t.range.size()));
    return out;
}

int count_token(std::string_view src, std::string_view word) {
    int n = 0;
    for (const auto& t : token_texts(src)) n += t == word;
    return n;
}

// Texts of every `expect e;` statement, whitespace-normalized.
std::multiset<std::string> expect_texts(std::string_view src) {
    std::multiset<std::string> out;
    auto toks = token_texts(src);
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i] != "expect") continue;
        std::string e;
        int depth = 0;
        for (++i; i < toks.size() && !(depth == 0 && toks[i] == ";"); ++i) {
            if (toks[i] == "(" || toks[i] == "[" || toks[i] == "{") ++depth;
            if (toks[i] == ")" || toks[i] == "]" || toks[i] == "}") --depth;
            e += (e.empty() ? "" : " ") + toks[i];
        }
        out.insert(e);
    }
    return out;
}

bool is_clause_word(const std::string& t) {
    return t == "requires" || t == "ensures" || t == "invariant" || t == "decreases" || t == "modifies" ||
           t == "reads";
}

// Token stream with spec clauses, check statements and entry snapshots cut out.
std::vector<std::string> skeleton(std::string_view src) {
    auto toks = token_texts(src);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < toks.size();) {
        const auto& t = toks[i];
        if (t == "requires" || t == "ensures" || t == "invariant") {
            int depth = 0;
            for (++i; i < toks.size(); ++i) {
                if (depth == 0 && (is_clause_word(toks[i]) || toks[i] == "{")) break;
                if (toks[i] == "(") ++depth;
                if (toks[i] == ")") --depth;
            }
            continue;
        }
        bool snapshot = t == "var" && i + 1 < toks.size() && toks[i + 1].size() > 5 &&
                        toks[i + 1].compare(toks[i + 1].size() - 5, 5, "__old") == 0;
        if (t == "assert" || t == "assume" || t == "expect" || snapshot) {
            while (i < toks.size() && toks[i] != ";") ++i;
            ++i;
            continue;
        }
        out.push_back(t);
        ++i;
    }
    return out;
}

struct GeneratedMethod {
    std::string source;
    std::multiset<std::string> checks;  // normalized clause/assert texts expected as expects
    int asserts = 0, assumes = 0, pre = 0, post = 0, loops = 0;
};

std::string norm(const std::string& s) {
    std::string out;
    for (const auto& t : token_texts(s)) out += (out.empty() ? "" : " ") + t;
    return out;
}

GeneratedMethod generate(Gen& g, int index) {
    static const std::vector<std::string> pre = {"x >= 0", "y > x", "x + y < 100", "true"};
    static const std::vector<std::pair<std::string, std::string>> post = {
        {"r >= 0", "r >= 0"}, {"r == old(x) + 1", "r == x__old + 1"}, {"x == old(x)", "x == x__old"},
        {"r != y", "r != y"}};
    static const std::vector<std::string> facts = {"r == r", "x <= x + 1", "(y * 2) >= y + y"};
    GeneratedMethod m;
    std::string name = "M" + std::to_string(index);
    m.source = "method " + name + "(x : int, y : int) returns (r : int)\n";
    std::set<std::string> post_texts;
    for (int k = g.range(0, 2); k > 0; --k) {
        auto c = g.pick(pre);
        m.source += "  requires " + c + "\n";
        m.checks.insert(norm(c));
        ++m.pre;
    }
    for (int k = g.range(0, 2); k > 0; --k) {
        auto c = g.pick(post);
        m.source += "  ensures " + c.first + "\n";
        post_texts.insert(norm(c.second));
        ++m.post;
    }
    m.source += "{\n  r := x + 1;\n";
    for (int k = g.range(0, 5); k > 0; --k) {
        switch (g.range(0, 4)) {
            case 0: {
                auto f = g.pick(facts);
                m.source += "  assert " + f + ";\n";
                m.checks.insert(norm(f));
                ++m.asserts;
                break;
            }
            case 1: {
                auto f = g.pick(facts);
                m.source += "  assume " + f + ";\n";
                m.checks.insert(norm(f));
                ++m.assumes;
                break;
            }
            case 2:
                m.source += "  var t" + std::to_string(k) + " := r * 2;\n";
                break;
            case 3:
                m.source += "  if r > 50 { return; }\n";
                break;
            case 4:
                m.source += "  while r < 10\n    invariant r <= 10\n    decreases 10 - r\n  {\n    r := r + 1;\n  }\n";
                m.checks.insert(norm("r <= 10"));
                ++m.loops;
                break;
        }
    }
    m.source += "}\n";
    for (const auto& p : post_texts) m.checks.insert(p);
    return m;
}

}  // namespace

TEST_CASE("examples") {
    CHECK(transform("method M(x: int, y: int, f: int) { assert f == x + y; }") ==
          "method M(x: int, y: int, f: int) { expect f == x + y; }");
    auto req = transform("method M(a: int)\n  requires a >= 0\n{\n  print a;\n}\n");
    CHECK(req == "method M(a: int)\n{\n  expect a >= 0;\n  print a;\n}\n");
    auto plain = testing::read_file(testing::data_dir() / "corpus/add.dfy");
    CHECK(transform(plain) == plain);
}

TEST_CASE("ensures with old over a parameter uses an entry snapshot") {
    auto out = transform("method Inc(n: int) returns (m: int)\n  ensures m == old(n) + 1\n{\n  m := n + 1;\n}\n");
    CHECK(out == "method Inc(n: int) returns (m: int)\n{\n  var n__old := n;\n  m := n + 1;\n"
                 "  expect m == n__old + 1;\n}\n");
}

TEST_CASE("returns with values assign the outputs before the checks") {
    auto out = transform("method F(n: int) returns (m: int)\n  ensures m > n\n{\n  return n + 1;\n}\n");
    CHECK(out.find("m := n + 1;") != std::string::npos);
    CHECK(out.find("expect m > n;") < out.find("return;"));
    CHECK(count_token(out, "ensures") == 0);
}

TEST_CASE("extended addition fixture") {
    auto src = testing::read_file(testing::data_dir() / "testmode/add_extended.dfy");
    auto before = parse(src);
    auto after = to_test_mode(before);
    auto out = syntax::emit(after);
    for (auto word : {"assert", "assume", "requires", "ensures", "invariant"}) CHECK(count_token(out, word) == 0);
    CHECK(count_token(out, "expect") == 4);
    CHECK(out.find("{\n     expect x >= 0;\n") != std::string::npos);

    auto report = transform_report(before, after);
    CHECK(report.rewritten == RewriteCounts{3, 0, 1, 0, 0});
    CHECK(report.skipped.empty());
    CHECK(syntax::emit(to_test_mode(after)) == out);
}

TEST_CASE("loops fixture: invariants, returns and skipped clauses") {
    auto src = testing::read_file(testing::data_dir() / "testmode/loops.dfy");
    auto before = parse(src);
    auto after = to_test_mode(before);
    auto out = syntax::emit(after);
    auto report = transform_report(before, after);
    CHECK(report.rewritten == RewriteCounts{0, 1, 1, 2, 2});
    REQUIRE(report.skipped.size() == 3);
    CHECK(report.skipped[0].reason == SkipReason::UnsupportedOld);
    CHECK(report.skipped[0].decl_name == "Bump");
    REQUIRE(report.skipped[0].offset);
    CHECK(src.compare(*report.skipped[0].offset, 7, "ensures") == 0);
    CHECK(report.skipped[1].reason == SkipReason::FunctionRequires);
    CHECK(report.skipped[2].reason == SkipReason::FunctionEnsures);
    CHECK(out.find("decreases n - i") != std::string::npos);
    CHECK(out.find("// closed form") != std::string::npos);
    CHECK(out.find("var n__old := n;") != std::string::npos);
    CHECK(count_token(out, "invariant") == 0);
    CHECK(syntax::emit(to_test_mode(after)) == out);
}

TEST_CASE("old over a field is reported, not dropped") {
    auto src = "class C { var f: int\n method M(x: C)\n  modifies x\n  ensures x.f == old(x.f)\n { } }\n";
    auto before = parse(src);
    auto after = to_test_mode(before);
    auto report = transform_report(before, after);
    REQUIRE(report.skipped.size() == 1);
    CHECK(report.skipped[0].reason == SkipReason::UnsupportedOld);
    CHECK(syntax::normalize_whitespace(report.skipped[0].text) == "x.f == old(x.f)");
}

TEST_CASE("options switch individual constructs off") {
    auto src = testing::read_file(testing::data_dir() / "testmode/add_extended.dfy");
    auto before = parse(src);

    TransformOptions none{false, false, false, false, false};
    CHECK_FALSE(none.any());
    auto same = to_test_mode(before, none);
    CHECK(syntax::emit(same) == src);
    auto r = transform_report(before, same, none);
    CHECK(r.rewritten == RewriteCounts{});
    for (const auto& s : r.skipped) CHECK(s.reason == SkipReason::Disabled);

    TransformOptions no_requires;
    no_requires.check_requires = false;
    auto partial = to_test_mode(before, no_requires);
    auto out = syntax::emit(partial);
    CHECK(count_token(out, "requires") == 1);
    CHECK(count_token(out, "expect") == 3);
    auto pr = transform_report(before, partial, no_requires);
    CHECK(pr.rewritten == RewriteCounts{3, 0, 0, 0, 0});
    REQUIRE(pr.skipped.size() == 1);
    CHECK(pr.skipped[0].reason == SkipReason::Disabled);
    CHECK(pr.skipped[0].kind == ClauseKind::Requires);
}

TEST_CASE("property: completeness, idempotence and verbatim preservation") {
    Gen g(41);
    for (int i = 0; i < 400; ++i) {
        std::string src;
        std::multiset<std::string> checks;
        RewriteCounts expected;
        for (int k = g.range(1, 3); k > 0; --k) {
            auto m = generate(g, k);
            src += m.source + "\n";
            checks.insert(m.checks.begin(), m.checks.end());
            expected.asserts += m.asserts;
            expected.assumes += m.assumes;
            expected.preconditions += m.pre;
            expected.postconditions += m.post;
            expected.invariants += m.loops;
        }
        CAPTURE(src);
        auto before = parse(src);
        auto after = to_test_mode(before);
        auto out = syntax::emit(after);

        for (auto word : {"assert", "assume", "requires", "ensures", "invariant"}) REQUIRE(count_token(out, word) == 0);

        auto produced = expect_texts(out);
        std::set<std::string> produced_set(produced.begin(), produced.end());
        std::set<std::string> expected_set(checks.begin(), checks.end());
        CHECK(produced_set == expected_set);

        auto report = transform_report(before, after);
        CHECK(report.rewritten == expected);
        CHECK(report.skipped.empty());

        CHECK(syntax::emit(to_test_mode(after)) == out);
        CHECK(skeleton(out) == skeleton(src));
        REQUIRE(syntax::parse_unit(out));
    }
}
