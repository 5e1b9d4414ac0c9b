#include "doctest.h"
#include "support.hpp"
#include "verigrade/exercise.hpp"

using namespace verigrade::bank;
using testing::Gen;

namespace {

Template tmpl(std::string text) {
    auto t = Template::make(std::move(text));
    REQUIRE(t);
    return *t;
}

// Random text that never contains the placeholder by accident.
std::string filler(Gen& g, int max_len) {
    static const std::string alphabet = "abc xyz{}();:=!\n\t[]?é";
    std::string s;
    int n = g.range(0, max_len);
    for (int i = 0; i < n; ++i) {
        if (g.coin(0.05)) {
            s += "λ";
            continue;
        }
        s += alphabet[static_cast<std::size_t>(g.range(0, static_cast<int>(alphabet.size()) - 1))];
        if (s.size() >= 5 && s.compare(s.size() - 5, 5, kPlaceholder) == 0) s.pop_back();
    }
    return s;
}

}  // namespace

TEST_CASE("validate_template: examples") {
    auto one = validate_template("method f() [???]");
    REQUIRE(one);
    CHECK(one->offset == 11);

    auto none = validate_template("method f() {}");
    REQUIRE_FALSE(none);
    CHECK(none.error().kind == TemplateErrorKind::NoPlaceholder);

    auto two = validate_template("[???] x [???]");
    REQUIRE_FALSE(two);
    CHECK(two.error().kind == TemplateErrorKind::MultiplePlaceholders);
    CHECK(two.error().offsets == std::vector<std::size_t>{0, 8});
}

TEST_CASE("splice: examples") {
    CHECK(splice(tmpl("t := a [???] b;"), "!=") == "t := a != b;");
    CHECK(splice(tmpl("x [???] y"), "") == "x  y");

    std::string hundred(95, 'a');
    hundred.insert(40, "[???]");
    REQUIRE(hundred.size() == 100);
    auto t = tmpl(hundred);
    auto out = splice(t, "1234567");
    CHECK(out.size() == 102);
    CHECK(out.find("1234567") == t.placeholder_offset());
}

TEST_CASE("splice: answer is inserted verbatim") {
    auto t = tmpl("a [???] b");
    CHECK(splice(t, "  [???]\r\n\"\\ ") == "a   [???]\r\n\"\\  b");
}

TEST_CASE("property: splice round trip") {
    Gen g(11);
    for (int i = 0; i < 1000; ++i) {
        auto text = filler(g, 40) + std::string(kPlaceholder) + filler(g, 40);
        auto t = tmpl(text);
        auto answer = g.coin(0.1) ? std::string(kPlaceholder) : filler(g, 30);
        auto out = splice(t, answer);
        REQUIRE(out.size() == text.size() - kPlaceholder.size() + answer.size());
        REQUIRE(out.compare(t.placeholder_offset(), answer.size(), answer) == 0);
        auto back = out;
        back.replace(t.placeholder_offset(), answer.size(), kPlaceholder);
        REQUIRE(back == text);
    }
}

TEST_CASE("property: validate_template accepts exactly one placeholder") {
    Gen g(12);
    for (int i = 0; i < 1000; ++i) {
        int tokens = g.range(0, 3);
        std::string text = filler(g, 20);
        std::vector<std::size_t> offsets;
        for (int k = 0; k < tokens; ++k) {
            offsets.push_back(text.size());
            text += kPlaceholder;
            text += filler(g, 20);
        }
        // Filler followed by a token can still complete an accidental one.
        std::vector<std::size_t> actual;
        for (auto p = text.find(kPlaceholder); p != std::string::npos; p = text.find(kPlaceholder, p + 1))
            actual.push_back(p);
        REQUIRE(actual == offsets);

        auto r = validate_template(text);
        CAPTURE(text);
        REQUIRE(static_cast<bool>(r) == (tokens == 1));
        if (tokens == 1) CHECK(r->offset == offsets[0]);
        if (tokens == 0) CHECK(r.error().kind == TemplateErrorKind::NoPlaceholder);
        if (tokens > 1) CHECK(r.error().offsets == offsets);
    }
}

TEST_CASE("check_char_limit: strict inequality") {
    CHECK(check_char_limit(std::string(749, 'x'), 750).pass);
    CHECK(check_char_limit(std::string(749, 'x'), 750).count == 749);
    CHECK_FALSE(check_char_limit(std::string(750, 'x'), 750).pass);
    CHECK(check_char_limit(std::string(750, 'x'), 750).count == 750);
    CHECK(check_char_limit("", 750).pass);
    CHECK(check_char_limit("", 750).count == 0);
}

TEST_CASE("check_char_limit: scalar values and line endings") {
    CHECK(count_scalar_values("é") == 1);
    CHECK(count_scalar_values("λx") == 2);
    CHECK(count_scalar_values("\xF0\x9F\x8D\xBA") == 1);
    CHECK(count_scalar_values("a\r\nb") == 3);
    CHECK(count_scalar_values("a\rb") == 3);
    CHECK(count_scalar_values("// c\n  x") == 8);
}

TEST_CASE("property: char limit passes iff count < limit") {
    Gen g(13);
    for (int i = 0; i < 1000; ++i) {
        auto s = filler(g, 60);
        auto limit = static_cast<std::size_t>(g.range(1, 70));
        auto r = check_char_limit(s, limit);
        REQUIRE(r.count == count_scalar_values(s));
        REQUIRE(r.pass == (r.count < limit));
    }
}

TEST_CASE("parse_exercise: front matter") {
    auto ex = parse_exercise("---\nid: q\ntitle: Q\nweek: 3\nmode: verify_and_run\nchar_limit: 10\n---\nx [???]\n",
                             "q.exercise");
    REQUIRE(ex);
    CHECK(ex->id == "q");
    CHECK(ex->week == 3);
    CHECK(ex->check.mode == CheckMode::VerifyAndRun);
    CHECK(ex->char_limit == 10u);
    CHECK(ex->tmpl.text() == "x [???]\n");
    CHECK(ex->weight_group == "weekly");

    auto bad_week = parse_exercise("---\nid: q\ntitle: Q\nweek: 0\n---\n[???]", "q.exercise");
    REQUIRE_FALSE(bad_week);
    CHECK(bad_week.error().kind == BankErrorKind::MalformedFrontMatter);

    auto limit_without_run = parse_exercise("---\nid: q\ntitle: Q\nweek: 1\nchar_limit: 5\n---\n[???]", "q");
    REQUIRE_FALSE(limit_without_run);

    auto unknown_key = parse_exercise("---\nid: q\ntitle: Q\nweek: 1\ncolour: red\n---\n[???]", "q");
    REQUIRE_FALSE(unknown_key);

    auto no_hole = parse_exercise("---\nid: q\ntitle: Q\nweek: 1\n---\nnothing", "q");
    REQUIRE_FALSE(no_hole);
    CHECK(no_hole.error().kind == BankErrorKind::TemplateInvalid);
}

TEST_CASE("load_bank: fixture bank") {
    auto b = load_bank(testing::data_dir() / "bank");
    REQUIRE(b);
    CHECK(b->size() == 11);
    const auto* fptp = b->find("fptp");
    REQUIRE(fptp);
    CHECK(fptp->title == "First Past the Post");
    CHECK(fptp->tmpl.text().find("t := a [???] b;") != std::string::npos);

    const auto* bottles = b->find("bottles");
    REQUIRE(bottles);
    REQUIRE(bottles->expected_stdout);
    CHECK(bottles->expected_stdout->size() == 1743);
    CHECK(bottles->char_limit == 750u);
    CHECK(bottles->weight_group == "a1");
    CHECK(bottles->kind == ExerciseKind::AssignmentPart);

    const auto* spec = b->find("addition_spec");
    REQUIRE(spec);
    CHECK(spec->hidden_oracle);
    CHECK(spec->oracle_target == std::optional<std::string>("Add"));

    CHECK(b->group("weekly").size() == 7);
    CHECK(b->group("a4").size() == 1);
}

TEST_CASE("load_bank: deterministic") {
    auto a = load_bank(testing::data_dir() / "bank");
    auto b = load_bank(testing::data_dir() / "bank");
    REQUIRE(a);
    REQUIRE(b);
    CHECK(*a == *b);
}

TEST_CASE("load_bank: duplicate ids name both files") {
    auto b = load_bank(testing::data_dir() / "bad_banks/duplicate");
    REQUIRE_FALSE(b);
    REQUIRE(b.error().size() == 1);
    const auto& e = b.error()[0];
    CHECK(e.kind == BankErrorKind::DuplicateId);
    CHECK(e.file.filename() == "second.exercise");
    CHECK(e.message.find("first.exercise") != std::string::npos);
}

TEST_CASE("load_bank: every error is reported") {
    auto missing = load_bank(testing::data_dir() / "bad_banks/missing_asset");
    REQUIRE_FALSE(missing);
    REQUIRE(missing.error().size() == 2);
    for (const auto& e : missing.error()) CHECK(e.kind == BankErrorKind::MissingAsset);

    auto malformed = load_bank(testing::data_dir() / "bad_banks/malformed");
    REQUIRE_FALSE(malformed);
    CHECK(malformed.error().size() == 3);

    auto nowhere = load_bank(testing::data_dir() / "no_such_dir");
    REQUIRE_FALSE(nowhere);
    CHECK(nowhere.error()[0].kind == BankErrorKind::Io);
}

TEST_CASE("load_bank: empty directory is an empty bank") {
    testing::Scratch dir;
    auto b = load_bank(dir.path());
    REQUIRE(b);
    CHECK(b->size() == 0);
}
