#include "verigrade/oracle.hpp"

#include <set>

#include "verigrade/syntax/parser.hpp"

namespace verigrade::oracle {

using namespace syntax;

namespace {

constexpr std::string_view kStudentName = "Stu__";

OracleError error(OracleErrorKind kind, std::string message) { return OracleError{kind, std::move(message)}; }

// Replaces identifier tokens equal to `from`; strings and comments are untouched.
std::string rename_ident(std::string_view text, std::string_view from, std::string_view to) {
    auto ts = tokenize(text);
    if (!ts) return std::string(text);
    std::string out;
    std::size_t pos = 0;
    for (const auto& t : ts->tokens) {
        if (t.kind != TokenKind::Ident || text.substr(t.range.begin, t.range.size()) != from) continue;
        out.append(text.substr(pos, t.range.begin - pos));
        out.append(to);
        pos = t.range.end;
    }
    out.append(text.substr(pos));
    return out;
}

const Decl* top_level(const ProgramUnit& unit, std::string_view name) {
    for (const auto& d : unit.declarations)
        if (d.is_callable() && d.name == name) return &d;
    return nullptr;
}

Decl* top_level(ProgramUnit& unit, std::string_view name) {
    for (auto& d : unit.declarations)
        if (d.is_callable() && d.name == name) return &d;
    return nullptr;
}

std::vector<std::pair<ClauseKind, std::string>> frames(const Decl& d) {
    std::vector<std::pair<ClauseKind, std::string>> out;
    for (const auto& c : d.clauses)
        if (c.kind == ClauseKind::Modifies || c.kind == ClauseKind::Reads)
            out.emplace_back(c.kind, normalize_whitespace(c.body.text));
    return out;
}

std::optional<OracleError> check_frames(const Decl& student, const OracleAsset& asset) {
    if (frames(student) != frames(asset.oracle_impl))
        return error(OracleErrorKind::UnsupportedConstruct, "modifies and reads clauses must match the question");
    return std::nullopt;
}

Expected<const Decl*, OracleError> student_target(const ProgramUnit& student, const OracleAsset& asset) {
    const Decl* d = top_level(student, asset.target_name);
    if (!d) return unexpected(error(OracleErrorKind::TargetNotFound, "declaration '" + asset.target_name + "' not found"));
    if (auto e = check_signature(*d, asset)) return unexpected(std::move(*e));
    if (auto e = check_frames(*d, asset)) return unexpected(std::move(*e));
    return d;
}

// Student helper declarations the oracle program does not already define.
std::string student_extras(const ProgramUnit& student, const OracleAsset& asset) {
    std::set<std::string> taken;
    for (const auto& d : asset.unit.declarations)
        if (!d.name.empty()) taken.insert(d.name);
    std::string out;
    for (const auto& d : student.declarations) {
        if (d.kind == DeclKind::Opaque || d.name.empty() || d.name == asset.target_name || taken.count(d.name)) continue;
        out += "\n";
        out += emit(d);
    }
    return out;
}

std::string header(std::string_view kind, const ProgramUnit& student, const OracleAsset& asset) {
    std::string out = "// verigrade-harness: ";
    out += kind;
    out += '\n';
    out += backend::mock_directive_lines(emit(student));
    out += backend::mock_directive_lines(asset.source);
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

// `(r: int)` names its result `r`.
std::optional<std::string> named_result(std::string_view result_type) {
    auto ts = tokenize(result_type);
    if (!ts || ts->tokens.size() < 3) return std::nullopt;
    const auto& t = ts->tokens;
    if (t[0].kind != TokenKind::LParen || t[1].kind != TokenKind::Ident || t[2].kind != TokenKind::Colon)
        return std::nullopt;
    return std::string(result_type.substr(t[1].range.begin, t[1].range.size()));
}

}  // namespace

const char* to_string(OracleErrorKind kind) {
    switch (kind) {
        case OracleErrorKind::ParseFailed: return "ParseFailed";
        case OracleErrorKind::TargetNotFound: return "TargetNotFound";
        case OracleErrorKind::SignatureMismatch: return "SignatureMismatch";
        case OracleErrorKind::UnsupportedConstruct: return "UnsupportedConstruct";
    }
    return "?";
}

Expected<OracleAsset, OracleError> load_oracle_asset(std::string_view source, std::optional<std::string_view> target) {
    auto unit = parse_unit(source);
    if (!unit) return unexpected(error(OracleErrorKind::ParseFailed, "oracle asset does not parse"));
    const Decl* d = nullptr;
    if (target) {
        d = top_level(*unit, *target);
    } else {
        for (const auto& decl : unit->declarations) {
            if (decl.is_callable()) {
                d = &decl;
                break;
            }
        }
    }
    if (!d) return unexpected(error(OracleErrorKind::TargetNotFound, "oracle asset has no target declaration"));
    if (!d->body && !d->function_body)
        return unexpected(error(OracleErrorKind::UnsupportedConstruct, "oracle target has no body"));
    for (const auto& p : d->params)
        if (p.name.empty())
            return unexpected(error(OracleErrorKind::UnsupportedConstruct, "oracle target has an unnamed parameter"));
    OracleAsset asset{d->name, extract_spec(*d), *d, {}, std::string(source)};
    asset.unit = std::move(*unit);
    return asset;
}

std::optional<OracleError> check_signature(const Decl& student, const OracleAsset& asset) {
    const auto& o = asset.oracle_impl;
    auto same_params = [](const std::vector<Param>& a, const std::vector<Param>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].name != b[i].name || a[i].ghost != b[i].ghost) return false;
            if (normalize_whitespace(a[i].type_text) != normalize_whitespace(b[i].type_text)) return false;
        }
        return true;
    };
    bool ok = student.kind == o.kind && student.name == o.name && same_params(student.params, o.params) &&
              same_params(student.returns, o.returns) &&
              normalize_whitespace(student.result_type) == normalize_whitespace(o.result_type) &&
              normalize_whitespace(student.type_params ? student.type_params->text : "") ==
                  normalize_whitespace(o.type_params ? o.type_params->text : "");
    if (!ok) return error(OracleErrorKind::SignatureMismatch, "signature must not change");
    return std::nullopt;
}

Expected<std::string, OracleError> build_consistency_harness(const ProgramUnit& student_unit,
                                                             const OracleAsset& asset) {
    auto stu = student_target(student_unit, asset);
    if (!stu) return unexpected(stu.error());

    ProgramUnit unit = asset.unit;
    Decl* target = top_level(unit, asset.target_name);
    std::vector<Clause> clauses;
    for (auto c : (*stu)->clauses) {
        if (c.kind != ClauseKind::Requires && c.kind != ClauseKind::Ensures) continue;
        if (c.keyword.trivia.empty()) c.keyword.trivia = " ";
        clauses.push_back(std::move(c));
    }
    for (const auto& c : target->clauses)
        if (c.kind != ClauseKind::Requires && c.kind != ClauseKind::Ensures) clauses.push_back(c);
    target->clauses = std::move(clauses);

    return header("consistency", student_unit, asset) + emit(unit) + student_extras(student_unit, asset) + "\n";
}

Expected<std::string, OracleError> build_capture_harness(const ProgramUnit& student_unit, const OracleAsset& asset) {
    auto stu = student_target(student_unit, asset);
    if (!stu) return unexpected(stu.error());
    const Decl& s = **stu;
    const Decl& o = asset.oracle_impl;
    const auto& name = asset.target_name;

    ProgramUnit base = asset.unit;
    std::erase_if(base.declarations, [&](const Decl& d) { return d.is_callable() && d.name == name; });

    std::string tparams = o.type_params ? o.type_params->text : "";
    std::string params = o.params_text ? o.params_text->text : "()";

    std::string decl = "\n\n";
    if (o.kind == DeclKind::Method) {
        decl += "method " + std::string(kStudentName) + tparams + params;
        if (o.returns_text) decl += " returns " + o.returns_text->text;
    } else {
        decl += (o.kind == DeclKind::Predicate ? "predicate " : "function ") + std::string(kStudentName) + tparams +
                params;
        if (!o.result_type.empty()) decl += ": " + o.result_type;
    }
    for (const auto& c : s.clauses) {
        if (c.kind == ClauseKind::Decreases || c.kind == ClauseKind::Invariant) continue;
        decl += "\n  " + c.keyword.text + " " + rename_ident(c.body.text, name, kStudentName);
    }

    std::vector<std::string> args;
    for (const auto& p : o.params) args.push_back(p.name);
    std::string call = std::string(kStudentName) + "(" + join(args, ", ") + ")";

    std::string harness = "\n\nmethod CaptureHarness__" + tparams + params;
    for (const auto& c : o.clauses) {
        if (c.kind == ClauseKind::Requires || c.kind == ClauseKind::Modifies)
            harness += "\n  " + c.keyword.text + " " + rename_ident(c.body.text, name, kStudentName);
    }
    harness += "\n{\n";
    if (o.kind == DeclKind::Method) {
        std::vector<std::string> outs;
        for (const auto& r : o.returns) outs.push_back(r.name);
        if (outs.empty()) harness += "  " + call + ";\n";
        else harness += "  var " + join(outs, ", ") + " := " + call + ";\n";
    } else if (auto r = named_result(o.result_type)) {
        harness += "  var " + *r + " := " + call + ";\n";
    }
    for (const auto& c : o.clauses)
        if (c.kind == ClauseKind::Ensures) harness += "  assert " + rename_ident(c.body.text, name, kStudentName) + ";\n";
    harness += "}\n";

    return header("capture", student_unit, asset) + emit(base) + student_extras(student_unit, asset) + decl +
           harness;
}

Expected<OracleVerdict, OracleError> check_spec(std::string_view student_source, const OracleAsset& asset,
                                                const backend::BackendConfig& cfg, OracleChecks checks) {
    auto unit = parse_unit(student_source);
    if (!unit) return unexpected(error(OracleErrorKind::ParseFailed, "could not parse submission: " + unit.error().message));

    OracleVerdict v;
    v.consistent = true;
    v.captures = true;
    if (checks.consistency) {
        auto h = build_consistency_harness(*unit, asset);
        if (!h) return unexpected(h.error());
        v.consistency_report = backend::verify(*h, cfg);
        v.consistent = v.consistency_report->status == backend::VerifyStatus::Pass;
    }
    if (checks.capture) {
        auto h = build_capture_harness(*unit, asset);
        if (!h) return unexpected(h.error());
        v.capture_report = backend::verify(*h, cfg);
        v.captures = v.capture_report->status == backend::VerifyStatus::Pass;
    }
    return v;
}

}  // namespace verigrade::oracle
