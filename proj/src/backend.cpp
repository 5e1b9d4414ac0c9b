#include "verigrade/backend.hpp"

#include <sodium.h>

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "verigrade/subprocess.hpp"

namespace verigrade::backend {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto end = nl == std::string_view::npos ? text.size() : nl;
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return lines;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

void skip_spaces(std::string_view& s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
}

std::optional<int> take_int(std::string_view& s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || v < 0) return std::nullopt;
    s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
    return v;
}

bool take(std::string_view& s, std::string_view word) {
    if (!starts_with(s, word)) return false;
    s.remove_prefix(word.size());
    return true;
}

// "<N> <word>[s]"; the plural suffix is optional.
std::optional<int> take_count(std::string_view& s, std::string_view word) {
    auto copy = s;
    skip_spaces(copy);
    auto n = take_int(copy);
    if (!n) return std::nullopt;
    skip_spaces(copy);
    if (!take(copy, word)) return std::nullopt;
    take(copy, "s");
    s = copy;
    return n;
}

constexpr std::string_view kSummary = "Dafny program verifier finished with ";

std::optional<ParsedOutput> parse_summary(std::string_view line) {
    auto at = line.find(kSummary);
    if (at == std::string_view::npos) return std::nullopt;
    auto rest = line.substr(at + kSummary.size());
    ParsedOutput out;
    auto verified = take_count(rest, "verified");
    if (!verified || !take(rest, ",")) return std::nullopt;
    auto errors = take_count(rest, "error");
    if (!errors) return std::nullopt;
    out.verified = *verified;
    out.errors = *errors;
    while (take(rest, ",")) {
        if (auto t = take_count(rest, "time out")) {
            out.timeouts += *t;
        } else if (auto r = take_count(rest, "out of resource")) {
            out.timeouts += *r;
        } else if (auto i = take_count(rest, "inconclusive")) {
            out.errors += *i;
        } else {
            break;
        }
    }
    return out;
}

// "<N> parse errors detected in <file>" or "<N> resolution/type errors detected in <file>"
std::optional<int> parse_front_end(std::string_view line) {
    skip_spaces(line);
    auto n = take_int(line);
    if (!n) return std::nullopt;
    skip_spaces(line);
    if (!take(line, "parse errors") && !take(line, "resolution/type errors")) return std::nullopt;
    skip_spaces(line);
    if (!take(line, "detected in")) return std::nullopt;
    return n;
}

// "<file>(<line>,<col>): <message>"
std::optional<Diagnostic> parse_diagnostic(std::string_view line) {
    auto close = line.find("): ");
    if (close == std::string_view::npos) return std::nullopt;
    auto open = line.rfind('(', close);
    if (open == std::string_view::npos) return std::nullopt;
    auto inner = line.substr(open + 1, close - open - 1);
    auto comma = inner.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    auto ls = inner.substr(0, comma);
    auto cs = inner.substr(comma + 1);
    auto l = take_int(ls);
    auto c = take_int(cs);
    if (!l || !c || !ls.empty() || !cs.empty()) return std::nullopt;
    auto message = line.substr(close + 3);
    if (!starts_with(message, "Error")) return std::nullopt;
    return Diagnostic{*l, *c, std::string(message)};
}

std::string excerpt(std::string_view text) {
    for (auto line : split_lines(text)) {
        if (line.empty()) continue;
        std::string out(line.substr(0, 120));
        for (auto& ch : out)
            if (static_cast<unsigned char>(ch) < 0x20) ch = ' ';
        return out;
    }
    return {};
}

}  // namespace

Expected<ParsedOutput, ToolOutputUnrecognized> parse_verifier_output(std::string_view text) {
    std::vector<Diagnostic> diags;
    std::optional<ParsedOutput> result;
    int front_end = 0;
    bool saw_front_end = false;
    for (auto line : split_lines(text)) {
        if (auto d = parse_diagnostic(line)) {
            diags.push_back(std::move(*d));
        } else if (auto s = parse_summary(line)) {
            result = std::move(*s);
        } else if (auto n = parse_front_end(line)) {
            saw_front_end = true;
            front_end += *n;
        }
    }
    if (result) {
        result->diagnostics = std::move(diags);
        return *result;
    }
    if (saw_front_end) {
        ParsedOutput out;
        out.errors = front_end;
        out.front_end_failure = true;
        out.diagnostics = std::move(diags);
        return out;
    }
    return unexpected(ToolOutputUnrecognized{excerpt(text)});
}

BackendConfig BackendConfig::from_env() {
    BackendConfig cfg;
    if (const char* cmd = std::getenv("VERIGRADE_VERIFIER_CMD"); cmd && *cmd) cfg.verifier_command = cmd;
    if (const char* t = std::getenv("VERIGRADE_TIMEOUT_SECS"); t && *t) {
        int secs = 0;
        auto [ptr, ec] = std::from_chars(t, t + std::strlen(t), secs);
        if (ec == std::errc{} && *ptr == '\0' && secs > 0) cfg.timeout = std::chrono::seconds(secs);
    }
    return cfg;
}

const char* to_string(VerifyStatus s) {
    switch (s) {
        case VerifyStatus::Pass: return "Pass";
        case VerifyStatus::Fail: return "Fail";
        case VerifyStatus::Timeout: return "Timeout";
        case VerifyStatus::ToolError: return "ToolError";
    }
    return "?";
}

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return "Ok";
        case RunStatus::CompileFailed: return "CompileFailed";
        case RunStatus::Timeout: return "Timeout";
        case RunStatus::ToolError: return "ToolError";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Mock backend

namespace {

struct Directive {
    std::string name;       // VERIFY, RUN, RUN-STDOUT
    std::string qualifier;  // empty, capture, consistency
    std::string value;
};

std::optional<std::string> harness_kind(std::string_view source) {
    constexpr std::string_view marker = "// verigrade-harness: ";
    for (auto line : split_lines(source)) {
        skip_spaces(line);
        if (take(line, marker)) return std::string(line);
    }
    return std::nullopt;
}

std::vector<Directive> directives(std::string_view source, std::string_view name) {
    auto kind = harness_kind(source).value_or("");
    std::vector<Directive> out;
    for (auto line : split_lines(source)) {
        auto at = line.find("// MOCK-");
        if (at == std::string_view::npos) continue;
        auto rest = line.substr(at + 8);
        if (!take(rest, name)) continue;
        Directive d{std::string(name), {}, {}};
        if (take(rest, "@")) {
            auto colon = rest.find(':');
            if (colon == std::string_view::npos) continue;
            d.qualifier = std::string(rest.substr(0, colon));
            rest.remove_prefix(colon);
        }
        if (!take(rest, ":")) continue;
        skip_spaces(rest);
        while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t')) rest.remove_suffix(1);
        d.value = std::string(rest);
        if (!d.qualifier.empty() && d.qualifier != kind) continue;
        out.push_back(std::move(d));
    }
    return out;
}

std::optional<int> keyed_int(std::string_view text, std::string_view key) {
    std::string k = std::string(key) + "=";
    auto at = text.find(k);
    if (at == std::string_view::npos) return std::nullopt;
    auto rest = text.substr(at + k.size());
    return take_int(rest);
}

VerificationReport mock_verify(std::string_view source, const BackendConfig& cfg) {
    VerificationReport r;
    r.status = VerifyStatus::Pass;
    auto ds = directives(source, "VERIFY");
    if (ds.empty()) return r;
    const auto& v = ds.back().value;
    if (v == "timeout") {
        r.status = VerifyStatus::Timeout;
        r.duration = std::chrono::duration<double>(cfg.timeout).count();
    } else if (starts_with(v, "tool-error")) {
        r.status = VerifyStatus::ToolError;
        r.tool_error = "verifier crashed";
    } else {
        auto verified = keyed_int(v, "verified");
        auto errors = keyed_int(v, "errors");
        if (!verified || !errors) {
            r.status = VerifyStatus::ToolError;
            r.tool_error = "malformed MOCK-VERIFY directive";
            return r;
        }
        r.verified_count = *verified;
        r.error_count = *errors;
        r.status = *errors == 0 ? VerifyStatus::Pass : VerifyStatus::Fail;
        for (int i = 0; i < *errors; ++i) r.diagnostics.push_back({std::nullopt, std::nullopt, "Error: mock failure"});
    }
    return r;
}

std::optional<std::string> decode_base64(std::string_view text) {
    std::string out(text.size(), '\0');
    std::size_t len = 0;
    if (sodium_base642bin(reinterpret_cast<unsigned char*>(out.data()), out.size(), text.data(), text.size(), " \t",
                          &len, nullptr, sodium_base64_VARIANT_ORIGINAL) != 0) {
        return std::nullopt;
    }
    out.resize(len);
    return out;
}

RunReport mock_run(std::string_view source, const BackendConfig& cfg) {
    RunReport r;
    r.status = RunStatus::Ok;
    if (auto ds = directives(source, "RUN-STDOUT"); !ds.empty()) {
        auto bytes = decode_base64(ds.back().value);
        if (!bytes) {
            r.status = RunStatus::ToolError;
            r.tool_error = "malformed MOCK-RUN-STDOUT directive";
            return r;
        }
        r.stdout_bytes = std::move(*bytes);
    }
    if (auto ds = directives(source, "RUN"); !ds.empty()) {
        const auto& v = ds.back().value;
        if (v == "timeout") {
            r.status = RunStatus::Timeout;
            r.timed_out = true;
            r.exit_status = kKilledExitStatus;
            r.duration = std::chrono::duration<double>(cfg.timeout).count();
        } else if (v == "compile-error") {
            r.status = RunStatus::CompileFailed;
            r.stdout_bytes.clear();
            r.diagnostics.push_back({std::nullopt, std::nullopt, "Error: mock compile failure"});
        } else if (auto code = keyed_int(v, "exit")) {
            r.exit_status = *code;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// External backend

std::vector<std::string> build_argv(const BackendConfig& cfg, const std::vector<std::string>& args,
                                    const std::filesystem::path& file) {
    std::vector<std::string> argv{cfg.verifier_command};
    for (auto a : args) {
        for (auto at = a.find("{file}"); at != std::string::npos; at = a.find("{file}", at)) {
            a.replace(at, 6, file.string());
            at += file.string().size();
        }
        argv.push_back(std::move(a));
    }
    return argv;
}

ProcessLimits limits_of(const BackendConfig& cfg) { return {cfg.timeout, cfg.grace, cfg.max_memory}; }

std::string start_failure(const BackendConfig& cfg, int err) {
    if (err == ENOENT) return "verifier not found: " + cfg.verifier_command;
    return "cannot start verifier: " + std::string(std::strerror(err));
}

struct Workspace {
    TempDir dir;
    std::filesystem::path file;

    Workspace(const BackendConfig& cfg, std::string_view source) : dir(cfg.work_root) {
        file = dir.path() / "attempt.dfy";
        std::ofstream out(file, std::ios::binary);
        out.write(source.data(), static_cast<std::streamsize>(source.size()));
    }
};

VerificationReport external_verify(std::string_view source, const BackendConfig& cfg) {
    VerificationReport r;
    Workspace ws(cfg, source);
    auto p = run_process(build_argv(cfg, cfg.verify_args, ws.file), ws.dir.path(), limits_of(cfg));
    r.duration = p.seconds;
    if (p.exec_failed) {
        r.status = VerifyStatus::ToolError;
        r.tool_error = start_failure(cfg, p.exec_errno);
        return r;
    }
    if (p.timed_out) {
        r.status = VerifyStatus::Timeout;
        return r;
    }
    if (p.term_signal != 0) {
        r.status = VerifyStatus::ToolError;
        r.tool_error = "verifier crashed (signal " + std::to_string(p.term_signal) + ")";
        return r;
    }
    auto parsed = parse_verifier_output(p.out + "\n" + p.err);
    if (!parsed) {
        r.status = VerifyStatus::ToolError;
        r.tool_error = "unrecognized verifier output: " + parsed.error().excerpt;
        return r;
    }
    r.verified_count = parsed->verified;
    r.error_count = parsed->errors;
    r.diagnostics = std::move(parsed->diagnostics);
    if (parsed->timeouts > 0) {
        r.status = VerifyStatus::Timeout;
    } else if (!parsed->front_end_failure && parsed->errors == 0 && p.exit_code == 0) {
        r.status = VerifyStatus::Pass;
    } else {
        r.status = VerifyStatus::Fail;
    }
    return r;
}

// `run` prints the verifier summary (after an optional blank line) before the program's own output.
std::optional<std::size_t> leading_summary_end(std::string_view out) {
    std::size_t pos = 0;
    while (pos < out.size() && (out[pos] == '\n' || out[pos] == '\r')) ++pos;
    if (out.substr(pos, kSummary.size()) != kSummary) return std::nullopt;
    auto nl = out.find('\n', pos);
    return nl == std::string_view::npos ? out.size() : nl + 1;
}

RunReport external_run(std::string_view source, const BackendConfig& cfg) {
    RunReport r;
    Workspace ws(cfg, source);
    auto p = run_process(build_argv(cfg, cfg.run_args, ws.file), ws.dir.path(), limits_of(cfg));
    r.duration = p.seconds;
    r.stderr_bytes = p.err;
    if (p.exec_failed) {
        r.status = RunStatus::ToolError;
        r.tool_error = start_failure(cfg, p.exec_errno);
        return r;
    }
    if (p.timed_out) {
        r.status = RunStatus::Timeout;
        r.timed_out = true;
        r.exit_status = kKilledExitStatus;
        r.stdout_bytes = p.out;
        return r;
    }
    r.exit_status = p.term_signal != 0 ? -p.term_signal : p.exit_code;

    if (auto end = leading_summary_end(p.out)) {
        auto summary = parse_summary(std::string_view(p.out).substr(0, *end));
        if (summary && (summary->errors > 0 || summary->timeouts > 0)) {
            r.status = RunStatus::CompileFailed;
            if (auto parsed = parse_verifier_output(p.out)) r.diagnostics = std::move(parsed->diagnostics);
            return r;
        }
        r.status = RunStatus::Ok;
        r.stdout_bytes = p.out.substr(*end);
        return r;
    }
    if (p.exit_code != 0) {
        auto parsed = parse_verifier_output(p.out + "\n" + p.err);
        if (parsed && (parsed->front_end_failure || parsed->errors > 0)) {
            r.status = RunStatus::CompileFailed;
            r.diagnostics = std::move(parsed->diagnostics);
            return r;
        }
    }
    r.status = RunStatus::Ok;
    r.stdout_bytes = p.out;
    return r;
}

}  // namespace

std::string mock_directive_lines(std::string_view source) {
    std::string out;
    for (auto line : split_lines(source)) {
        if (line.find("// MOCK-") == std::string_view::npos) continue;
        out.append(line);
        out += '\n';
    }
    return out;
}

VerificationReport verify(std::string_view source, const BackendConfig& cfg) {
    if (!cfg.valid()) {
        VerificationReport r;
        r.tool_error = "invalid backend configuration";
        return r;
    }
    return cfg.backend == BackendKind::Mock ? mock_verify(source, cfg) : external_verify(source, cfg);
}

RunReport run_program(std::string_view source, const BackendConfig& cfg) {
    if (!cfg.valid()) {
        RunReport r;
        r.tool_error = "invalid backend configuration";
        return r;
    }
    return cfg.backend == BackendKind::Mock ? mock_run(source, cfg) : external_run(source, cfg);
}

}  // namespace verigrade::backend
