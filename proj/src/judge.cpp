#include "verigrade/judge.hpp"

#include <sodium.h>

#include <fstream>
#include <sstream>

namespace verigrade::judge {

using backend::RunStatus;
using backend::VerifyStatus;

namespace {

std::string counts(const backend::VerificationReport& r) {
    return std::to_string(r.verified_count) + " verified, " + std::to_string(r.error_count) + " errors";
}

std::string fold_crlf(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r' && i + 1 < s.size() && s[i + 1] == '\n') continue;
        out += s[i];
    }
    return out;
}

}  // namespace

bool output_matches(std::string_view expected, std::string_view actual, bool normalize_eol) {
    if (!normalize_eol) return expected == actual;
    return expected == fold_crlf(actual);
}

AttemptVerdict judge(const bank::Exercise& exercise, const AttemptEvidence& ev) {
    AttemptVerdict v;
    const auto& rep = ev.verification;
    v.verified_count = rep.verified_count;
    v.error_count = rep.error_count;

    std::string fb;
    bool verified = false;
    switch (rep.status) {
        case VerifyStatus::Timeout: fb = "verification timed out"; break;
        case VerifyStatus::ToolError: fb = "verifier unavailable, try again later"; break;
        case VerifyStatus::Pass:
        case VerifyStatus::Fail:
            fb = counts(rep);
            verified = rep.status == VerifyStatus::Pass;
            break;
    }
    if (verified && exercise.check.required_verified_min && rep.verified_count < *exercise.check.required_verified_min) {
        fb += "; at least " + std::to_string(*exercise.check.required_verified_min) + " must verify";
        verified = false;
    }

    bool completed = false;
    switch (exercise.check.mode) {
        case bank::CheckMode::VerifyOnly: completed = verified; break;

        case bank::CheckMode::VerifyAndRun: {
            bool short_enough = true;
            if (ev.char_limit && !ev.char_limit->pass) {
                short_enough = false;
                fb += "; program too long (" + std::to_string(ev.char_limit->count) + " characters, limit " +
                      std::to_string(ev.char_limit->limit) + ")";
            }
            bool ran_ok = false;
            if (ev.run) {
                switch (ev.run->status) {
                    case RunStatus::Timeout: fb += "; program timed out"; break;
                    case RunStatus::CompileFailed: fb += "; program did not compile"; break;
                    case RunStatus::ToolError: fb += "; runner unavailable"; break;
                    case RunStatus::Ok:
                        if (ev.run->exit_status != 0) {
                            fb += "; program exited with status " + std::to_string(ev.run->exit_status);
                        } else if (!exercise.expected_stdout ||
                                   !output_matches(*exercise.expected_stdout, ev.run->stdout_bytes,
                                                   exercise.check.normalize_eol)) {
                            fb += "; output mismatch";
                        } else {
                            ran_ok = true;
                        }
                        break;
                }
            }
            completed = verified && short_enough && ran_ok;
            break;
        }

        case bank::CheckMode::OracleSpec:
            if (ev.oracle_error) {
                fb += "; " + ev.oracle_error->message;
            } else if (ev.oracle) {
                const auto& o = *ev.oracle;
                if (o.consistency_report) fb += std::string("; consistency ") + (o.consistent ? "ok" : "failed");
                if (o.capture_report) fb += std::string("; capture ") + (o.captures ? "ok" : "failed");
                completed = o.consistent && o.captures;
            }
            break;
    }
    if (fb.size() > kMaxFeedback) fb.resize(kMaxFeedback);
    v.feedback = std::move(fb);
    v.completed = completed;
    return v;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[crypto_hash_sha256_BYTES];
    crypto_hash_sha256(digest, reinterpret_cast<const unsigned char*>(data.data()), data.size());
    char hex[crypto_hash_sha256_BYTES * 2 + 1];
    sodium_bin2hex(hex, sizeof hex, digest, sizeof digest);
    return hex;
}

namespace {

std::optional<std::string> slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

AttemptOutcome evaluate_attempt(const bank::Exercise& exercise, std::string_view answer,
                                const backend::BackendConfig& base_cfg) {
    auto cfg = base_cfg;
    if (exercise.timeout_secs) cfg.timeout = std::chrono::seconds(*exercise.timeout_secs);

    AttemptOutcome out;
    out.submission_hash = sha256_hex(answer);
    auto source = bank::splice(exercise.tmpl, answer);
    auto& ev = out.evidence;
    ev.verification = backend::verify(source, cfg);

    switch (exercise.check.mode) {
        case bank::CheckMode::VerifyOnly: break;
        case bank::CheckMode::VerifyAndRun:
            if (exercise.char_limit) ev.char_limit = bank::check_char_limit(answer, *exercise.char_limit);
            if (ev.verification.status == VerifyStatus::Pass) ev.run = backend::run_program(source, cfg);
            break;
        case bank::CheckMode::OracleSpec: {
            std::optional<std::string> text;
            if (exercise.hidden_oracle) text = slurp(*exercise.hidden_oracle);
            if (!text) {
                ev.oracle_error = oracle::OracleError{oracle::OracleErrorKind::ParseFailed, "question is misconfigured"};
                break;
            }
            std::optional<std::string_view> target;
            if (exercise.oracle_target) target = *exercise.oracle_target;
            auto asset = oracle::load_oracle_asset(*text, target);
            if (!asset) {
                ev.oracle_error = oracle::OracleError{asset.error().kind, "question is misconfigured"};
                break;
            }
            auto verdict = oracle::check_spec(source, *asset, cfg,
                                              {exercise.check.oracle_consistency, exercise.check.oracle_capture});
            if (verdict) ev.oracle = std::move(*verdict);
            else ev.oracle_error = verdict.error();
            break;
        }
    }
    out.verdict = judge(exercise, ev);
    return out;
}

}  // namespace verigrade::judge
