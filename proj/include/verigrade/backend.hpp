#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "verigrade/expected.hpp"

namespace verigrade::backend {

enum class VerifyStatus { Pass, Fail, Timeout, ToolError };

struct Diagnostic {
    std::optional<int> line;
    std::optional<int> column;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct VerificationReport {
    VerifyStatus status = VerifyStatus::ToolError;
    int verified_count = 0;
    int error_count = 0;
    std::vector<Diagnostic> diagnostics;
    double duration = 0.0;  // seconds
    std::string tool_error;  // set for ToolError

    friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

enum class RunStatus { Ok, CompileFailed, Timeout, ToolError };

inline constexpr int kKilledExitStatus = -9;

struct RunReport {
    RunStatus status = RunStatus::ToolError;
    int exit_status = 0;  // kKilledExitStatus when timed out
    std::string stdout_bytes;
    std::string stderr_bytes;
    double duration = 0.0;
    bool timed_out = false;
    std::vector<Diagnostic> diagnostics;  // compile failures
    std::string tool_error;

    friend bool operator==(const RunReport&, const RunReport&) = default;
};

enum class BackendKind { External, Mock };

struct BackendConfig {
    BackendKind backend = BackendKind::External;
    std::string verifier_command = "dafny";
    // `{file}` is replaced by the path of the program under test.
    std::vector<std::string> verify_args = {"verify", "{file}"};
    std::vector<std::string> run_args = {"run", "{file}"};
    std::chrono::milliseconds timeout{30'000};
    std::chrono::milliseconds grace{2'000};
    std::size_t max_memory = std::size_t{4} << 30;
    std::filesystem::path work_root = std::filesystem::temp_directory_path();

    /// Defaults overridden by VERIGRADE_VERIFIER_CMD and VERIGRADE_TIMEOUT_SECS.
    static BackendConfig from_env();
    bool valid() const { return timeout.count() > 0 && !verifier_command.empty(); }
};

struct ParsedOutput {
    int verified = 0;
    int errors = 0;
    int timeouts = 0;
    bool front_end_failure = false;  // parse or resolution errors, nothing verified
    std::vector<Diagnostic> diagnostics;
};

struct ToolOutputUnrecognized {
    std::string excerpt;  // first line of the output, truncated
};

/// Reads the verifier's summary line, tolerating any lines before it.
Expected<ParsedOutput, ToolOutputUnrecognized> parse_verifier_output(std::string_view text);

/// Lines of source that carry mock directives, each newline-terminated.
/// Harness builders copy them so mock runs stay scriptable.
std::string mock_directive_lines(std::string_view source);

VerificationReport verify(std::string_view source, const BackendConfig& cfg);
RunReport run_program(std::string_view source, const BackendConfig& cfg);

const char* to_string(VerifyStatus s);
const char* to_string(RunStatus s);

}  // namespace verigrade::backend
