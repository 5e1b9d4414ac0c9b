#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace verigrade::backend {

struct ProcessLimits {
    std::chrono::milliseconds timeout{30'000};
    std::chrono::milliseconds grace{2'000};  // time allowed to drain pipes after a kill
    std::size_t max_memory = 0;              // RLIMIT_DATA bytes, 0 = unlimited
};

struct ProcessResult {
    bool exec_failed = false;
    int exec_errno = 0;
    int exit_code = -1;    // valid when exited normally
    int term_signal = 0;   // non-zero when killed by a signal
    bool timed_out = false;
    std::string out;
    std::string err;
    double seconds = 0.0;
};

/// Runs argv in its own process group with cwd as working directory.
/// The whole group is killed on timeout and again after exit, so no
/// descendant outlives the call.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          const ProcessLimits& limits);

/// mkdtemp-backed directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::filesystem::path& parent, const std::string& prefix = "verigrade-");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace verigrade::backend
