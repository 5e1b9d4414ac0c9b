#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>

#include "verigrade/backend.hpp"
#include "verigrade/exercise.hpp"
#include "verigrade/expected.hpp"
#include "verigrade/grading.hpp"
#include "verigrade/progress.hpp"

namespace verigrade::gateway {

enum class Role { Student, Instructor };

struct Principal {
    Role role = Role::Student;
    std::string id;
};

struct GatewayConfig {
    int port = 8080;
    std::filesystem::path bank_dir = "bank";
    std::filesystem::path log_path = "events.log";
    int current_week = 1;
    std::string verifier_cmd = "dafny";
    int timeout_secs = 30;
    int workers = 4;
    double band_low = 0.10;
    double band_high = 0.25;
    double mastered = 0.80;
    backend::BackendKind backend = backend::BackendKind::External;
    std::size_t max_answer_bytes = 64 * 1024;
    std::map<std::string, Principal> tokens;  // bearer token -> principal

    std::set<std::string> students() const;
    grading::PickBand band() const { return {band_low, band_high, mastered}; }
    backend::BackendConfig backend_config() const;
};

/// `key = value` lines, `#` comments, and a `[tokens]` section mapping
/// tokens to "student:<id>" or "instructor:<id>". Relative paths are
/// resolved against `base_dir`.
Expected<GatewayConfig, std::string> parse_config(std::string_view text, const std::filesystem::path& base_dir);
Expected<GatewayConfig, std::string> load_config(const std::filesystem::path& file);

struct Response {
    int status = 200;
    std::string body;  // JSON
};

/// Route handlers, independent of any HTTP library. `authorization` is the
/// raw Authorization header value, if any.
class Gateway {
public:
    static constexpr std::ptrdiff_t kMaxWorkers = 256;

    Gateway(GatewayConfig cfg, bank::Bank bank, std::unique_ptr<progress::ProgressService> progress,
            backend::BackendConfig backend);

    Response list_questions(std::optional<std::string_view> authorization) const;
    Response get_question(std::optional<std::string_view> authorization, std::string_view id) const;
    Response post_attempt(std::optional<std::string_view> authorization, std::string_view id, std::string_view body);
    Response overview(std::optional<std::string_view> authorization) const;

    const GatewayConfig& config() const { return cfg_; }
    const bank::Bank& bank() const { return bank_; }
    progress::ProgressService& progress() { return *progress_; }

    /// Replaces the clock used to stamp attempts (UTC seconds).
    void set_clock(std::function<progress::Timestamp()> now) { now_ = std::move(now); }

private:
    std::optional<Principal> authenticate(std::optional<std::string_view> authorization) const;
    bool released(const bank::Exercise& ex) const { return ex.week <= cfg_.current_week; }

    GatewayConfig cfg_;
    bank::Bank bank_;
    std::unique_ptr<progress::ProgressService> progress_;
    backend::BackendConfig backend_;
    std::counting_semaphore<kMaxWorkers> workers_;
    std::mutex inflight_mu_;
    std::set<std::string> inflight_;
    std::function<progress::Timestamp()> now_;
};

/// HTTP/1.1 front end for a Gateway.
class HttpServer {
public:
    explicit HttpServer(Gateway& gateway);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to host:port; port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called.
    bool listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace verigrade::gateway
