#include <charconv>
#include <fstream>
#include <sstream>

#include "verigrade/gateway.hpp"

namespace verigrade::gateway {

namespace fs = std::filesystem;

std::set<std::string> GatewayConfig::students() const {
    std::set<std::string> out;
    for (const auto& [token, p] : tokens)
        if (p.role == Role::Student) out.insert(p.id);
    return out;
}

backend::BackendConfig GatewayConfig::backend_config() const {
    auto cfg = backend::BackendConfig::from_env();
    cfg.backend = backend;
    if (!verifier_cmd.empty()) cfg.verifier_command = verifier_cmd;
    cfg.timeout = std::chrono::seconds(timeout_secs);
    return cfg;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Strips a trailing comment outside quotes and unquotes the value.
std::optional<std::string> scalar(std::string_view raw) {
    raw = trim(raw);
    if (!raw.empty() && raw.front() == '"') {
        auto close = raw.find('"', 1);
        if (close == std::string_view::npos) return std::nullopt;
        auto rest = trim(raw.substr(close + 1));
        if (!rest.empty() && rest.front() != '#') return std::nullopt;
        return std::string(raw.substr(1, close - 1));
    }
    auto hash = raw.find('#');
    return std::string(trim(raw.substr(0, hash)));
}

template <typename T>
bool number(const std::string& s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Expected<GatewayConfig, std::string> parse_config(std::string_view text, const fs::path& base_dir) {
    GatewayConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    std::string section;
    int lineno = 0;
    auto fail = [&](const std::string& msg) { return unexpected("line " + std::to_string(lineno) + ": " + msg); };

    while (std::getline(in, line)) {
        ++lineno;
        auto l = trim(line);
        if (l.empty() || l.front() == '#') continue;
        if (l.front() == '[') {
            if (l.back() != ']') return fail("malformed section header");
            section = std::string(trim(l.substr(1, l.size() - 2)));
            if (section != "tokens") return fail("unknown section [" + section + "]");
            continue;
        }
        auto eq = l.find('=');
        if (eq == std::string_view::npos) return fail("expected key = value");
        auto key = scalar(l.substr(0, eq));
        auto value = scalar(l.substr(eq + 1));
        if (!key || !value || key->empty()) return fail("malformed key or value");

        if (section == "tokens") {
            auto colon = value->find(':');
            if (colon == std::string::npos) return fail("token value must be student:<id> or instructor:<id>");
            auto role = value->substr(0, colon);
            auto id = value->substr(colon + 1);
            if (id.empty()) return fail("empty principal id");
            if (role == "student") cfg.tokens[*key] = {Role::Student, id};
            else if (role == "instructor") cfg.tokens[*key] = {Role::Instructor, id};
            else return fail("unknown role '" + role + "'");
            continue;
        }

        const auto& k = *key;
        const auto& v = *value;
        bool ok = true;
        if (k == "port") ok = number(v, cfg.port) && cfg.port >= 0 && cfg.port < 65536;
        else if (k == "bank_dir") cfg.bank_dir = base_dir / v;
        else if (k == "log_path") cfg.log_path = base_dir / v;
        else if (k == "current_week") ok = number(v, cfg.current_week);
        else if (k == "verifier_cmd") cfg.verifier_cmd = v;
        else if (k == "timeout_secs") ok = number(v, cfg.timeout_secs) && cfg.timeout_secs > 0;
        else if (k == "workers") ok = number(v, cfg.workers) && cfg.workers > 0 && cfg.workers <= Gateway::kMaxWorkers;
        else if (k == "band_low") ok = number(v, cfg.band_low);
        else if (k == "band_high") ok = number(v, cfg.band_high);
        else if (k == "mastered") ok = number(v, cfg.mastered);
        else if (k == "max_answer_bytes") ok = number(v, cfg.max_answer_bytes) && cfg.max_answer_bytes > 0;
        else if (k == "backend") {
            if (v == "mock") cfg.backend = backend::BackendKind::Mock;
            else if (v == "external") cfg.backend = backend::BackendKind::External;
            else ok = false;
        } else {
            return fail("unknown key '" + k + "'");
        }
        if (!ok) return fail("invalid value for '" + k + "'");
    }
    if (!cfg.band().valid()) return unexpected(std::string("band must satisfy 0 <= band_low < band_high <= mastered <= 1"));
    return cfg;
}

Expected<GatewayConfig, std::string> load_config(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return unexpected("cannot read config " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), file.parent_path());
}

}  // namespace verigrade::gateway
