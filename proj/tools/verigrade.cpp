// verigrade command-line front end.

#include <signal.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "verigrade/exercise.hpp"
#include "verigrade/gateway.hpp"
#include "verigrade/grading.hpp"
#include "verigrade/judge.hpp"
#include "verigrade/oracle.hpp"
#include "verigrade/progress.hpp"
#include "verigrade/syntax/parser.hpp"
#include "verigrade/testmode.hpp"

namespace fs = std::filesystem;
using namespace verigrade;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool write_file(const fs::path& p, std::string_view data) {
    std::ofstream out(p, std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    return static_cast<bool>(out);
}

std::optional<bank::Bank> load_bank_or_report(const fs::path& dir) {
    auto b = bank::load_bank(dir);
    if (b) return std::move(*b);
    for (const auto& e : b.error())
        std::cerr << bank::to_string(e.kind) << ": " << e.file.string() << ": " << e.message << "\n";
    return std::nullopt;
}

backend::BackendConfig backend_from(bool mock, int timeout_secs) {
    auto cfg = backend::BackendConfig::from_env();
    if (mock) cfg.backend = backend::BackendKind::Mock;
    if (timeout_secs > 0) cfg.timeout = std::chrono::seconds(timeout_secs);
    return cfg;
}

// --- bank validate ---

struct BankArgs {
    std::string dir;
    bool self_check = false;
    bool mock = false;
};

int bank_validate(const BankArgs& a) {
    auto b = load_bank_or_report(a.dir);
    if (!b) return kFailed;
    int failures = 0;
    if (a.self_check) {
        auto cfg = backend_from(a.mock, 0);
        for (const auto& [id, ex] : b->exercises()) {
            if (ex.check.mode != bank::CheckMode::OracleSpec || !ex.hidden_oracle) continue;
            auto text = read_file(*ex.hidden_oracle);
            std::optional<std::string_view> target;
            if (ex.oracle_target) target = *ex.oracle_target;
            auto asset = text ? oracle::load_oracle_asset(*text, target)
                              : unexpected(oracle::OracleError{oracle::OracleErrorKind::ParseFailed, "unreadable"});
            if (!asset) {
                std::cerr << id << ": oracle asset invalid: " << asset.error().message << "\n";
                ++failures;
                continue;
            }
            auto v = oracle::check_spec(*text, *asset, cfg, {ex.check.oracle_consistency, ex.check.oracle_capture});
            if (!v || !v->consistent || !v->captures) {
                std::cerr << id << ": oracle self-check failed"
                          << (v ? "" : ": " + v.error().message) << "\n";
                ++failures;
            } else {
                std::cout << id << ": oracle self-check passed\n";
            }
        }
    }
    std::cout << b->size() << " exercises valid";
    if (failures) std::cout << ", " << failures << " self-check failures";
    std::cout << "\n";
    return failures ? kFailed : kOk;
}

// --- check ---

struct CheckArgs {
    std::string file;
    std::string exercise;
    std::string bank_dir;
    bool mock = false;
    bool json = false;
    int timeout = 0;
};

int check(const CheckArgs& a) {
    auto b = load_bank_or_report(a.bank_dir);
    if (!b) return kFailed;
    const auto* ex = b->find(a.exercise);
    if (!ex) {
        std::cerr << "unknown exercise '" << a.exercise << "'\n";
        return kFailed;
    }
    auto answer = read_file(a.file);
    if (!answer) {
        std::cerr << "cannot read " << a.file << "\n";
        return kFailed;
    }
    auto outcome = judge::evaluate_attempt(*ex, *answer, backend_from(a.mock, a.timeout));
    const auto& v = outcome.verdict;
    nlohmann::json j = {{"completed", v.completed},
                        {"feedback", v.feedback},
                        {"verified_count", v.verified_count},
                        {"error_count", v.error_count}};
    if (a.json) std::cout << j.dump() << "\n";
    else std::cout << v.feedback << "\n" << j.dump(2) << "\n";
    return v.completed ? kOk : kFailed;
}

// --- testmode ---

struct TestmodeArgs {
    std::string in;
    std::string out;
    testmode::TransformOptions opts;
    bool report = false;
};

int run_testmode(const TestmodeArgs& a) {
    auto src = read_file(a.in);
    if (!src) {
        std::cerr << "cannot read " << a.in << "\n";
        return kFailed;
    }
    auto unit = syntax::parse_unit(*src);
    if (!unit) {
        std::cerr << a.in << ": " << unit.error().message << "\n";
        return kFailed;
    }
    auto after = testmode::to_test_mode(*unit, a.opts);
    if (!write_file(a.out, syntax::emit(after))) {
        std::cerr << "cannot write " << a.out << "\n";
        return kFailed;
    }
    auto r = testmode::transform_report(*unit, after, a.opts);
    if (a.report) {
        const auto& c = r.rewritten;
        std::cerr << "asserts " << c.asserts << ", assumes " << c.assumes << ", requires " << c.preconditions
                  << ", ensures " << c.postconditions << ", invariants " << c.invariants << "\n";
    }
    for (const auto& s : r.skipped) {
        std::cerr << "skipped " << syntax::to_string(s.kind) << " in " << s.decl_name;
        if (s.offset) std::cerr << " at byte " << *s.offset;
        std::cerr << ": " << testmode::to_string(s.reason) << "\n";
    }
    return kOk;
}

// --- grades export ---

struct GradesArgs {
    std::string scheme;
    std::string config;
    std::string bank_dir;
    std::string log;
    std::string roster;
    std::string manual;
    std::string out;
};

int grades_export(GradesArgs a) {
    std::set<std::string> cohort;
    if (!a.config.empty()) {
        auto cfg = gateway::load_config(a.config);
        if (!cfg) {
            std::cerr << cfg.error() << "\n";
            return kFailed;
        }
        if (a.bank_dir.empty()) a.bank_dir = cfg->bank_dir.string();
        if (a.log.empty()) a.log = cfg->log_path.string();
        cohort = cfg->students();
    }
    if (a.bank_dir.empty() || a.log.empty()) {
        std::cerr << "grades export needs --bank and --log (or --config)\n";
        return kUsage;
    }
    std::optional<grading::GradeScheme> scheme;
    if (a.scheme == "default") {
        scheme = grading::GradeScheme::course_default();
    } else {
        auto text = read_file(a.scheme);
        if (!text) {
            std::cerr << "cannot read " << a.scheme << "\n";
            return kFailed;
        }
        auto s = grading::GradeScheme::from_json(*text);
        if (!s) {
            std::cerr << "invalid scheme: " << s.error().message << "\n";
            return kFailed;
        }
        scheme = std::move(*s);
    }
    auto b = load_bank_or_report(a.bank_dir);
    if (!b) return kFailed;

    auto replay = progress::EventLog::replay(a.log);
    if (!a.roster.empty()) {
        auto text = read_file(a.roster);
        if (!text) {
            std::cerr << "cannot read " << a.roster << "\n";
            return kFailed;
        }
        std::istringstream in(*text);
        std::string line;
        cohort.clear();
        while (std::getline(in, line))
            if (!line.empty() && line != "\r") cohort.insert(line.back() == '\r' ? line.substr(0, line.size() - 1) : line);
    } else if (cohort.empty()) {
        for (const auto& ev : replay.events) cohort.insert(ev.student);
    }
    grading::ManualScores manual;
    if (!a.manual.empty()) {
        auto text = read_file(a.manual);
        auto parsed = text ? grading::parse_manual_scores(*text) : unexpected(std::string("cannot read ") + a.manual);
        if (!parsed) {
            std::cerr << parsed.error() << "\n";
            return kFailed;
        }
        manual = std::move(*parsed);
    }

    std::set<std::string> ids;
    for (const auto& [id, ex] : b->exercises()) ids.insert(id);
    progress::ProgressStore store(cohort, ids);
    for (const auto& ev : replay.events) (void)store.record_attempt(ev);

    auto exported = grading::export_grades(cohort, *scheme, *b, store, manual);
    std::string warnings;
    for (const auto& w : exported.warnings) warnings += "warning: " + w + "\n";
    if (a.out.empty()) {
        std::cout << exported.csv;
    } else {
        if (!write_file(a.out, exported.csv)) {
            std::cerr << "cannot write " << a.out << "\n";
            return kFailed;
        }
        if (!warnings.empty()) write_file(a.out + ".warnings", warnings);
    }
    std::cerr << warnings;
    return kOk;
}

// --- serve ---

struct ServeArgs {
    std::string config;
    std::string bank_dir;
    std::string log;
    std::string host = "127.0.0.1";
    int port = -1;
    int week = 0;
    bool mock = false;
    std::vector<std::string> tokens;
};

int serve(const ServeArgs& a) {
    gateway::GatewayConfig cfg;
    if (!a.config.empty()) {
        auto c = gateway::load_config(a.config);
        if (!c) {
            std::cerr << c.error() << "\n";
            return kFailed;
        }
        cfg = std::move(*c);
    }
    if (!a.bank_dir.empty()) cfg.bank_dir = a.bank_dir;
    if (!a.log.empty()) cfg.log_path = a.log;
    if (a.port >= 0) cfg.port = a.port;
    if (a.week > 0) cfg.current_week = a.week;
    if (a.mock) cfg.backend = backend::BackendKind::Mock;
    for (const auto& t : a.tokens) {
        auto eq = t.find('=');
        auto colon = t.find(':', eq == std::string::npos ? 0 : eq);
        if (eq == std::string::npos || colon == std::string::npos) {
            std::cerr << "--token expects TOKEN=student:ID or TOKEN=instructor:ID\n";
            return kUsage;
        }
        auto role = t.substr(eq + 1, colon - eq - 1);
        if (role != "student" && role != "instructor") {
            std::cerr << "unknown role '" << role << "'\n";
            return kUsage;
        }
        cfg.tokens[t.substr(0, eq)] = {role == "student" ? gateway::Role::Student : gateway::Role::Instructor,
                                       t.substr(colon + 1)};
    }

    auto b = load_bank_or_report(cfg.bank_dir);
    if (!b) return kFailed;
    std::set<std::string> ids;
    for (const auto& [id, ex] : b->exercises()) ids.insert(id);
    auto svc = progress::ProgressService::open(cfg.students(), ids, cfg.log_path);
    if (!svc) {
        std::cerr << svc.error() << "\n";
        return kFailed;
    }

    // Handle termination signals on a dedicated thread.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    auto backend = cfg.backend_config();
    gateway::Gateway gw(cfg, std::move(*b), std::move(*svc), backend);
    gateway::HttpServer server(gw);
    int port = server.bind(a.host, cfg.port);
    if (port < 0) {
        std::cerr << "cannot bind " << a.host << ":" << cfg.port << "\n";
        return kFailed;
    }
    std::thread waiter([&server, set] {
        int sig = 0;
        sigwait(&set, &sig);
        server.stop();
    });
    std::cout << "listening on http://" << a.host << ":" << port << std::endl;
    bool ok = server.listen();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verigrade: assessment server and tools for verification exercises"};
    app.require_subcommand(1);

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--config", serve_args.config, "verigrade.toml-style config file");
    serve_cmd->add_option("--bank", serve_args.bank_dir, "Exercise bank directory");
    serve_cmd->add_option("--log", serve_args.log, "Event log file");
    serve_cmd->add_option("--port", serve_args.port, "Port (0 picks a free one)");
    serve_cmd->add_option("--host", serve_args.host, "Bind address");
    serve_cmd->add_option("--week", serve_args.week, "Current week");
    serve_cmd->add_option("--token", serve_args.tokens, "TOKEN=student:ID or TOKEN=instructor:ID");
    serve_cmd->add_flag("--mock", serve_args.mock, "Use the mock verifier backend");

    auto* bank_cmd = app.add_subcommand("bank", "Exercise bank administration");
    bank_cmd->require_subcommand(1);
    BankArgs bank_args;
    auto* validate_cmd = bank_cmd->add_subcommand("validate", "Validate every exercise in a bank");
    validate_cmd->add_option("dir", bank_args.dir, "Bank directory")->required();
    validate_cmd->add_flag("--self-check", bank_args.self_check, "Check every oracle against its own spec");
    validate_cmd->add_flag("--mock", bank_args.mock, "Use the mock verifier backend");

    CheckArgs check_args;
    auto* check_cmd = app.add_subcommand("check", "Judge a local answer file");
    check_cmd->add_option("file", check_args.file, "Answer file")->required();
    check_cmd->add_option("--exercise", check_args.exercise, "Exercise id")->required();
    check_cmd->add_option("--bank", check_args.bank_dir, "Bank directory")->required();
    check_cmd->add_option("--timeout", check_args.timeout, "Verifier timeout in seconds");
    check_cmd->add_flag("--mock", check_args.mock, "Use the mock verifier backend");
    check_cmd->add_flag("--json", check_args.json, "Print the response as JSON");

    TestmodeArgs tm;
    bool no_requires = false, no_ensures = false, no_asserts = false, no_assumes = false, no_invariants = false;
    auto* tm_cmd = app.add_subcommand("testmode", "Rewrite specifications into runtime checks");
    tm_cmd->add_option("input", tm.in, "Input program")->required()->check(CLI::ExistingFile);
    tm_cmd->add_option("-o,--output", tm.out, "Output program")->required();
    tm_cmd->add_flag("--no-requires", no_requires);
    tm_cmd->add_flag("--no-ensures", no_ensures);
    tm_cmd->add_flag("--no-asserts", no_asserts);
    tm_cmd->add_flag("--no-assumes", no_assumes);
    tm_cmd->add_flag("--no-invariants", no_invariants);
    tm_cmd->add_flag("--report", tm.report, "Print rewrite counts");

    auto* grades_cmd = app.add_subcommand("grades", "Grade computation");
    grades_cmd->require_subcommand(1);
    GradesArgs ga;
    auto* export_cmd = grades_cmd->add_subcommand("export", "Export a grades CSV");
    export_cmd->add_option("--scheme", ga.scheme, "Grade scheme JSON file, or 'default'")->required();
    export_cmd->add_option("--config", ga.config, "Server config (bank, log and roster)");
    export_cmd->add_option("--bank", ga.bank_dir, "Bank directory");
    export_cmd->add_option("--log", ga.log, "Event log");
    export_cmd->add_option("--roster", ga.roster, "File with one student id per line");
    export_cmd->add_option("--manual", ga.manual, "CSV of student_id,component,percent");
    export_cmd->add_option("-o,--output", ga.out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*serve_cmd) return serve(serve_args);
    if (*validate_cmd) return bank_validate(bank_args);
    if (*check_cmd) return check(check_args);
    if (*tm_cmd) {
        tm.opts = {!no_requires, !no_ensures, !no_asserts, !no_assumes, !no_invariants};
        return run_testmode(tm);
    }
    if (*export_cmd) return grades_export(ga);
    return kUsage;
}
