#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "support.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

// Runs the CLI through the shell, stderr folded into stdout unless redirected.
Result cli(const std::vector<std::string>& args, const std::string& redirect = "2>&1") {
    std::string cmd = quote(VERIGRADE_CLI);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " " + redirect;
    Result r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string data(const std::string& rel) { return (testing::data_dir() / rel).string(); }

// A `verigrade serve` child with its stdout on a pipe.
class ServeProcess {
public:
    explicit ServeProcess(const std::vector<std::string>& args) {
        int fds[2];
        REQUIRE(::pipe(fds) == 0);
        pid_ = ::fork();
        REQUIRE(pid_ >= 0);
        if (pid_ == 0) {
            ::dup2(fds[1], STDOUT_FILENO);
            ::close(fds[0]);
            ::close(fds[1]);
            std::vector<char*> argv;
            std::string exe = VERIGRADE_CLI;
            std::string serve = "serve";
            argv.push_back(exe.data());
            argv.push_back(serve.data());
            std::vector<std::string> copy = args;
            for (auto& a : copy) argv.push_back(a.data());
            argv.push_back(nullptr);
            ::execv(exe.c_str(), argv.data());
            ::_exit(127);
        }
        ::close(fds[1]);
        out_ = ::fdopen(fds[0], "r");
        char line[256] = {};
        if (std::fgets(line, sizeof line, out_)) {
            std::string l = line;
            auto colon = l.rfind(':');
            if (l.rfind("listening on http://", 0) == 0 && colon != std::string::npos) port_ = std::stoi(l.substr(colon + 1));
        }
    }
    ~ServeProcess() {
        if (pid_ > 0) kill(SIGKILL);
        if (out_) std::fclose(out_);
    }
    int port() const { return port_; }
    int kill(int sig) {
        ::kill(pid_, sig);
        int status = 0;
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
        return status;
    }

private:
    pid_t pid_ = -1;
    FILE* out_ = nullptr;
    int port_ = -1;
};

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"check", "x.dfy"}).code == 2);
    CHECK(cli({"grades", "export", "--scheme", "default"}).code == 2);
    auto help = cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("serve") != std::string::npos);
}

TEST_CASE("bank validate") {
    auto ok = cli({"bank", "validate", data("bank")}, "2>/dev/null");
    CHECK(ok.code == 0);
    CHECK(ok.out == "11 exercises valid\n");

    auto dup = cli({"bank", "validate", data("bad_banks/duplicate")});
    CHECK(dup.code == 1);
    CHECK(dup.out.find("first.exercise") != std::string::npos);
    CHECK(dup.out.find("second.exercise") != std::string::npos);

    auto malformed = cli({"bank", "validate", data("bad_banks/malformed")});
    CHECK(malformed.code == 1);
    CHECK(malformed.out.find("two_holes.exercise") != std::string::npos);

    auto self = cli({"bank", "validate", data("bank"), "--self-check", "--mock"});
    CHECK(self.code == 0);
    CHECK(self.out.find("addition_spec: oracle self-check passed") != std::string::npos);

    CHECK(cli({"bank", "validate", data("no_such_dir")}).code == 1);
}

TEST_CASE("check judges a local answer") {
    testing::Scratch dir;
    testing::write_file(dir / "xor.dfy", "!=");
    auto r = cli({"check", (dir / "xor.dfy").string(), "--exercise", "fptp", "--bank", data("bank"), "--mock"},
                 "2>/dev/null");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("2 verified, 0 errors\n", 0) == 0);

    testing::write_file(dir / "bad.dfy", "|| // MOCK-VERIFY: verified=1 errors=1\n");
    auto bad = cli({"check", (dir / "bad.dfy").string(), "--exercise", "fptp", "--bank", data("bank"), "--mock",
                    "--json"},
                   "2>/dev/null");
    CHECK(bad.code == 1);
    auto j = json::parse(bad.out);
    CHECK(j["completed"] == false);
    CHECK(j["error_count"] == 1);

    auto song = cli({"check", data("answers/bottles.dfy"), "--exercise", "bottles", "--bank", data("bank"), "--mock"},
                    "2>/dev/null");
    CHECK(song.code == 0);

    CHECK(cli({"check", (dir / "xor.dfy").string(), "--exercise", "nope", "--bank", data("bank"), "--mock"}).code == 1);
}

TEST_CASE("testmode writes the rewritten program") {
    testing::Scratch dir;
    auto out = dir / "out.dfy";
    auto r = cli({"testmode", data("testmode/add_extended.dfy"), "-o", out.string(), "--report"});
    CHECK(r.code == 0);
    CHECK(r.out.find("asserts 3, assumes 0, requires 1, ensures 0, invariants 0") != std::string::npos);
    auto text = testing::read_file(out);
    CHECK(text.find("expect x >= 0;") != std::string::npos);
    CHECK(text.find("assert") == std::string::npos);

    auto loops = cli({"testmode", data("testmode/loops.dfy"), "-o", (dir / "loops.dfy").string()});
    CHECK(loops.code == 0);
    CHECK(loops.out.find("skipped ensures in Bump at byte") != std::string::npos);

    testing::write_file(dir / "broken.dfy", "method M( {");
    CHECK(cli({"testmode", (dir / "broken.dfy").string(), "-o", (dir / "x.dfy").string()}).code == 1);
    CHECK(cli({"testmode", (dir / "missing.dfy").string(), "-o", (dir / "x.dfy").string()}).code == 2);
}

TEST_CASE("grades export") {
    testing::Scratch dir;
    auto log = dir / "events.log";
    {
        std::string lines;
        for (const auto* ex : {"fptp", "sum_and_difference", "logical", "tree_size", "hopalong", "addition_spec",
                               "late", "bottles"})
            lines += json{{"student", "s1"}, {"exercise", ex}, {"ts", 1}, {"completed", true},
                          {"verified", 1}, {"errors", 0}, {"hash", "h"}}
                         .dump() +
                     "\n";
        testing::write_file(log, lines);
    }
    testing::write_file(dir / "roster.txt", "s1\ns2\n");
    testing::write_file(dir / "manual.csv", "student_id,component,percent\ns1,essay,50\n");
    auto out = dir / "grades.csv";
    auto r = cli({"grades", "export", "--scheme", "default", "--bank", data("bank"), "--log", log.string(),
                  "--roster", (dir / "roster.txt").string(), "--manual", (dir / "manual.csv").string(), "-o",
                  out.string()});
    CHECK(r.code == 0);
    CHECK(testing::read_file(out) ==
          "student_id,weekly,a1,a2,a3,a4,essay,total\n"
          "s1,20.0,10.0,0.0,0.0,0.0,10.0,40.0\n"
          "s2,0.0,0.0,0.0,0.0,0.0,,0.0\n");
    CHECK(r.out.find("s2: missing manual score for essay") != std::string::npos);

    testing::write_file(dir / "bad_scheme.json", R"({"components":[{"group":"weekly","weight":50}]})");
    auto bad = cli({"grades", "export", "--scheme", (dir / "bad_scheme.json").string(), "--bank", data("bank"),
                    "--log", log.string()});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("not 100") != std::string::npos);
}

TEST_CASE("serve: completions survive a hard kill") {
    testing::Scratch dir;
    auto log = dir / "events.log";
    std::vector<std::string> args = {"--bank", data("bank"), "--log", log.string(), "--port", "0", "--mock",
                                     "--week", "6", "--token", "tok-a=student:ann", "--token", "tok-i=instructor:ian"};
    httplib::Headers ann = {{"Authorization", "Bearer tok-a"}};
    {
        ServeProcess srv(args);
        REQUIRE(srv.port() > 0);
        httplib::Client c("127.0.0.1", srv.port());
        auto post = c.Post("/questions/fptp/attempts", ann, json{{"answer", "!="}}.dump(), "application/json");
        REQUIRE(post);
        CHECK(post->status == 200);
        CHECK(json::parse(post->body)["completed"] == true);
        int status = srv.kill(SIGKILL);
        CHECK(WIFSIGNALED(status));
    }
    {
        ServeProcess srv(args);
        REQUIRE(srv.port() > 0);
        httplib::Client c("127.0.0.1", srv.port());
        auto q = c.Get("/questions/fptp", ann);
        REQUIRE(q);
        CHECK(json::parse(q->body)["completed"] == true);
        auto ov = c.Get("/overview", httplib::Headers{{"Authorization", "Bearer tok-i"}});
        REQUIRE(ov);
        CHECK(ov->status == 200);
        int status = srv.kill(SIGTERM);
        CHECK(WIFEXITED(status));
        CHECK(WEXITSTATUS(status) == 0);
    }
}
