#include "doctest.h"
#include "support.hpp"
#include "verigrade/progress.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <thread>

using namespace verigrade::progress;
using testing::Gen;

namespace {

const std::set<std::string> kStudents = {"s1", "s2", "s3", "s4"};
const std::set<std::string> kExercises = {"e1", "e2", "e3"};

ProgressEvent event(std::string s, std::string e, Timestamp ts, bool completed, std::string hash = "h") {
    return {std::move(s), std::move(e), ts, completed, completed ? 2 : 1, completed ? 0 : 1, std::move(hash)};
}

std::vector<ProgressEvent> random_events(Gen& g, int max_len) {
    static const std::vector<std::string> students(kStudents.begin(), kStudents.end());
    static const std::vector<std::string> exercises(kExercises.begin(), kExercises.end());
    std::vector<ProgressEvent> out;
    Timestamp ts = g.range(0, 1000);
    for (int n = g.range(0, max_len); n > 0; --n) {
        ts += g.range(0, 2);
        if (!out.empty() && g.coin(0.1)) {
            out.push_back(out[static_cast<std::size_t>(g.range(0, static_cast<int>(out.size()) - 1))]);
            continue;
        }
        out.push_back(event(g.pick(students), g.pick(exercises), ts, g.coin(0.3), "h" + std::to_string(g.range(0, 3))));
    }
    return out;
}

}  // namespace

TEST_CASE("record_attempt: examples") {
    ProgressStore store(kStudents, kExercises);
    auto first = store.record_attempt(event("s1", "e1", 10, false));
    REQUIRE(first);
    CHECK_FALSE(first->completed);
    CHECK(first->attempt_count == 1);

    auto pass = store.record_attempt(event("s1", "e1", 20, true, "h2"));
    REQUIRE(pass);
    CHECK(pass->completed);
    CHECK(pass->first_completed_at == 20);

    auto later_fail = store.record_attempt(event("s1", "e1", 30, false, "h3"));
    REQUIRE(later_fail);
    CHECK(later_fail->completed);
    CHECK(later_fail->attempt_count == 3);
    CHECK(later_fail->first_completed_at == 20);

    auto replayed = store.record_attempt(event("s1", "e1", 30, false, "h3"));
    REQUIRE(replayed);
    CHECK(replayed->attempt_count == 3);

    auto who = store.record_attempt(event("nobody", "e1", 1, true));
    REQUIRE_FALSE(who);
    CHECK(who.error().kind == ProgressErrorKind::UnknownStudent);
    auto what = store.record_attempt(event("s1", "e9", 1, true));
    REQUIRE_FALSE(what);
    CHECK(what.error().kind == ProgressErrorKind::UnknownExercise);
}

TEST_CASE("question_stats: fractions and histogram") {
    std::set<std::string> cohort;
    std::set<std::string> all;
    for (int i = 0; i < 100; ++i) cohort.insert("s" + std::to_string(i));
    ProgressStore store(cohort, {"q", "none", "all"});
    int i = 0;
    for (const auto& s : cohort) {
        if (i < 15) REQUIRE(store.record_attempt(event(s, "q", 1, true)));
        else if (i < 40) REQUIRE(store.record_attempt(event(s, "q", 1, false)));
        REQUIRE(store.record_attempt(event(s, "all", 1, true)));
        ++i;
    }
    auto q = store.question_stats("q", cohort);
    REQUIRE(q);
    CHECK(q->completed_count == 15);
    CHECK(q->cohort_size == 100);
    CHECK(q->fraction == 0.15);
    CHECK(q->attempts_histogram == std::map<int, int>{{0, 60}, {1, 40}});

    CHECK(store.question_stats("none", cohort)->fraction == 0.0);
    CHECK(store.question_stats("all", cohort)->fraction == 1.0);

    auto empty = store.question_stats("q", {});
    REQUIRE(empty);
    CHECK(empty->cohort_size == 0);
    CHECK(empty->fraction == 0.0);

    CHECK_FALSE(store.question_stats("missing", cohort));
}

TEST_CASE("json lines round trip") {
    auto ev = event("s \"1\"", "e1", 1700000000, true, "abc");
    auto line = to_json_line(ev);
    CHECK(line.back() == '\n');
    CHECK(std::count(line.begin(), line.end(), '\n') == 1);
    auto back = from_json_line(line);
    REQUIRE(back);
    CHECK(*back == ev);
    CHECK_FALSE(from_json_line("{\"student\":1}"));
    CHECK_FALSE(from_json_line("not json"));
}

TEST_CASE("event log: append, replay and torn tail") {
    testing::Scratch dir;
    auto path = dir / "events.log";
    {
        auto log = EventLog::open(path);
        REQUIRE(log);
        CHECK_FALSE((*log)->append(event("s1", "e1", 1, true)));
        CHECK_FALSE((*log)->append(event("s2", "e1", 2, false)));
    }
    {
        // Simulate a crash in the middle of a write.
        int fd = ::open(path.c_str(), O_WRONLY | O_APPEND);
        REQUIRE(fd >= 0);
        REQUIRE(::write(fd, "{\"student\":\"s3\",\"exerc", 22) == 22);
        ::close(fd);
    }
    {
        auto log = EventLog::open(path);
        REQUIRE(log);
        CHECK_FALSE((*log)->append(event("s3", "e2", 3, true)));
    }
    auto r = EventLog::replay(path);
    CHECK(r.malformed_lines == 1);
    REQUIRE(r.events.size() == 3);
    CHECK(r.events[2] == event("s3", "e2", 3, true));

    CHECK(EventLog::replay(dir / "missing.log").events.empty());
}

TEST_CASE("service: record, snapshot, reopen") {
    testing::Scratch dir;
    auto path = dir / "events.log";
    {
        auto svc = ProgressService::open(kStudents, kExercises, path);
        REQUIRE(svc);
        auto before = (*svc)->snapshot();
        REQUIRE((*svc)->record(event("s1", "e1", 100, true)));
        CHECK_FALSE(before->completed("s1", "e1"));
        CHECK((*svc)->snapshot()->completed("s1", "e1"));
        CHECK_FALSE((*svc)->record(event("ghost", "e1", 101, true)));
        // A clock that steps backwards is clamped.
        REQUIRE((*svc)->record(event("s2", "e1", 50, false)));
    }
    auto r = EventLog::replay(path);
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[1].ts == 100);

    auto again = ProgressService::open(kStudents, kExercises, path);
    REQUIRE(again);
    CHECK((*again)->snapshot()->completed("s1", "e1"));
    CHECK((*again)->snapshot()->record("s2", "e1").attempt_count == 1);
}

TEST_CASE("service: log failures surface as IoFailure") {
    testing::Scratch dir;
    auto path = dir / "events.log";
    auto svc = ProgressService::open(kStudents, kExercises, path);
    REQUIRE(svc);
    auto log = EventLog::open("/dev/full");
    REQUIRE(log);
    ProgressService full(ProgressStore(kStudents, kExercises), std::move(*log));
    CHECK_THROWS_AS(full.record(event("s1", "e1", 1, true)), ProgressService::IoFailure);
    CHECK_FALSE(full.snapshot()->completed("s1", "e1"));
}

TEST_CASE("service: concurrent writers and readers") {
    testing::Scratch dir;
    auto path = dir / "events.log";
    auto svc = ProgressService::open(kStudents, kExercises, path);
    REQUIRE(svc);
    auto& s = **svc;
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&s, t] {
            for (int i = 0; i < 25; ++i)
                (void)s.record(event("s" + std::to_string(t + 1), "e1", i, i == 20, "h" + std::to_string(i)));
        });
    }
    std::atomic<bool> torn{false};
    std::thread reader([&] {
        for (int i = 0; i < 200; ++i) {
            auto snap = s.snapshot();
            int total = 0;
            for (const auto& st : kStudents) total += snap->record(st, "e1").attempt_count;
            if (static_cast<std::size_t>(total) != snap->event_count()) torn = true;
        }
    });
    for (auto& t : threads) t.join();
    reader.join();
    CHECK_FALSE(torn);
    CHECK(s.snapshot()->event_count() == 100);
    CHECK(EventLog::replay(path).events.size() == 100);
}

TEST_CASE("property: completion is sticky") {
    Gen g(51);
    for (int i = 0; i < 1000; ++i) {
        auto events = random_events(g, 40);
        ProgressStore store(kStudents, kExercises);
        std::map<std::pair<std::string, std::string>, bool> was;
        for (const auto& ev : events) {
            REQUIRE(store.record_attempt(ev));
            for (const auto& st : kStudents)
                for (const auto& ex : kExercises) {
                    bool now = store.completed(st, ex);
                    REQUIRE((!was[{st, ex}] || now));
                    was[{st, ex}] = now;
                }
        }
    }
}

TEST_CASE("property: log replay equals incremental state") {
    Gen g(52);
    testing::Scratch dir;
    for (int i = 0; i < 1000; ++i) {
        auto events = random_events(g, 25);
        auto path = dir / ("log" + std::to_string(i));
        auto svc = ProgressService::open(kStudents, kExercises, path);
        REQUIRE(svc);
        ProgressStore incremental(kStudents, kExercises);
        Timestamp last = 0;
        for (auto ev : events) {
            REQUIRE((*svc)->record(ev));
            // The service never lets time run backwards.
            ev.ts = std::max(ev.ts, last);
            last = ev.ts;
            REQUIRE(incremental.record_attempt(ev));
        }
        CHECK(*(*svc)->snapshot() == incremental);

        ProgressStore rebuilt(kStudents, kExercises);
        for (const auto& ev : EventLog::replay(path).events) REQUIRE(rebuilt.record_attempt(ev));
        CHECK(rebuilt == incremental);

        // Replaying the whole log a second time changes nothing.
        for (const auto& ev : EventLog::replay(path).events) REQUIRE(rebuilt.record_attempt(ev));
        CHECK(rebuilt == incremental);

        auto reopened = ProgressService::open(kStudents, kExercises, path);
        REQUIRE(reopened);
        CHECK(*(*reopened)->snapshot() == incremental);
        std::filesystem::remove(path);
    }
}
