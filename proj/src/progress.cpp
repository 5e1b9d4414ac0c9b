#include "verigrade/progress.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace verigrade::progress {

using nlohmann::json;

const char* to_string(ProgressErrorKind kind) {
    return kind == ProgressErrorKind::UnknownExercise ? "UnknownExercise" : "UnknownStudent";
}

Expected<CompletionRecord, ProgressError> ProgressStore::record_attempt(const ProgressEvent& ev) {
    if (!students_.count(ev.student)) return unexpected(ProgressError{ProgressErrorKind::UnknownStudent, ev.student});
    if (!exercises_.count(ev.exercise))
        return unexpected(ProgressError{ProgressErrorKind::UnknownExercise, ev.exercise});

    auto key = std::make_pair(ev.student, ev.exercise);
    auto [it, fresh] = records_.try_emplace(key, CompletionRecord{ev.student, ev.exercise, false, std::nullopt, 0});
    auto& rec = it->second;
    if (!seen_.emplace(ev.student, ev.exercise, ev.hash, ev.ts).second) return rec;

    ++rec.attempt_count;
    if (ev.completed) {
        if (!rec.first_completed_at || ev.ts < *rec.first_completed_at) rec.first_completed_at = ev.ts;
        rec.completed = true;
    }
    return rec;
}

CompletionRecord ProgressStore::record(const std::string& student, const std::string& exercise) const {
    auto it = records_.find({student, exercise});
    if (it == records_.end()) return CompletionRecord{student, exercise, false, std::nullopt, 0};
    return it->second;
}

bool ProgressStore::completed(const std::string& student, const std::string& exercise) const {
    auto it = records_.find({student, exercise});
    return it != records_.end() && it->second.completed;
}

Expected<QuestionStats, ProgressError> ProgressStore::question_stats(const std::string& exercise,
                                                                     const std::set<std::string>& cohort) const {
    if (!exercises_.count(exercise)) return unexpected(ProgressError{ProgressErrorKind::UnknownExercise, exercise});
    QuestionStats s;
    s.exercise = exercise;
    s.cohort_size = static_cast<int>(cohort.size());
    for (const auto& student : cohort) {
        auto rec = record(student, exercise);
        if (rec.completed) ++s.completed_count;
        ++s.attempts_histogram[rec.attempt_count];
    }
    s.fraction = s.cohort_size == 0 ? 0.0 : static_cast<double>(s.completed_count) / s.cohort_size;
    return s;
}

std::string to_json_line(const ProgressEvent& ev) {
    json j = {{"student", ev.student}, {"exercise", ev.exercise}, {"ts", ev.ts},   {"completed", ev.completed},
              {"verified", ev.verified}, {"errors", ev.errors},   {"hash", ev.hash}};
    return j.dump() + "\n";
}

std::optional<ProgressEvent> from_json_line(std::string_view line) {
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
        ProgressEvent ev;
        ev.student = j.at("student").get<std::string>();
        ev.exercise = j.at("exercise").get<std::string>();
        ev.ts = j.at("ts").get<Timestamp>();
        ev.completed = j.at("completed").get<bool>();
        ev.verified = j.at("verified").get<int>();
        ev.errors = j.at("errors").get<int>();
        ev.hash = j.at("hash").get<std::string>();
        return ev;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

Expected<std::unique_ptr<EventLog>, std::string> EventLog::open(const std::filesystem::path& path) {
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) return unexpected("cannot open event log " + path.string() + ": " + std::strerror(errno));
    // A crash can leave a torn final line; start the next record on a fresh line.
    struct stat st {};
    if (::fstat(fd, &st) == 0 && st.st_size > 0) {
        std::ifstream in(path, std::ios::binary);
        in.seekg(-1, std::ios::end);
        char last = '\n';
        in.get(last);
        if (last != '\n' && ::write(fd, "\n", 1) != 1) {
            ::close(fd);
            return unexpected("cannot repair event log " + path.string());
        }
    }
    return std::unique_ptr<EventLog>(new EventLog(fd));
}

EventLog::~EventLog() { ::close(fd_); }

std::optional<std::string> EventLog::append(const ProgressEvent& ev) {
    auto line = to_json_line(ev);
    std::size_t done = 0;
    while (done < line.size()) {
        auto n = ::write(fd_, line.data() + done, line.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            return std::string("event log write failed: ") + std::strerror(errno);
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) return std::string("event log fsync failed: ") + std::strerror(errno);
    return std::nullopt;
}

Replay EventLog::replay(const std::filesystem::path& path) {
    Replay r;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (auto ev = from_json_line(line)) r.events.push_back(std::move(*ev));
        else ++r.malformed_lines;
    }
    return r;
}

ProgressService::ProgressService(ProgressStore initial, std::unique_ptr<EventLog> log)
    : current_(std::make_shared<const ProgressStore>(std::move(initial))), log_(std::move(log)) {}

Expected<std::unique_ptr<ProgressService>, std::string> ProgressService::open(std::set<std::string> students,
                                                                              std::set<std::string> exercises,
                                                                              const std::filesystem::path& path) {
    ProgressStore store(std::move(students), std::move(exercises));
    Timestamp last = 0;
    for (const auto& ev : EventLog::replay(path).events) {
        (void)store.record_attempt(ev);
        last = std::max(last, ev.ts);
    }
    auto log = EventLog::open(path);
    if (!log) return unexpected(log.error());
    auto svc = std::make_unique<ProgressService>(std::move(store), std::move(*log));
    svc->last_ts_ = last;
    return svc;
}

Expected<CompletionRecord, ProgressError> ProgressService::record(ProgressEvent ev) {
    std::lock_guard lock(write_mu_);
    ev.ts = std::max(ev.ts, last_ts_);
    auto next = std::make_shared<ProgressStore>(*snapshot());
    auto rec = next->record_attempt(ev);
    if (!rec) return rec;
    if (log_) {
        if (auto err = log_->append(ev)) throw IoFailure(*err);
    }
    last_ts_ = ev.ts;
    {
        std::lock_guard s(snap_mu_);
        current_ = std::move(next);
    }
    return rec;
}

std::shared_ptr<const ProgressStore> ProgressService::snapshot() const {
    std::lock_guard s(snap_mu_);
    return current_;
}

}  // namespace verigrade::progress
