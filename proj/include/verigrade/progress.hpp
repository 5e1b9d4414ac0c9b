#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "verigrade/expected.hpp"

namespace verigrade::progress {

using Timestamp = std::int64_t;  // UTC seconds since the epoch

struct ProgressEvent {
    std::string student;
    std::string exercise;
    Timestamp ts = 0;
    bool completed = false;
    int verified = 0;
    int errors = 0;
    std::string hash;  // submission hash

    friend bool operator==(const ProgressEvent&, const ProgressEvent&) = default;
};

struct CompletionRecord {
    std::string student;
    std::string exercise;
    bool completed = false;
    std::optional<Timestamp> first_completed_at;
    int attempt_count = 0;

    friend bool operator==(const CompletionRecord&, const CompletionRecord&) = default;
};

enum class ProgressErrorKind { UnknownExercise, UnknownStudent };

struct ProgressError {
    ProgressErrorKind kind;
    std::string id;
};

const char* to_string(ProgressErrorKind kind);

struct QuestionStats {
    std::string exercise;
    int completed_count = 0;
    int cohort_size = 0;
    double fraction = 0.0;                   // completed_count / cohort_size, 0 for an empty cohort
    std::map<int, int> attempts_histogram;  // attempt count -> students

    friend bool operator==(const QuestionStats&, const QuestionStats&) = default;
};

/// Completion state derived from attempt events. Completion is sticky and
/// replaying an event already applied changes nothing.
class ProgressStore {
public:
    ProgressStore() = default;
    ProgressStore(std::set<std::string> students, std::set<std::string> exercises)
        : students_(std::move(students)), exercises_(std::move(exercises)) {}

    Expected<CompletionRecord, ProgressError> record_attempt(const ProgressEvent& ev);

    /// Zero record when the pair has no attempts.
    CompletionRecord record(const std::string& student, const std::string& exercise) const;
    bool completed(const std::string& student, const std::string& exercise) const;

    Expected<QuestionStats, ProgressError> question_stats(const std::string& exercise,
                                                          const std::set<std::string>& cohort) const;

    const std::set<std::string>& students() const { return students_; }
    const std::set<std::string>& exercises() const { return exercises_; }
    std::size_t event_count() const { return seen_.size(); }

    friend bool operator==(const ProgressStore&, const ProgressStore&) = default;

private:
    std::set<std::string> students_;
    std::set<std::string> exercises_;
    std::map<std::pair<std::string, std::string>, CompletionRecord> records_;
    std::set<std::tuple<std::string, std::string, std::string, Timestamp>> seen_;
};

std::string to_json_line(const ProgressEvent& ev);
std::optional<ProgressEvent> from_json_line(std::string_view line);

struct Replay {
    std::vector<ProgressEvent> events;
    std::size_t malformed_lines = 0;
};

/// Append-only newline-delimited JSON log. Every append is fsync'd before
/// it returns.
class EventLog {
public:
    static Expected<std::unique_ptr<EventLog>, std::string> open(const std::filesystem::path& path);
    ~EventLog();
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    /// Empty on success, otherwise a description of the I/O failure.
    std::optional<std::string> append(const ProgressEvent& ev);

    /// Reads every well-formed line; a missing file is an empty log.
    static Replay replay(const std::filesystem::path& path);

private:
    explicit EventLog(int fd) : fd_(fd) {}
    int fd_;
};

/// Single writer over a store and its log. Readers take immutable snapshots
/// that are never modified after publication.
class ProgressService {
public:
    explicit ProgressService(ProgressStore initial, std::unique_ptr<EventLog> log = nullptr);

    /// Rebuilds state from the log at `path`, then keeps appending to it.
    /// Events naming unknown students or exercises are skipped.
    static Expected<std::unique_ptr<ProgressService>, std::string> open(std::set<std::string> students,
                                                                        std::set<std::string> exercises,
                                                                        const std::filesystem::path& path);

    /// Logs the event durably, then publishes the new state.
    /// Timestamps are clamped so the log never goes backwards.
    Expected<CompletionRecord, ProgressError> record(ProgressEvent ev);

    std::shared_ptr<const ProgressStore> snapshot() const;

    struct IoFailure : std::runtime_error {
        using std::runtime_error::runtime_error;
    };

private:
    mutable std::mutex write_mu_;
    mutable std::mutex snap_mu_;
    std::shared_ptr<const ProgressStore> current_;
    std::unique_ptr<EventLog> log_;
    Timestamp last_ts_ = 0;
};

}  // namespace verigrade::progress
