#include "verigrade/gateway.hpp"

#include "json.hpp"
#include "verigrade/judge.hpp"

namespace verigrade::gateway {

using nlohmann::json;

namespace {

Response error(int status, std::string_view message) { return {status, json{{"error", message}}.dump()}; }

progress::Timestamp system_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// Releases a student's in-flight slot when the attempt finishes.
class InflightGuard {
public:
    InflightGuard(std::mutex& mu, std::set<std::string>& set, std::string id) : mu_(mu), set_(set), id_(std::move(id)) {}
    ~InflightGuard() {
        std::lock_guard lock(mu_);
        set_.erase(id_);
    }
    InflightGuard(const InflightGuard&) = delete;
    InflightGuard& operator=(const InflightGuard&) = delete;

private:
    std::mutex& mu_;
    std::set<std::string>& set_;
    std::string id_;
};

// Mock directives are test scaffolding and may encode hidden output.
std::string student_view(std::string_view tmpl) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        auto nl = tmpl.find('\n', pos);
        auto end = nl == std::string_view::npos ? tmpl.size() : nl + 1;
        auto line = tmpl.substr(pos, end - pos);
        if (line.find("// MOCK-") == std::string_view::npos) out += line;
        pos = end;
    }
    return out;
}

}  // namespace

Gateway::Gateway(GatewayConfig cfg, bank::Bank bank, std::unique_ptr<progress::ProgressService> progress,
                 backend::BackendConfig backend)
    : cfg_(std::move(cfg)),
      bank_(std::move(bank)),
      progress_(std::move(progress)),
      backend_(std::move(backend)),
      workers_(std::clamp<std::ptrdiff_t>(cfg_.workers, 1, kMaxWorkers)),
      now_(system_now) {}

std::optional<Principal> Gateway::authenticate(std::optional<std::string_view> authorization) const {
    if (!authorization) return std::nullopt;
    auto h = *authorization;
    constexpr std::string_view bearer = "Bearer ";
    if (h.substr(0, bearer.size()) != bearer) return std::nullopt;
    auto token = h.substr(bearer.size());
    auto it = cfg_.tokens.find(std::string(token));
    if (it == cfg_.tokens.end()) return std::nullopt;
    return it->second;
}

Response Gateway::list_questions(std::optional<std::string_view> authorization) const {
    auto who = authenticate(authorization);
    if (!who) return error(401, "unauthenticated");
    auto snap = progress_->snapshot();
    json list = json::array();
    for (const auto& [id, ex] : bank_.exercises()) {
        if (!released(ex)) continue;
        list.push_back({{"id", ex.id},
                        {"title", ex.title},
                        {"week", ex.week},
                        {"completed", who->role == Role::Student && snap->completed(who->id, ex.id)}});
    }
    return {200, list.dump()};
}

Response Gateway::get_question(std::optional<std::string_view> authorization, std::string_view id) const {
    auto who = authenticate(authorization);
    if (!who) return error(401, "unauthenticated");
    const auto* ex = bank_.find(id);
    if (!ex) return error(404, "no such question");
    if (!released(*ex)) return error(403, "question not yet released");
    json j = {{"id", ex->id},
              {"title", ex->title},
              {"week", ex->week},
              {"kind", bank::to_string(ex->kind)},
              {"mode", bank::to_string(ex->check.mode)},
              {"template_text", student_view(ex->tmpl.text())}};
    if (ex->char_limit) j["char_limit"] = *ex->char_limit;
    if (who->role == Role::Student) j["completed"] = progress_->snapshot()->completed(who->id, ex->id);
    return {200, j.dump()};
}

Response Gateway::post_attempt(std::optional<std::string_view> authorization, std::string_view id,
                               std::string_view body) {
    auto who = authenticate(authorization);
    if (!who) return error(401, "unauthenticated");
    if (who->role != Role::Student) return error(403, "only students submit attempts");
    const auto* ex = bank_.find(id);
    if (!ex) return error(404, "no such question");
    if (!released(*ex)) return error(403, "question not yet released");

    // JSON escaping can at most double the answer, plus the envelope.
    if (body.size() > 2 * cfg_.max_answer_bytes + 1024) return error(413, "answer too large");
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("answer") || !j["answer"].is_string())
        return error(400, "body must be a JSON object with a string 'answer'");
    auto answer = j["answer"].get<std::string>();
    if (answer.size() > cfg_.max_answer_bytes) return error(413, "answer too large");

    {
        std::lock_guard lock(inflight_mu_);
        if (!inflight_.insert(who->id).second) return error(429, "an attempt is already in progress");
    }
    InflightGuard guard(inflight_mu_, inflight_, who->id);

    if (!workers_.try_acquire_for(std::chrono::seconds(5))) return error(503, "verifier busy, try again");
    auto outcome = [&] {
        struct Release {
            std::counting_semaphore<kMaxWorkers>& s;
            ~Release() { s.release(); }
        } release{workers_};
        return judge::evaluate_attempt(*ex, answer, backend_);
    }();

    const auto& v = outcome.verdict;
    progress::ProgressEvent ev{who->id, ex->id, now_(), v.completed, v.verified_count, v.error_count,
                               outcome.submission_hash};
    try {
        auto rec = progress_->record(std::move(ev));
        if (!rec) return error(403, "not registered for this course");
    } catch (const progress::ProgressService::IoFailure&) {
        return error(500, "could not record attempt");
    }
    json resp = {{"completed", v.completed},
                 {"feedback", v.feedback},
                 {"verified_count", v.verified_count},
                 {"error_count", v.error_count}};
    return {200, resp.dump()};
}

Response Gateway::overview(std::optional<std::string_view> authorization) const {
    auto who = authenticate(authorization);
    if (!who) return error(401, "unauthenticated");
    if (who->role != Role::Instructor) return error(403, "instructors only");

    auto cohort = cfg_.students();
    auto snap = progress_->snapshot();
    std::vector<progress::QuestionStats> stats;
    json rows = json::array();
    for (const auto& [id, ex] : bank_.exercises()) {
        auto s = snap->question_stats(id, cohort);
        if (!s) continue;
        json hist = json::object();
        for (const auto& [attempts, n] : s->attempts_histogram) hist[std::to_string(attempts)] = n;
        rows.push_back({{"id", id},
                        {"title", ex.title},
                        {"week", ex.week},
                        {"completed_count", s->completed_count},
                        {"cohort_size", s->cohort_size},
                        {"fraction", s->fraction},
                        {"attempts_histogram", hist}});
        stats.push_back(std::move(*s));
    }
    json j = {{"cohort_size", cohort.size()},
              {"questions", rows},
              {"picks", grading::lecture_picks(stats, cfg_.band())}};
    return {200, j.dump()};
}

}  // namespace verigrade::gateway
