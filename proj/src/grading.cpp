#include "verigrade/grading.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace verigrade::grading {

using nlohmann::json;

std::vector<std::string> lecture_picks(const std::vector<progress::QuestionStats>& stats, const PickBand& band) {
    std::vector<const progress::QuestionStats*> hits;
    if (!band.valid()) return {};
    for (const auto& s : stats) {
        if (s.cohort_size == 0) continue;
        if (s.fraction >= band.mastered) continue;
        if (s.fraction >= band.low && s.fraction <= band.high) hits.push_back(&s);
    }
    std::sort(hits.begin(), hits.end(), [](const auto* a, const auto* b) {
        if (a->fraction != b->fraction) return a->fraction < b->fraction;
        return a->exercise < b->exercise;
    });
    std::vector<std::string> out;
    for (const auto* s : hits) out.push_back(s->exercise);
    return out;
}

const char* to_string(Aggregation a) {
    switch (a) {
        case Aggregation::PerQuestionEqualSplit: return "per_question";
        case Aggregation::AllOrNothing: return "all_or_nothing";
        case Aggregation::ManualScore: return "manual";
    }
    return "?";
}

Expected<GradeScheme, GradeError> GradeScheme::make(std::vector<Component> components) {
    auto invalid = [](std::string msg) { return unexpected(GradeError{GradeErrorKind::InvalidScheme, std::move(msg), {}}); };
    if (components.empty()) return invalid("scheme has no components");
    Percent sum = 0;
    std::set<std::string> groups;
    for (const auto& c : components) {
        if (c.group.empty()) return invalid("component without a group");
        if (!groups.insert(c.group).second) return invalid("duplicate component '" + c.group + "'");
        if (c.weight <= Percent(0)) return invalid("component '" + c.group + "' has a non-positive weight");
        sum += c.weight;
    }
    if (sum != Percent(100)) return invalid("weights sum to " + format_percent(sum) + ", not 100");
    return GradeScheme(std::move(components));
}

namespace {

// Weights are read to hundredths of a percent, so 12.5 stays exact.
std::optional<Percent> weight_of(const json& j) {
    if (!j.is_number()) return std::nullopt;
    if (j.is_number_integer()) return Percent(j.get<long long>());
    double d = j.get<double>();
    double scaled = std::round(d * 100.0);
    if (std::fabs(scaled - d * 100.0) > 1e-6) return std::nullopt;
    return Percent(static_cast<long long>(scaled), 100);
}

}  // namespace

Expected<GradeScheme, GradeError> GradeScheme::from_json(std::string_view text) {
    auto invalid = [](std::string msg) { return unexpected(GradeError{GradeErrorKind::InvalidScheme, std::move(msg), {}}); };
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("components") || !j["components"].is_array())
        return invalid("scheme must be an object with a 'components' array");
    std::vector<Component> comps;
    for (const auto& c : j["components"]) {
        if (!c.is_object() || !c.contains("group") || !c["group"].is_string() || !c.contains("weight"))
            return invalid("each component needs 'group' and 'weight'");
        Component comp;
        comp.group = c["group"].get<std::string>();
        auto w = weight_of(c["weight"]);
        if (!w) return invalid("weight of '" + comp.group + "' must be a number with at most two decimals");
        comp.weight = *w;
        std::string agg = c.value("aggregation", "per_question");
        if (agg == "per_question") comp.aggregation = Aggregation::PerQuestionEqualSplit;
        else if (agg == "all_or_nothing") comp.aggregation = Aggregation::AllOrNothing;
        else if (agg == "manual") comp.aggregation = Aggregation::ManualScore;
        else return invalid("unknown aggregation '" + agg + "'");
        comps.push_back(std::move(comp));
    }
    return make(std::move(comps));
}

GradeScheme GradeScheme::course_default() {
    auto s = make({
        {"weekly", 20, Aggregation::PerQuestionEqualSplit},
        {"a1", 10, Aggregation::PerQuestionEqualSplit},
        {"a2", 15, Aggregation::PerQuestionEqualSplit},
        {"a3", 15, Aggregation::PerQuestionEqualSplit},
        {"a4", 20, Aggregation::PerQuestionEqualSplit},
        {"essay", 20, Aggregation::ManualScore},
    });
    return std::move(s).value();
}

GradeBreakdown grade_breakdown(const std::string& student, const GradeScheme& scheme, const bank::Bank& bank,
                               const progress::ProgressStore& store, const ManualScores& manual) {
    GradeBreakdown out;
    out.student = student;
    out.total = 0;
    for (const auto& c : scheme.components()) {
        ComponentGrade g{c.group, c.weight, std::nullopt};
        if (c.aggregation == Aggregation::ManualScore) {
            auto s = manual.find(student);
            if (s != manual.end()) {
                if (auto it = s->second.find(c.group); it != s->second.end()) {
                    auto frac = std::clamp(it->second, Percent(0), Percent(1));
                    g.earned = c.weight * frac;
                }
            }
        } else {
            auto qs = bank.group(c.group);
            long long done = 0;
            for (const auto* ex : qs)
                if (store.completed(student, ex->id)) ++done;
            long long total = static_cast<long long>(qs.size());
            if (total == 0) g.earned = Percent(0);
            else if (c.aggregation == Aggregation::AllOrNothing) g.earned = done == total ? c.weight : Percent(0);
            else g.earned = c.weight * Percent(done, total);
        }
        if (g.earned) out.total += *g.earned;
        out.components.push_back(std::move(g));
    }
    return out;
}

Expected<GradeBreakdown, GradeError> compute_grade(const std::string& student, const GradeScheme& scheme,
                                                   const bank::Bank& bank, const progress::ProgressStore& store,
                                                   const ManualScores& manual) {
    auto b = grade_breakdown(student, scheme, bank, store, manual);
    for (const auto& c : b.components)
        if (!c.earned)
            return unexpected(GradeError{GradeErrorKind::MissingManualScore,
                                         "no manual score for '" + c.group + "' (" + student + ")", c.group});
    return b;
}

std::string format_percent(const Percent& p) {
    // round(|p| * 10) half up, then sign
    bool neg = p < Percent(0);
    Percent a = neg ? -p : p;
    Percent tenths = a * 10;
    long long whole = tenths.numerator() / tenths.denominator();
    Percent rest = tenths - whole;
    if (rest >= Percent(1, 2)) ++whole;
    std::string out = (neg && whole != 0 ? "-" : "") + std::to_string(whole / 10) + "." + std::to_string(whole % 10);
    return out;
}

GradeExport export_grades(const std::set<std::string>& cohort, const GradeScheme& scheme, const bank::Bank& bank,
                          const progress::ProgressStore& store, const ManualScores& manual) {
    GradeExport out;
    out.csv = "student_id";
    for (const auto& c : scheme.components()) out.csv += "," + c.group;
    out.csv += ",total\n";
    for (const auto& student : cohort) {
        auto b = grade_breakdown(student, scheme, bank, store, manual);
        out.csv += student;
        for (const auto& c : b.components) {
            out.csv += ",";
            if (c.earned) out.csv += format_percent(*c.earned);
            else out.warnings.push_back(student + ": missing manual score for " + c.group);
        }
        out.csv += "," + format_percent(b.total) + "\n";
    }
    return out;
}

Expected<ManualScores, std::string> parse_manual_scores(std::string_view csv) {
    ManualScores out;
    std::istringstream in{std::string(csv)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("student_id,", 0) == 0) continue;
        auto c1 = line.find(',');
        auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) return unexpected("line " + std::to_string(lineno) + ": expected 3 fields");
        auto student = line.substr(0, c1);
        auto group = line.substr(c1 + 1, c2 - c1 - 1);
        auto value = line.substr(c2 + 1);
        auto w = weight_of(json::parse(value, nullptr, false));
        if (student.empty() || group.empty() || !w || *w < 0 || *w > 100)
            return unexpected("line " + std::to_string(lineno) + ": expected student,component,percent (0..100)");
        out[student][group] = *w / 100;
    }
    return out;
}

}  // namespace verigrade::grading
