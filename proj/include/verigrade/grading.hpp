#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

#include "verigrade/exercise.hpp"
#include "verigrade/expected.hpp"
#include "verigrade/progress.hpp"

namespace verigrade::grading {

/// Exact percentages; no floating point in grade arithmetic.
using Percent = boost::rational<long long>;

struct PickBand {
    double low = 0.10;
    double high = 0.25;
    double mastered = 0.80;

    bool valid() const { return 0.0 <= low && low < high && high <= mastered && mastered <= 1.0; }
};

/// Questions whose completion fraction lies in [low, high] and below
/// `mastered`, ascending by fraction then id. An empty cohort picks nothing.
std::vector<std::string> lecture_picks(const std::vector<progress::QuestionStats>& stats, const PickBand& band = {});

enum class Aggregation { PerQuestionEqualSplit, AllOrNothing, ManualScore };

const char* to_string(Aggregation a);

struct Component {
    std::string group;  // weight_group of the exercises it covers
    Percent weight;
    Aggregation aggregation = Aggregation::PerQuestionEqualSplit;
};

enum class GradeErrorKind { InvalidScheme, MissingManualScore };

struct GradeError {
    GradeErrorKind kind;
    std::string message;
    std::string group;
};

class GradeScheme {
public:
    /// Weights must be positive, groups unique, and weights sum to exactly 100.
    static Expected<GradeScheme, GradeError> make(std::vector<Component> components);

    /// {"components": [{"group": "weekly", "weight": 20, "aggregation": "per_question"}, ...]}
    static Expected<GradeScheme, GradeError> from_json(std::string_view text);

    /// Weekly 20, A1 10, A2 15, A3 15, A4 verified part 20, essay 20 (manual).
    static GradeScheme course_default();

    const std::vector<Component>& components() const { return components_; }

private:
    explicit GradeScheme(std::vector<Component> c) : components_(std::move(c)) {}
    std::vector<Component> components_;
};

struct ComponentGrade {
    std::string group;
    Percent weight;
    std::optional<Percent> earned;  // empty when a manual score is missing
};

struct GradeBreakdown {
    std::string student;
    std::vector<ComponentGrade> components;
    Percent total;  // missing components count as zero
};

/// student -> group -> score as a fraction of the component (0..1)
using ManualScores = std::map<std::string, std::map<std::string, Percent>>;

/// Breakdown even when manual scores are missing; those cells stay empty.
GradeBreakdown grade_breakdown(const std::string& student, const GradeScheme& scheme, const bank::Bank& bank,
                               const progress::ProgressStore& store, const ManualScores& manual);

Expected<GradeBreakdown, GradeError> compute_grade(const std::string& student, const GradeScheme& scheme,
                                                   const bank::Bank& bank, const progress::ProgressStore& store,
                                                   const ManualScores& manual);

/// Half-up rounding to one decimal place, e.g. 33.33.. -> "33.3".
std::string format_percent(const Percent& p);

struct GradeExport {
    std::string csv;
    std::vector<std::string> warnings;
};

/// `student_id,<group>...,total`, one row per student in id order.
GradeExport export_grades(const std::set<std::string>& cohort, const GradeScheme& scheme, const bank::Bank& bank,
                          const progress::ProgressStore& store, const ManualScores& manual);

/// `student_id,component,percent` rows; percent is of the component (0..100).
Expected<ManualScores, std::string> parse_manual_scores(std::string_view csv);

}  // namespace verigrade::grading
