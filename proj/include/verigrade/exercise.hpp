#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "verigrade/expected.hpp"

namespace verigrade::bank {

/// The literal token a student's answer replaces.
inline constexpr std::string_view kPlaceholder = "[???]";

struct PlaceholderInfo {
    std::size_t offset;
};

enum class TemplateErrorKind { NoPlaceholder, MultiplePlaceholders };

struct TemplateError {
    TemplateErrorKind kind;
    std::vector<std::size_t> offsets;  // every occurrence found
    std::string message() const;
};

Expected<PlaceholderInfo, TemplateError> validate_template(std::string_view text);

/// Source text with exactly one placeholder. Only constructible through make().
class Template {
public:
    static Expected<Template, TemplateError> make(std::string text);

    const std::string& text() const { return text_; }
    std::size_t placeholder_offset() const { return offset_; }

    friend bool operator==(const Template&, const Template&) = default;

private:
    Template(std::string text, std::size_t offset) : text_(std::move(text)), offset_(offset) {}
    std::string text_;
    std::size_t offset_;
};

/// Replaces the placeholder with the answer, verbatim.
std::string splice(const Template& tmpl, std::string_view answer);

struct CharLimitResult {
    bool pass;
    std::size_t count;  // Unicode scalar values after CRLF -> LF
    std::size_t limit;
};

/// Passes iff the submission is strictly shorter than the limit.
CharLimitResult check_char_limit(std::string_view submission, std::size_t limit);

/// Number of Unicode scalar values in UTF-8 text, with CRLF counted as one.
std::size_t count_scalar_values(std::string_view text);

enum class ExerciseKind { Mastery, AssignmentPart };
enum class CheckMode { VerifyOnly, VerifyAndRun, OracleSpec };

struct CheckPolicy {
    CheckMode mode = CheckMode::VerifyOnly;
    std::optional<int> required_verified_min;
    bool normalize_eol = false;
    bool oracle_consistency = true;
    bool oracle_capture = true;
    std::string notes;

    friend bool operator==(const CheckPolicy&, const CheckPolicy&) = default;
};

struct Exercise {
    std::string id;
    std::string title;
    int week = 1;
    ExerciseKind kind = ExerciseKind::Mastery;
    CheckPolicy check;
    Template tmpl;
    std::optional<std::filesystem::path> hidden_oracle;  // <id>.oracle.dfy
    std::optional<std::string> oracle_target;            // declaration under test
    std::optional<std::string> expected_stdout;          // contents of <id>.out
    std::optional<std::size_t> char_limit;
    std::optional<int> timeout_secs;
    std::string weight_group;
    std::filesystem::path source_path;

    friend bool operator==(const Exercise&, const Exercise&) = default;
};

enum class BankErrorKind { MalformedFrontMatter, DuplicateId, MissingAsset, TemplateInvalid, Io };

struct BankError {
    BankErrorKind kind;
    std::filesystem::path file;
    std::string message;
};

const char* to_string(BankErrorKind kind);

/// Immutable set of exercises keyed by id.
class Bank {
public:
    Bank() = default;
    explicit Bank(std::map<std::string, Exercise> exercises) : exercises_(std::move(exercises)) {}

    const Exercise* find(std::string_view id) const;
    const std::map<std::string, Exercise>& exercises() const { return exercises_; }
    std::size_t size() const { return exercises_.size(); }

    /// Exercises whose weight_group matches, ordered by id.
    std::vector<const Exercise*> group(std::string_view weight_group) const;

    friend bool operator==(const Bank&, const Bank&) = default;

private:
    std::map<std::string, Exercise> exercises_;
};

/// Parses one `.exercise` file's contents. Assets are not resolved.
Expected<Exercise, BankError> parse_exercise(std::string_view contents, const std::filesystem::path& file);

/// Loads every `*.exercise` file under root, resolving sibling assets.
/// Either every file is valid or every problem found is returned.
Expected<Bank, std::vector<BankError>> load_bank(const std::filesystem::path& root);

const char* to_string(CheckMode mode);
const char* to_string(ExerciseKind kind);

}  // namespace verigrade::bank
