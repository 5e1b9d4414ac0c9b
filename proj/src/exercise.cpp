#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "verigrade/exercise.hpp"

namespace verigrade::bank {

namespace fs = std::filesystem;

std::string TemplateError::message() const {
    if (kind == TemplateErrorKind::NoPlaceholder) return "template has no [???] placeholder";
    std::string out = "template has " + std::to_string(offsets.size()) + " placeholders at offsets";
    for (auto off : offsets) out += " " + std::to_string(off);
    return out;
}

Expected<PlaceholderInfo, TemplateError> validate_template(std::string_view text) {
    std::vector<std::size_t> found;
    for (auto pos = text.find(kPlaceholder); pos != std::string_view::npos;
         pos = text.find(kPlaceholder, pos + kPlaceholder.size())) {
        found.push_back(pos);
    }
    if (found.empty()) return unexpected(TemplateError{TemplateErrorKind::NoPlaceholder, {}});
    if (found.size() > 1) return unexpected(TemplateError{TemplateErrorKind::MultiplePlaceholders, found});
    return PlaceholderInfo{found.front()};
}

Expected<Template, TemplateError> Template::make(std::string text) {
    auto info = validate_template(text);
    if (!info) return unexpected(info.error());
    return Template(std::move(text), info->offset);
}

std::string splice(const Template& tmpl, std::string_view answer) {
    std::string out;
    out.reserve(tmpl.text().size() - kPlaceholder.size() + answer.size());
    out.append(tmpl.text(), 0, tmpl.placeholder_offset());
    out.append(answer);
    out.append(tmpl.text(), tmpl.placeholder_offset() + kPlaceholder.size());
    return out;
}

std::size_t count_scalar_values(std::string_view text) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        auto c = static_cast<unsigned char>(text[i]);
        if ((c & 0xC0) == 0x80) continue;  // continuation byte
        if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
        ++n;
    }
    return n;
}

CharLimitResult check_char_limit(std::string_view submission, std::size_t limit) {
    auto n = count_scalar_values(submission);
    return {n < limit, n, limit};
}

const char* to_string(BankErrorKind kind) {
    switch (kind) {
        case BankErrorKind::MalformedFrontMatter: return "MalformedFrontMatter";
        case BankErrorKind::DuplicateId: return "DuplicateId";
        case BankErrorKind::MissingAsset: return "MissingAsset";
        case BankErrorKind::TemplateInvalid: return "TemplateInvalid";
        case BankErrorKind::Io: return "Io";
    }
    return "?";
}

const char* to_string(CheckMode mode) {
    switch (mode) {
        case CheckMode::VerifyOnly: return "verify";
        case CheckMode::VerifyAndRun: return "verify_and_run";
        case CheckMode::OracleSpec: return "oracle_spec";
    }
    return "?";
}

const char* to_string(ExerciseKind kind) { return kind == ExerciseKind::Mastery ? "mastery" : "assignment"; }

const Exercise* Bank::find(std::string_view id) const {
    auto it = exercises_.find(std::string(id));
    return it == exercises_.end() ? nullptr : &it->second;
}

std::vector<const Exercise*> Bank::group(std::string_view weight_group) const {
    std::vector<const Exercise*> out;
    for (const auto& [id, ex] : exercises_)
        if (ex.weight_group == weight_group) out.push_back(&ex);
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool is_delimiter(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line == "---";
}

std::optional<long> parse_int(std::string_view s) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

const std::set<std::string_view> kKnownKeys = {
    "id",         "title",          "week",         "kind",          "mode",
    "char_limit", "weight_group",   "required_verified_min", "normalize_eol", "oracle_target",
    "oracle_checks", "timeout_secs", "notes",
};

}  // namespace

Expected<Exercise, BankError> parse_exercise(std::string_view contents, const fs::path& file) {
    auto malformed = [&](std::string msg) {
        return unexpected(BankError{BankErrorKind::MalformedFrontMatter, file, std::move(msg)});
    };

    auto line_end = [&](std::size_t from) {
        auto nl = contents.find('\n', from);
        return nl == std::string_view::npos ? contents.size() : nl;
    };

    std::size_t pos = 0;
    std::size_t end = line_end(pos);
    if (!is_delimiter(contents.substr(pos, end - pos))) return malformed("missing opening '---' line");
    pos = end + 1;

    std::map<std::string, std::string, std::less<>> fields;
    bool closed = false;
    while (pos < contents.size()) {
        end = line_end(pos);
        auto line = contents.substr(pos, end - pos);
        pos = end + 1;
        if (is_delimiter(line)) {
            closed = true;
            break;
        }
        if (trim(line).empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string_view::npos) return malformed("front matter line without ':': " + std::string(line));
        auto key = trim(line.substr(0, colon));
        auto value = trim(line.substr(colon + 1));
        if (!kKnownKeys.count(key)) return malformed("unknown front matter key '" + std::string(key) + "'");
        if (!fields.emplace(std::string(key), std::string(value)).second)
            return malformed("duplicate front matter key '" + std::string(key) + "'");
    }
    if (!closed) return malformed("missing closing '---' line");
    std::string body = pos <= contents.size() ? std::string(contents.substr(pos)) : std::string();

    auto get = [&](std::string_view k) -> std::optional<std::string> {
        auto it = fields.find(k);
        if (it == fields.end()) return std::nullopt;
        return it->second;
    };

    auto id = get("id");
    auto title = get("title");
    auto week_s = get("week");
    if (!id || id->empty()) return malformed("missing 'id'");
    if (!title) return malformed("missing 'title'");
    if (!week_s) return malformed("missing 'week'");
    auto week = parse_int(*week_s);
    if (!week || *week < 1 || *week > 12) return malformed("week must be an integer in 1..12");

    ExerciseKind kind = ExerciseKind::Mastery;
    if (auto k = get("kind")) {
        if (*k == "mastery") kind = ExerciseKind::Mastery;
        else if (*k == "assignment") kind = ExerciseKind::AssignmentPart;
        else return malformed("kind must be 'mastery' or 'assignment'");
    }

    CheckPolicy policy;
    if (auto m = get("mode")) {
        if (*m == "verify") policy.mode = CheckMode::VerifyOnly;
        else if (*m == "verify_and_run") policy.mode = CheckMode::VerifyAndRun;
        else if (*m == "oracle_spec") policy.mode = CheckMode::OracleSpec;
        else return malformed("mode must be verify, verify_and_run or oracle_spec");
    }
    if (auto v = get("required_verified_min")) {
        auto n = parse_int(*v);
        if (!n || *n < 0) return malformed("required_verified_min must be a non-negative integer");
        policy.required_verified_min = static_cast<int>(*n);
    }
    if (auto v = get("normalize_eol")) {
        if (*v != "true" && *v != "false") return malformed("normalize_eol must be true or false");
        policy.normalize_eol = *v == "true";
    }
    if (auto v = get("oracle_checks")) {
        policy.oracle_consistency = v->find("consistency") != std::string::npos;
        policy.oracle_capture = v->find("capture") != std::string::npos;
        if (!policy.oracle_consistency && !policy.oracle_capture)
            return malformed("oracle_checks must name consistency and/or capture");
    }
    if (auto v = get("notes")) policy.notes = *v;

    std::optional<std::size_t> char_limit;
    if (auto v = get("char_limit")) {
        auto n = parse_int(*v);
        if (!n || *n <= 0) return malformed("char_limit must be a positive integer");
        char_limit = static_cast<std::size_t>(*n);
        if (policy.mode != CheckMode::VerifyAndRun) return malformed("char_limit requires mode verify_and_run");
    }
    std::optional<int> timeout;
    if (auto v = get("timeout_secs")) {
        auto n = parse_int(*v);
        if (!n || *n <= 0) return malformed("timeout_secs must be a positive integer");
        timeout = static_cast<int>(*n);
    }

    auto tmpl = Template::make(std::move(body));
    if (!tmpl) return unexpected(BankError{BankErrorKind::TemplateInvalid, file, tmpl.error().message()});

    std::string group = get("weight_group").value_or(kind == ExerciseKind::Mastery ? "weekly" : "assignments");

    return Exercise{
        .id = *id,
        .title = *title,
        .week = static_cast<int>(*week),
        .kind = kind,
        .check = policy,
        .tmpl = std::move(*tmpl),
        .hidden_oracle = std::nullopt,
        .oracle_target = get("oracle_target"),
        .expected_stdout = std::nullopt,
        .char_limit = char_limit,
        .timeout_secs = timeout,
        .weight_group = std::move(group),
        .source_path = file,
    };
}

namespace {

std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Expected<Bank, std::vector<BankError>> load_bank(const fs::path& root) {
    std::vector<BankError> errors;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        errors.push_back({BankErrorKind::Io, root, "bank root is not a readable directory"});
        return unexpected(std::move(errors));
    }

    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        if (it->is_regular_file() && it->path().extension() == ".exercise") files.push_back(it->path());
    }
    if (ec) errors.push_back({BankErrorKind::Io, root, ec.message()});
    std::sort(files.begin(), files.end());

    std::map<std::string, Exercise> exercises;
    std::map<std::string, fs::path> seen;
    for (const auto& file : files) {
        auto contents = read_file(file);
        if (!contents) {
            errors.push_back({BankErrorKind::Io, file, "cannot read file"});
            continue;
        }
        auto ex = parse_exercise(*contents, file);
        if (!ex) {
            errors.push_back(ex.error());
            continue;
        }
        auto dir = file.parent_path();
        auto oracle = dir / (ex->id + ".oracle.dfy");
        auto out = dir / (ex->id + ".out");
        bool ok = true;
        if (fs::exists(oracle)) {
            ex->hidden_oracle = oracle;
        } else if (ex->check.mode == CheckMode::OracleSpec) {
            errors.push_back({BankErrorKind::MissingAsset, file, "missing oracle asset " + oracle.filename().string()});
            ok = false;
        }
        if (fs::exists(out)) {
            ex->expected_stdout = read_file(out);
        } else if (ex->check.mode == CheckMode::VerifyAndRun) {
            errors.push_back({BankErrorKind::MissingAsset, file, "missing expected output " + out.filename().string()});
            ok = false;
        }
        if (auto [prev, fresh] = seen.emplace(ex->id, file); !fresh) {
            errors.push_back({BankErrorKind::DuplicateId, file,
                              "duplicate id '" + ex->id + "' also defined in " + prev->second.string()});
            continue;
        }
        if (ok) exercises.emplace(ex->id, std::move(*ex));
    }
    if (!errors.empty()) return unexpected(std::move(errors));
    return Bank(std::move(exercises));
}

}  // namespace verigrade::bank
