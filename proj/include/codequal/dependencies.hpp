#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "codequal/findings.hpp"

namespace codequal {

class VersionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A release version under the public-version subset of PEP 440:
/// [N!]N(.N)*[{a|b|rc}N][.postN][.devN][+local]. Local labels are kept for
/// display and ignored by ordering.
class Version {
public:
    /// Throws VersionError on text outside the grammar.
    static Version parse(std::string_view text);

    const std::vector<long long>& release() const { return release_; }
    std::string str() const { return text_; }

    friend std::strong_ordering operator<=>(const Version& a, const Version& b);
    friend bool operator==(const Version& a, const Version& b) { return (a <=> b) == 0; }

private:
    std::string text_;
    long long epoch_ = 0;
    std::vector<long long> release_;
    std::optional<std::pair<int, long long>> pre_;  // phase 0=a, 1=b, 2=rc
    std::optional<long long> post_;
    std::optional<long long> dev_;
};

/// One comparison clause: "==1.2", "!=1.2.*", "<2", "~=1.4.2", "===foo".
struct VersionClause {
    std::string op;
    std::string version_text;
    bool wildcard = false;

    bool admits(const Version& v, std::string_view raw) const;
};

/// Alternatives separated by "||", each a comma-separated conjunction of
/// clauses. ">=1.0,<1.26.5 || ==2.0.1" admits 1.5 and 2.0.1.
class VersionRange {
public:
    /// Throws VersionError when a clause or version does not parse.
    static VersionRange parse(std::string_view text);

    bool contains(const Version& v) const;
    const std::string& text() const { return text_; }

private:
    std::string text_;
    std::vector<std::vector<VersionClause>> alternatives_;
};

/// Lowercase with runs of '-', '_' and '.' folded to one '-'.
std::string normalize_package_name(std::string_view name);

struct Advisory {
    std::string package_name;  // normalized
    VersionRange vulnerable_range;
    std::string advisory_id;
    std::optional<std::string> cwe_id;
};

class AdvisoryDbError : public std::runtime_error {
public:
    AdvisoryDbError(int line, const std::string& message)
        : std::runtime_error("advisory database line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Immutable set of advisories. The on-disk form is JSON Lines: one object
/// per line with "name", "range", "advisory_id" and optional "cwe_id";
/// blank lines and lines starting with '#' are skipped.
class AdvisoryDb {
public:
    AdvisoryDb() = default;
    explicit AdvisoryDb(std::vector<Advisory> records);

    /// Throws AdvisoryDbError naming the offending line.
    static AdvisoryDb parse_jsonl(std::string_view text);
    /// Throws AdvisoryDbError, or std::runtime_error when the file cannot be read.
    static AdvisoryDb load_file(const std::string& path);

    const std::vector<Advisory>& records() const { return records_; }
    /// Advisories for `package` whose range contains `v`, in file order.
    std::vector<const Advisory*> matching(std::string_view package, const Version& v) const;

private:
    std::vector<Advisory> records_;
};

/// One parsed requirement line.
struct Requirement {
    std::string name;                   // as written
    std::vector<VersionClause> clauses;
    bool url = false;                   // "name @ url"
    int line = 0;

    /// The pinned version for a single exact "==" / "===" clause.
    std::optional<std::string> pinned_version() const;
};

/// Parses one logical requirements line (comment already removed). Returns
/// nullopt for option lines and bare paths/URLs; throws VersionError on text
/// that is neither.
std::optional<Requirement> parse_requirement_line(std::string_view line);

/// High findings for each pinned requirement inside an advisory range and
/// info findings for lines that do not parse.
std::vector<Finding> check_dependencies(std::string_view manifest_text, const AdvisoryDb& db,
                                        const std::string& file_label = "requirements.txt");

}  // namespace codequal
