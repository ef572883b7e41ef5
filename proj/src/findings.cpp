#include "codequal/findings.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace codequal {

namespace {

using C = Category;
using S = Severity;

RuleDescriptor rule(std::string id, C cat, S sev, std::optional<std::string> cwe, std::string title,
                    std::string description, std::optional<S> escalated = std::nullopt,
                    std::string escalation = {}) {
    return RuleDescriptor{std::move(id), cat, sev, std::move(cwe), std::move(title),
                          std::move(description), escalated, std::move(escalation)};
}

std::vector<RuleDescriptor> build_registry() {
    std::vector<RuleDescriptor> r = {
        // Maintainability
        rule("MAINT-CYCLOMATIC", C::Maintainability, S::Medium, "CWE-1121", "Excessive cyclomatic complexity",
             "Function complexity exceeds the medium threshold.", S::High,
             "high when complexity exceeds the high threshold"),
        rule("MAINT-CLASS-COMPLEXITY", C::Maintainability, S::Medium, "CWE-1121", "Class with overly complex methods",
             "The most complex method of the class exceeds the high complexity threshold."),
        rule("MAINT-UNUSED-FUNCTION", C::Maintainability, S::Low, "CWE-561", "Unused function",
             "Function is defined but never referenced in the file."),
        rule("MAINT-UNUSED-CLASS", C::Maintainability, S::Low, "CWE-561", "Unused class",
             "Class is defined but never referenced in the file."),
        rule("MAINT-UNUSED-VARIABLE", C::Maintainability, S::Low, "CWE-563", "Unused variable",
             "Variable is assigned but never read in its scope."),
        rule("MAINT-UNUSED-IMPORT", C::Maintainability, S::Low, "CWE-1164", "Unused import",
             "Imported name is never referenced in the file."),
        rule("MAINT-TOO-MANY-PARAMS", C::Maintainability, S::Medium, "CWE-1064", "Excessive function arguments",
             "Function declares more named parameters than allowed (self/cls and variadics excluded)."),
        rule("MAINT-TOO-MANY-INSTANCE-ATTRS", C::Maintainability, S::Medium, std::nullopt,
             "Too many instance attributes", "Class assigns more distinct attributes on self than allowed."),
        rule("MAINT-LARGE-FILE", C::Maintainability, S::Medium, "CWE-1080", "Large file",
             "File has more lines than allowed."),
        rule("MAINT-TOO-MANY-BRANCHES", C::Maintainability, S::Medium, std::nullopt, "Excessive branches",
             "Function has more branches than allowed."),
        rule("MAINT-TOO-MANY-RETURNS", C::Maintainability, S::Medium, std::nullopt, "Excessive returns",
             "Function has more return statements than allowed."),
        rule("MAINT-DEEP-NESTING", C::Maintainability, S::Low, "CWE-1124", "Excessively deep nesting",
             "Control-flow blocks are nested deeper than allowed."),
        rule("MAINT-MISSING-DOCSTRING", C::Maintainability, S::Info, std::nullopt, "Missing docstring",
             "Public function or class has no docstring."),
        rule("MAINT-MISSING-MODULE-DOCSTRING", C::Maintainability, S::Info, std::nullopt,
             "Missing module docstring", "Module has no docstring (only when module docstrings are required)."),
        rule("MAINT-NAMING", C::Maintainability, S::Low, std::nullopt, "Poor naming convention",
             "Function or variable not in lower_snake_case, or class not in CapWords."),
        // Security
        rule("SEC-SHELL-INJECTION", C::Security, S::High, "CWE-78", "Shell command execution",
             "os.system / os.popen style call runs a command through the shell.", S::Critical,
             "critical when the command is built by runtime string interpolation"),
        rule("SEC-SUBPROCESS-SHELL", C::Security, S::High, "CWE-78", "Unsafe subprocess call",
             "subprocess invocation with shell enabled.", S::Critical,
             "critical when the command is built by runtime string interpolation"),
        rule("SEC-EVAL-EXEC", C::Security, S::High, "CWE-95", "Dynamic code execution",
             "eval/exec on a non-literal argument.", S::Critical,
             "critical when the argument is built by runtime string interpolation"),
        rule("SEC-PICKLE", C::Security, S::High, "CWE-502", "Insecure deserialization (pickle)",
             "pickle-family load of data that may be untrusted."),
        rule("SEC-YAML-LOAD", C::Security, S::High, "CWE-502", "Insecure deserialization (YAML)",
             "yaml.load without a safe loader."),
        rule("SEC-XML-PARSE", C::Security, S::Medium, "CWE-611", "Insecure XML parsing",
             "Standard-library XML parser used on external input."),
        rule("SEC-WEAK-HASH", C::Security, S::Medium, "CWE-327", "Weak hash algorithm",
             "MD5 or SHA1 hash constructor."),
        rule("SEC-INSECURE-RANDOM", C::Security, S::Medium, "CWE-330", "Insecure random generation",
             "Non-cryptographic random value used for a secret-like name."),
        rule("SEC-HARDCODED-SECRET", C::Security, S::Critical, "CWE-798", "Hard-coded secret",
             "String literal bound to a secret-like name, or a high-entropy token literal."),
        rule("SEC-VULNERABLE-DEPENDENCY", C::Security, S::High, "CWE-1395", "Known vulnerable package",
             "Pinned requirement falls inside a vulnerable range of the advisory database."),
        rule("SEC-REQUIREMENT-UNPARSEABLE", C::Security, S::Info, std::nullopt, "Unparseable requirement",
             "Requirements line could not be parsed."),
        // Performance
        rule("PERF-STRING-CONCAT-LOOP", C::Performance, S::Medium, "CWE-1046", "String concatenation in loop",
             "String accumulated with + or += inside a loop."),
        rule("PERF-IO-IN-LOOP", C::Performance, S::Medium, "CWE-1050", "File or network I/O in loop",
             "File open or network call inside a loop body."),
        rule("PERF-LOOP-INVARIANT-CALL", C::Performance, S::Low, "CWE-1050", "Loop-invariant call in condition",
             "Loop condition recomputes a call whose arguments do not change in the loop."),
        rule("PERF-LIST-CONCAT-LOOP", C::Performance, S::Low, std::nullopt, "Growing list by concatenation",
             "List rebuilt by concatenation inside a loop instead of append/extend."),
        rule("PERF-TOO-MANY-CLASS-ATTRS", C::Performance, S::Low, std::nullopt, "Excessive class attributes",
             "Class defines more distinct attributes than allowed."),
        rule("PERF-DEEP-NESTED-LITERAL", C::Performance, S::Low, std::nullopt, "Deeply nested structure",
             "Container literal nested deeper than allowed."),
        rule("PERF-LARGE-DICT", C::Performance, S::Low, std::nullopt, "Large dictionary literal",
             "Dictionary literal has more entries than allowed."),
        // Reliability
        rule("REL-BARE-EXCEPT", C::Reliability, S::Medium, "CWE-390", "Bare except clause",
             "except clause without an exception type."),
        rule("REL-EMPTY-EXCEPT", C::Reliability, S::Medium, "CWE-390", "Empty except clause",
             "Exception handler whose body is only pass."),
        rule("REL-BROAD-EXCEPT", C::Reliability, S::Low, "CWE-396", "Overly broad exception catching",
             "Catches Exception/BaseException without re-raising or logging."),
        rule("REL-UNCLOSED-RESOURCE", C::Reliability, S::Medium, "CWE-772", "Missing resource cleanup",
             "File opened into a name that is never closed nor used as a context manager."),
        rule("REL-LOCK-ORDER", C::Reliability, S::High, "CWE-833", "Lock ordering issue",
             "Two locks acquired in opposite orders by different functions."),
        rule("REL-LOCK-NOT-RELEASED", C::Reliability, S::High, "CWE-667", "Missing lock release",
             "Lock acquired without a release on some path."),
        rule("REL-INFINITE-LOOP", C::Reliability, S::High, "CWE-835", "While True without breaks",
             "while True loop with no break, return or raise."),
        rule("REL-MISSING-EXIT-CONDITION", C::Reliability, S::High, "CWE-835", "Missing exit condition",
             "Loop over a constant-true condition or endless iterator with no break, return or raise."),
        rule("REL-UNCHANGING-LOOP-CONDITION", C::Reliability, S::Medium, "CWE-835", "Unchanging loop counter",
             "No name in the while condition is modified in the loop body."),
        rule("REL-TYPE-MISSING-ANNOTATION", C::Reliability, S::Info, std::nullopt, "Missing annotations",
             "Public function has unannotated parameters or no return annotation."),
        rule("REL-TYPE-LITERAL-MISMATCH", C::Reliability, S::Low, std::nullopt, "Type inconsistency",
             "Name annotated with one builtin scalar type is assigned a literal of another."),
        rule("REL-TYPE-RETURN-MISMATCH", C::Reliability, S::Low, std::nullopt, "Incorrect return type",
             "Function annotated to return one builtin scalar type returns a literal of another."),
        rule("REL-TYPE-ARITY-MISMATCH", C::Reliability, S::Low, "CWE-685", "Incorrect argument count",
             "Call to a locally defined function with the wrong number of arguments."),
        rule("REL-TYPE-EXTERNAL", C::Reliability, S::Low, std::nullopt, "External type-checker finding",
             "Finding ingested from an external type checker report."),
        rule("PARSE-ERROR", C::Reliability, S::Critical, std::nullopt, "Unparseable source",
             "Source could not be parsed as Python."),
    };
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.rule_id < b.rule_id; });
    return r;
}

}  // namespace

std::string_view to_string(Severity s) {
    switch (s) {
        case Severity::Info: return "info";
        case Severity::Low: return "low";
        case Severity::Medium: return "medium";
        case Severity::High: return "high";
        case Severity::Critical: return "critical";
    }
    return "?";
}

std::string_view to_string(Category c) {
    switch (c) {
        case Category::Maintainability: return "maintainability";
        case Category::Security: return "security";
        case Category::Performance: return "performance";
        case Category::Reliability: return "reliability";
    }
    return "?";
}

Severity parse_severity(std::string_view name) {
    for (Severity s : kAllSeverities)
        if (to_string(s) == name) return s;
    throw std::invalid_argument("unknown severity: " + std::string(name));
}

Category parse_category(std::string_view name) {
    for (Category c : kAllCategories)
        if (to_string(c) == name) return c;
    throw std::invalid_argument("unknown category: " + std::string(name));
}

SeverityWeights::SeverityWeights(const std::array<double, 5>& by_severity) : weights_(by_severity) {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!std::isfinite(weights_[i]) || weights_[i] < 0.0)
            throw std::invalid_argument("severity weights must be finite and non-negative");
        if (i > 0 && weights_[i] < weights_[i - 1])
            throw std::invalid_argument("severity weights must be non-decreasing in severity");
    }
}

const std::vector<RuleDescriptor>& rule_registry() {
    static const std::vector<RuleDescriptor> registry = build_registry();
    return registry;
}

namespace {
const RuleDescriptor* find_rule(std::string_view rule_id) {
    const auto& r = rule_registry();
    auto it = std::lower_bound(r.begin(), r.end(), rule_id,
                               [](const RuleDescriptor& d, std::string_view id) { return d.rule_id < id; });
    return it != r.end() && it->rule_id == rule_id ? &*it : nullptr;
}
}  // namespace

const RuleDescriptor& registry_lookup(std::string_view rule_id) {
    if (const RuleDescriptor* d = find_rule(rule_id)) return *d;
    throw UnknownRule(std::string(rule_id));
}

bool registry_contains(std::string_view rule_id) { return find_rule(rule_id) != nullptr; }

Finding make_finding(std::string_view rule_id, Span span, std::string message) {
    const RuleDescriptor& d = registry_lookup(rule_id);
    return Finding{d.rule_id, d.category, d.default_severity, d.cwe_id, std::move(message), std::move(span)};
}

Finding make_escalated_finding(std::string_view rule_id, Span span, std::string message) {
    const RuleDescriptor& d = registry_lookup(rule_id);
    if (!d.escalated_severity) throw std::logic_error("rule has no escalation: " + d.rule_id);
    return Finding{d.rule_id, d.category, *d.escalated_severity, d.cwe_id, std::move(message), std::move(span)};
}

bool finding_less(const Finding& a, const Finding& b) {
    // Higher severity first among otherwise equal keys, so dedup keeps it.
    const auto key = [](const Finding& f) {
        return std::tie(f.span.file_label, f.span.start_line, f.span.start_col, f.rule_id, f.span.end_line,
                        f.span.end_col);
    };
    if (key(a) != key(b)) return key(a) < key(b);
    if (a.severity != b.severity) return a.severity > b.severity;
    if (a.message != b.message) return a.message < b.message;
    return a.cwe_id < b.cwe_id;
}

std::vector<Finding> merge_findings(const std::vector<std::vector<Finding>>& parts) {
    std::vector<Finding> all;
    for (const auto& part : parts) all.insert(all.end(), part.begin(), part.end());
    std::sort(all.begin(), all.end(), finding_less);
    auto same = [](const Finding& a, const Finding& b) { return a.rule_id == b.rule_id && a.span == b.span; };
    all.erase(std::unique(all.begin(), all.end(), same), all.end());
    return all;
}

}  // namespace codequal
