#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "codequal/span.hpp"

namespace codequal {

enum class Severity { Info, Low, Medium, High, Critical };
enum class Category { Maintainability, Security, Performance, Reliability };

inline constexpr std::array<Severity, 5> kAllSeverities = {
    Severity::Info, Severity::Low, Severity::Medium, Severity::High, Severity::Critical};
inline constexpr std::array<Category, 4> kAllCategories = {
    Category::Maintainability, Category::Security, Category::Performance, Category::Reliability};

std::string_view to_string(Severity s);
std::string_view to_string(Category c);
/// Throw std::invalid_argument on unknown names.
Severity parse_severity(std::string_view name);
Category parse_category(std::string_view name);

/// Per-severity multipliers of the weighted finding count.
class SeverityWeights {
public:
    SeverityWeights() = default;
    /// Throws std::invalid_argument unless every weight is finite, non-negative
    /// and the sequence is non-decreasing in severity order.
    explicit SeverityWeights(const std::array<double, 5>& by_severity);

    double weight(Severity s) const { return weights_[static_cast<std::size_t>(s)]; }
    const std::array<double, 5>& values() const { return weights_; }

    friend bool operator==(const SeverityWeights&, const SeverityWeights&) = default;

private:
    std::array<double, 5> weights_{0.5, 1.0, 2.5, 5.0, 10.0};
};

struct RuleDescriptor {
    std::string rule_id;
    Category category;
    Severity default_severity;
    std::optional<std::string> cwe_id;
    std::string title;
    std::string description;
    std::optional<Severity> escalated_severity;  // only rules with a documented escalation
    std::string escalation;
};

class UnknownRule : public std::runtime_error {
public:
    explicit UnknownRule(const std::string& rule_id) : std::runtime_error("unknown rule: " + rule_id) {}
};

/// Every rule, sorted by rule_id.
const std::vector<RuleDescriptor>& rule_registry();
const RuleDescriptor& registry_lookup(std::string_view rule_id);
bool registry_contains(std::string_view rule_id);

struct Finding {
    std::string rule_id;
    Category category = Category::Maintainability;
    Severity severity = Severity::Info;
    std::optional<std::string> cwe_id;
    std::string message;
    Span span;

    const std::string& file_label() const { return span.file_label; }

    friend bool operator==(const Finding&, const Finding&) = default;
};

/// Builds a finding with the registry's category, CWE and default severity.
Finding make_finding(std::string_view rule_id, Span span, std::string message);
/// Same, at the rule's documented escalated severity. Throws std::logic_error
/// for rules without an escalation.
Finding make_escalated_finding(std::string_view rule_id, Span span, std::string message);

/// Total order used for reports: file, position, rule, then the remaining fields.
bool finding_less(const Finding& a, const Finding& b);

/// Concatenates, sorts and collapses findings that share rule_id and span.
/// The result does not depend on the order of `parts`.
std::vector<Finding> merge_findings(const std::vector<std::vector<Finding>>& parts);

}  // namespace codequal
