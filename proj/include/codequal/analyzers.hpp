#pragma once

#include <vector>

#include "codequal/findings.hpp"
#include "codequal/source.hpp"
#include "codequal/thresholds.hpp"

namespace codequal {

// Maintainability.

/// McCabe count: 1 plus if/elif, loop headers, extra boolean operands,
/// conditional expressions, except clauses, comprehension conditions and
/// match cases. Nested function and class bodies are not counted.
int cyclomatic_complexity(const FunctionInfo& fn);
int cyclomatic_complexity(const py::Node& function_def);

std::vector<Finding> detect_complexity_issues(const SourceUnit& unit, const MaintainabilityThresholds& th = {});
std::vector<Finding> detect_dead_code(const SourceUnit& unit);
std::vector<Finding> detect_structure_issues(const SourceUnit& unit, const MaintainabilityThresholds& th = {});
std::vector<Finding> detect_style_issues(const SourceUnit& unit, const MaintainabilityThresholds& th = {});

// Security.

std::vector<Finding> detect_injection(const SourceUnit& unit);
std::vector<Finding> detect_unsafe_deserialization(const SourceUnit& unit);
std::vector<Finding> detect_weak_crypto(const SourceUnit& unit, const SecretHeuristics& h = {});
std::vector<Finding> detect_hardcoded_secrets(const SourceUnit& unit, const SecretHeuristics& h = {});

/// Shannon entropy of `text` in bits per byte.
double shannon_entropy(std::string_view text);

// Performance.

std::vector<Finding> detect_string_concat_in_loops(const SourceUnit& unit);
std::vector<Finding> detect_loop_resource_issues(const SourceUnit& unit);
std::vector<Finding> detect_data_structure_issues(const SourceUnit& unit, const PerformanceThresholds& th = {});

// Reliability.

std::vector<Finding> detect_exception_issues(const SourceUnit& unit);
std::vector<Finding> detect_concurrency_issues(const SourceUnit& unit);
std::vector<Finding> detect_infinite_loops(const SourceUnit& unit);
std::vector<Finding> detect_type_safety_issues(const SourceUnit& unit);

}  // namespace codequal
