#pragma once

#include <string>
#include <vector>

namespace codequal {

struct MaintainabilityThresholds {
    int cyclomatic_medium = 10;
    int cyclomatic_high = 20;
    int max_parameters = 5;
    int max_instance_attributes = 10;
    int max_file_loc = 1000;
    int max_branches = 12;
    int max_returns = 6;
    int max_nesting_depth = 4;
    bool require_module_docstring = false;

    /// Throws std::invalid_argument when a limit is not strictly positive or
    /// cyclomatic_medium >= cyclomatic_high.
    void validate() const;

    friend bool operator==(const MaintainabilityThresholds&, const MaintainabilityThresholds&) = default;
};

struct PerformanceThresholds {
    int max_class_attributes = 15;
    int max_nesting_containers = 3;
    int max_dict_literal_entries = 50;

    void validate() const;

    friend bool operator==(const PerformanceThresholds&, const PerformanceThresholds&) = default;
};

struct SecretHeuristics {
    std::vector<std::string> name_patterns{"password", "passwd", "secret", "token",
                                           "api_key", "apikey", "private_key"};
    double min_entropy_bits_per_char = 3.5;
    int min_literal_length = 16;

    /// Throws std::invalid_argument when min_literal_length < 8, the entropy
    /// bound is negative, or a pattern is empty.
    void validate() const;

    friend bool operator==(const SecretHeuristics&, const SecretHeuristics&) = default;
};

}  // namespace codequal
