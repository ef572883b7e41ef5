#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "codequal/findings.hpp"
#include "codequal/thresholds.hpp"
#include "json.hpp"

namespace codequal {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AnalyzerConfig {
    SeverityWeights severity_weights;
    MaintainabilityThresholds maintainability;
    PerformanceThresholds performance;
    SecretHeuristics secrets;
    std::set<std::string> enabled_rules;  // every registry rule by default
    std::optional<std::string> advisory_db_path;

    AnalyzerConfig();

    /// Throws ConfigError on out-of-range thresholds or rule ids outside the registry.
    void validate() const;
    bool rule_enabled(std::string_view rule_id) const { return enabled_rules.count(std::string(rule_id)) > 0; }

    /// Lowercase hex SHA-256 of the canonical JSON form.
    std::string fingerprint() const;

    friend bool operator==(const AnalyzerConfig&, const AnalyzerConfig&) = default;
};

struct RewardWeights {
    double format_weight = 0.2;
    double correct_weight = 0.3;
    double quality_weight = 0.5;

    /// Throws ConfigError unless all weights are finite, non-negative and sum to 1 (within 1e-9).
    void validate() const;

    friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

/// Format reward per completion shape.
struct FormatRewardTable {
    double single_complete = 1.0;
    double single_incomplete = 0.25;
    double multiple = 0.25;
    double none = 0.0;

    void validate() const;

    friend bool operator==(const FormatRewardTable&, const FormatRewardTable&) = default;
};

/// What r_correct becomes when the test runner cannot be reached.
enum class UnavailableCorrectness {
    FailClosed,   // r_correct = 0 with the usual weights
    Renormalize,  // drop the correctness term and rescale the other two weights
};

struct TestRunnerSettings {
    std::vector<std::string> command;  // empty: taken from CODEQUAL_TESTRUNNER, else no runner
    int pool_size = 2;                 // overridden by CODEQUAL_TESTRUNNER_POOL
    double timeout_seconds = 10.0;
    int memory_limit_mb = 512;
    double acquire_timeout_seconds = 30.0;

    void validate() const;

    friend bool operator==(const TestRunnerSettings&, const TestRunnerSettings&) = default;
};

struct RewardConfig {
    RewardWeights weights;
    FormatRewardTable format;
    UnavailableCorrectness unavailable_correctness = UnavailableCorrectness::FailClosed;
    TestRunnerSettings runner;

    void validate() const;

    friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

struct EngineConfig {
    AnalyzerConfig analyzer;
    RewardConfig reward;
    int parallelism = 0;  // 0: hardware concurrency

    void validate() const;
    /// Digest of the scoring-relevant fields (analyzer and reward, not the runner command).
    std::string fingerprint() const;

    friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

nlohmann::json to_json(const AnalyzerConfig& c);
nlohmann::json to_json(const RewardConfig& c);
nlohmann::json to_json(const EngineConfig& c);

/// Strict readers: unknown keys, wrong types and invalid values throw
/// ConfigError. Missing keys keep their defaults.
AnalyzerConfig analyzer_config_from_json(const nlohmann::json& j);
RewardConfig reward_config_from_json(const nlohmann::json& j);
EngineConfig engine_config_from_json(const nlohmann::json& j);

/// Reads a JSON config file. Throws ConfigError.
EngineConfig load_engine_config(const std::string& path);

/// `base` with an RFC 7386 merge patch applied, re-validated.
EngineConfig apply_overrides(const EngineConfig& base, const nlohmann::json& patch);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace codequal
