#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "codequal/config.hpp"
#include "codequal/scoring.hpp"
#include "codequal/source.hpp"

namespace codequal {

struct ProblemRecord {
    std::string problem_id;
    std::string difficulty;
    std::string statement;
    std::string initial_code;
    std::string ideal_solution;
    std::string test_code;
};

struct TestCaseResult {
    std::string name;
    bool passed = false;
    std::string message;
};

struct TestReport {
    int total_tests = 0;
    int passed = 0;
    bool errored = false;
    bool timed_out = false;
    std::vector<TestCaseResult> per_test;
    double duration_seconds = 0.0;
};

struct RunRequest {
    std::string solution_code;
    std::string test_code;
    double timeout_seconds = 10.0;
    int memory_limit_mb = 512;
};

/// The runner cannot be started or stopped answering.
class TestRunnerUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every runner is busy and none freed up in time; retrying later may succeed.
class TestRunnerBusy : public TestRunnerUnavailable {
public:
    using TestRunnerUnavailable::TestRunnerUnavailable;
};

/// Executes held-out tests for a candidate solution.
class TestRunner {
public:
    virtual ~TestRunner() = default;
    /// Throws TestRunnerUnavailable (or TestRunnerBusy) when no result can be obtained.
    virtual TestReport run(const RunRequest& request) = 0;
};

enum class FormatOutcome { None, SingleComplete, SingleIncomplete, Multiple };

FormatOutcome classify_format(std::string_view completion_text);
double format_reward(std::string_view completion_text, const FormatRewardTable& table = {});

/// passed / total; 0 when there are no tests or the run errored or timed out.
double correctness_reward(const TestReport& report);

struct RewardComponents {
    double r_format = 0.0;
    double r_correct = 0.0;
    double r_quality = 0.0;
};

double combined_reward(const RewardComponents& c, const RewardWeights& w = {});

/// (r - mean) / population std; all zeros when std < 1e-8. Throws
/// std::invalid_argument for an empty group.
std::vector<double> group_advantages(const std::vector<double>& rewards);

struct RewardBreakdown {
    double r_format = 0.0;
    double r_correct = 0.0;
    double r_quality = 0.0;
    double r_total = 0.0;
    FormatOutcome format = FormatOutcome::None;
    bool correctness_available = true;
    std::string correctness_note;       // why r_correct was not measured, if it was not
    std::optional<FileReport> quality;  // analysis of the selected block
    std::optional<TestReport> tests;
};

/// Scores one completion. The first complete candidate block (else the first
/// candidate) is analyzed for quality and, when `runner` is given, tested
/// against the problem's tests. A null runner or an unreachable one leaves
/// r_correct unavailable, resolved by config.unavailable_correctness.
/// TestRunnerBusy propagates so callers can answer with a retryable status.
RewardBreakdown score_rollout(std::string_view completion_text, const ProblemRecord& problem,
                              const EngineConfig& config, TestRunner* runner);

nlohmann::json to_json(const TestReport& r);
nlohmann::json to_json(const RewardBreakdown& b);
std::string_view to_string(FormatOutcome f);

}  // namespace codequal
