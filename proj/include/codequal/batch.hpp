#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "codequal/config.hpp"
#include "codequal/reward.hpp"
#include "json.hpp"

namespace codequal {

/// Malformed dataset, completions or batch request input.
class RequestError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Problems keyed by id. The file form is JSON Lines, one record per line
/// with fields problem_id, difficulty, statement, initial_code,
/// ideal_solution and test_code; blank lines are skipped.
class ProblemSet {
public:
    ProblemSet() = default;
    /// Throws RequestError on a malformed line or a duplicate problem_id.
    static ProblemSet parse_jsonl(std::string_view text);
    /// Throws std::runtime_error when unreadable, RequestError when malformed.
    static ProblemSet load_file(const std::string& path);

    void add(ProblemRecord p);
    const ProblemRecord* find(const std::string& id) const;
    const std::vector<ProblemRecord>& records() const { return records_; }

private:
    std::vector<ProblemRecord> records_;
    std::map<std::string, std::size_t> index_;
};

ProblemRecord problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProblemRecord& p);

struct RolloutInput {
    std::string rollout_id;
    std::string completion;
    std::string problem_id;
};

/// Rollouts [start, start + count) form one advantage group.
struct GroupSpan {
    std::size_t start = 0;
    std::size_t count = 0;
};

struct BatchScoreRequest {
    std::vector<RolloutInput> rollouts;
    std::vector<GroupSpan> groups;
    nlohmann::json config_overrides = nlohmann::json::object();
};

/// Throws RequestError on missing fields, groups out of range, empty or overlapping groups.
BatchScoreRequest parse_batch_request(const nlohmann::json& j);
RolloutInput parse_rollout(const nlohmann::json& j, std::size_t index);
/// JSON Lines of {rollout_id?, problem_id, completion}; blank lines skipped.
/// A missing rollout_id defaults to the row index. Throws RequestError.
std::vector<RolloutInput> parse_completions_jsonl(std::string_view text);

struct RolloutResult {
    std::string rollout_id;
    std::string problem_id;
    std::optional<RewardBreakdown> breakdown;  // empty when the row failed
    std::string error;
    double elapsed_ms = 0.0;

    double reward() const { return breakdown ? breakdown->r_total : 0.0; }
};

struct GroupResult {
    GroupSpan span;
    std::vector<double> advantages;
};

struct BatchScoreResponse {
    std::string config_fingerprint;
    std::vector<RolloutResult> results;  // request order
    std::vector<GroupResult> groups;
};

/// Scores every rollout (rows with an unknown problem carry an error and
/// reward 0) and normalizes each declared group. Throws TestRunnerBusy.
BatchScoreResponse score_batch(const BatchScoreRequest& request, const ProblemSet& problems,
                               const EngineConfig& config, TestRunner* runner, int parallelism = 1);

nlohmann::json to_json(const RolloutResult& r, bool include_timing = true);
nlohmann::json to_json(const BatchScoreResponse& r, bool include_timing = true);

}  // namespace codequal
