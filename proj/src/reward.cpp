#include "codequal/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace codequal {

using nlohmann::json;

FormatOutcome classify_format(std::string_view completion_text) {
    int candidates = 0;
    bool complete = false;
    for (const auto& b : extract_code_blocks(completion_text)) {
        if (!is_candidate_block(b)) continue;
        ++candidates;
        complete = b.complete;
    }
    if (candidates == 0) return FormatOutcome::None;
    if (candidates > 1) return FormatOutcome::Multiple;
    return complete ? FormatOutcome::SingleComplete : FormatOutcome::SingleIncomplete;
}

double format_reward(std::string_view completion_text, const FormatRewardTable& table) {
    switch (classify_format(completion_text)) {
        case FormatOutcome::SingleComplete: return table.single_complete;
        case FormatOutcome::SingleIncomplete: return table.single_incomplete;
        case FormatOutcome::Multiple: return table.multiple;
        case FormatOutcome::None: break;
    }
    return table.none;
}

double correctness_reward(const TestReport& report) {
    if (report.total_tests <= 0 || report.errored || report.timed_out) return 0.0;
    return static_cast<double>(std::clamp(report.passed, 0, report.total_tests)) / report.total_tests;
}

double combined_reward(const RewardComponents& c, const RewardWeights& w) {
    return w.format_weight * c.r_format + w.correct_weight * c.r_correct + w.quality_weight * c.r_quality;
}

std::vector<double> group_advantages(const std::vector<double>& rewards) {
    if (rewards.empty()) throw std::invalid_argument("group must contain at least one reward");
    const double n = static_cast<double>(rewards.size());
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / n);
    std::vector<double> out(rewards.size(), 0.0);
    if (!(sd >= 1e-8)) return out;
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
    return out;
}

RewardBreakdown score_rollout(std::string_view completion_text, const ProblemRecord& problem,
                              const EngineConfig& config, TestRunner* runner) {
    RewardBreakdown b;
    b.format = classify_format(completion_text);
    b.r_format = format_reward(completion_text, config.reward.format);

    const CodeBlock* chosen = nullptr;
    const auto blocks = extract_code_blocks(completion_text);
    for (const auto& blk : blocks)
        if (is_candidate_block(blk) && blk.complete) {
            chosen = &blk;
            break;
        }
    if (!chosen)
        for (const auto& blk : blocks)
            if (is_candidate_block(blk)) {
                chosen = &blk;
                break;
            }

    // An empty block would otherwise earn a perfect quality score for writing nothing.
    const bool blank = chosen && std::all_of(chosen->body.begin(), chosen->body.end(),
                                             [](unsigned char c) { return std::isspace(c) != 0; });
    if (!chosen || blank) {
        // Nothing to analyze or run: both components are zero by definition.
        b.r_quality = 0.0;
        b.r_correct = 0.0;
        b.r_total = combined_reward({b.r_format, 0.0, 0.0}, config.reward.weights);
        return b;
    }

    b.quality = analyze_source(parse_source("<completion>", chosen->body), config.analyzer);
    b.r_quality = b.quality->score;

    if (runner) {
        try {
            RunRequest req{chosen->body, problem.test_code, config.reward.runner.timeout_seconds,
                           config.reward.runner.memory_limit_mb};
            b.tests = runner->run(req);
            b.r_correct = correctness_reward(*b.tests);
        } catch (const TestRunnerBusy&) {
            throw;  // retryable; the caller decides
        } catch (const TestRunnerUnavailable& e) {
            b.correctness_available = false;
            b.correctness_note = e.what();
        }
    } else {
        b.correctness_available = false;
        b.correctness_note = "no test runner configured";
    }

    if (!b.correctness_available) {
        b.r_correct = 0.0;
        const auto& w = config.reward.weights;
        if (config.reward.unavailable_correctness == UnavailableCorrectness::Renormalize &&
            w.format_weight + w.quality_weight > 0) {
            const double rest = w.format_weight + w.quality_weight;
            b.r_total = (w.format_weight * b.r_format + w.quality_weight * b.r_quality) / rest;
            return b;
        }
    }
    b.r_total = combined_reward({b.r_format, b.r_correct, b.r_quality}, config.reward.weights);
    return b;
}

std::string_view to_string(FormatOutcome f) {
    switch (f) {
        case FormatOutcome::None: return "none";
        case FormatOutcome::SingleComplete: return "single_complete";
        case FormatOutcome::SingleIncomplete: return "single_incomplete";
        case FormatOutcome::Multiple: return "multiple";
    }
    return "none";
}

json to_json(const TestReport& r) {
    json per = json::array();
    for (const auto& t : r.per_test) per.push_back({{"name", t.name}, {"passed", t.passed}, {"message", t.message}});
    return {{"total_tests", r.total_tests}, {"passed", r.passed},   {"errored", r.errored},
            {"timed_out", r.timed_out},     {"per_test", per}};
}

json to_json(const RewardBreakdown& b) {
    json j = {{"r_format", b.r_format},
              {"r_correct", b.correctness_available ? json(b.r_correct) : json(nullptr)},
              {"r_quality", b.r_quality},
              {"r_total", b.r_total},
              {"format", to_string(b.format)},
              {"correctness_available", b.correctness_available}};
    if (!b.correctness_note.empty()) j["correctness_note"] = b.correctness_note;
    if (b.quality) {
        json counts = json::object();
        for (Severity s : kAllSeverities) counts[std::string(to_string(s))] = b.quality->count(s);
        json findings = json::array();
        for (const auto& f : b.quality->findings) findings.push_back(to_json(f));
        j["quality"] = {{"weighted_sum", b.quality->weighted_sum},
                        {"counts", counts},
                        {"parse_error", b.quality->parse_error},
                        {"findings", findings}};
    }
    if (b.tests) j["tests"] = to_json(*b.tests);
    return j;
}

}  // namespace codequal
