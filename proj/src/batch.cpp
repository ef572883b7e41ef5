#include "codequal/batch.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace codequal {

using nlohmann::json;

namespace {

std::string required_string(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_string())
        throw RequestError(where + ": missing or non-string field '" + key + "'");
    return j[key].get<std::string>();
}

}  // namespace

ProblemRecord problem_from_json(const json& j) {
    if (!j.is_object()) throw RequestError("problem record must be an object");
    ProblemRecord p;
    p.problem_id = required_string(j, "problem_id", "problem");
    if (p.problem_id.empty()) throw RequestError("problem: empty problem_id");
    const std::string where = "problem " + p.problem_id;
    p.difficulty = required_string(j, "difficulty", where);
    p.statement = required_string(j, "statement", where);
    p.initial_code = required_string(j, "initial_code", where);
    p.ideal_solution = required_string(j, "ideal_solution", where);
    p.test_code = required_string(j, "test_code", where);
    return p;
}

json to_json(const ProblemRecord& p) {
    return {{"problem_id", p.problem_id},         {"difficulty", p.difficulty},
            {"statement", p.statement},           {"initial_code", p.initial_code},
            {"ideal_solution", p.ideal_solution}, {"test_code", p.test_code}};
}

void ProblemSet::add(ProblemRecord p) {
    if (index_.count(p.problem_id)) throw RequestError("duplicate problem_id '" + p.problem_id + "'");
    index_[p.problem_id] = records_.size();
    records_.push_back(std::move(p));
}

const ProblemRecord* ProblemSet::find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &records_[it->second];
}

ProblemSet ProblemSet::parse_jsonl(std::string_view text) {
    ProblemSet set;
    std::istringstream in{std::string(text)};
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            set.add(problem_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw RequestError("problems line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        } catch (const RequestError& e) {
            throw RequestError("problems line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return set;
}

ProblemSet ProblemSet::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read problems file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_jsonl(buf.str());
}

RolloutInput parse_rollout(const json& j, std::size_t index) {
    const std::string where = "rollouts[" + std::to_string(index) + "]";
    if (!j.is_object()) throw RequestError(where + ": expected an object");
    RolloutInput r;
    r.completion = required_string(j, "completion", where);
    r.problem_id = required_string(j, "problem_id", where);
    if (j.contains("rollout_id")) {
        if (!j["rollout_id"].is_string()) throw RequestError(where + ": rollout_id must be a string");
        r.rollout_id = j["rollout_id"].get<std::string>();
    } else {
        r.rollout_id = std::to_string(index);
    }
    return r;
}

std::vector<RolloutInput> parse_completions_jsonl(std::string_view text) {
    std::vector<RolloutInput> out;
    std::istringstream in{std::string(text)};
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_rollout(json::parse(line), out.size()));
        } catch (const json::exception& e) {
            throw RequestError("completions line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        } catch (const RequestError& e) {
            throw RequestError("completions line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

BatchScoreRequest parse_batch_request(const json& j) {
    if (!j.is_object()) throw RequestError("request body must be an object");
    for (const auto& [key, _] : j.items())
        if (key != "rollouts" && key != "groups" && key != "config_overrides")
            throw RequestError("unknown request field '" + key + "'");
    if (!j.contains("rollouts") || !j["rollouts"].is_array()) throw RequestError("'rollouts' must be a list");
    BatchScoreRequest req;
    for (std::size_t i = 0; i < j["rollouts"].size(); ++i) req.rollouts.push_back(parse_rollout(j["rollouts"][i], i));
    if (j.contains("groups")) {
        if (!j["groups"].is_array()) throw RequestError("'groups' must be a list");
        for (const auto& g : j["groups"]) {
            auto natural = [&](const char* k) {
                return g.contains(k) && g[k].is_number_integer() && g[k].get<long long>() >= 0;
            };
            if (!g.is_object() || !natural("start") || !natural("count"))
                throw RequestError("each group needs non-negative integer 'start' and 'count'");
            req.groups.push_back({g["start"].get<std::size_t>(), g["count"].get<std::size_t>()});
        }
    }
    if (j.contains("config_overrides")) {
        if (!j["config_overrides"].is_object()) throw RequestError("'config_overrides' must be an object");
        req.config_overrides = j["config_overrides"];
    }
    std::vector<GroupSpan> sorted = req.groups;
    std::sort(sorted.begin(), sorted.end(), [](const GroupSpan& a, const GroupSpan& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const GroupSpan& g = sorted[i];
        if (g.count == 0) throw RequestError("group at " + std::to_string(g.start) + " is empty");
        if (g.start + g.count > req.rollouts.size())
            throw RequestError("group at " + std::to_string(g.start) + " runs past the last rollout");
        if (i > 0 && sorted[i - 1].start + sorted[i - 1].count > g.start)
            throw RequestError("groups overlap at rollout " + std::to_string(g.start));
    }
    return req;
}

BatchScoreResponse score_batch(const BatchScoreRequest& request, const ProblemSet& problems,
                               const EngineConfig& config, TestRunner* runner, int parallelism) {
    BatchScoreResponse resp;
    resp.config_fingerprint = config.fingerprint();
    resp.results.resize(request.rollouts.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr busy;
    std::mutex busy_mu;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < request.rollouts.size();) {
            const RolloutInput& in = request.rollouts[i];
            RolloutResult& out = resp.results[i];
            out.rollout_id = in.rollout_id;
            out.problem_id = in.problem_id;
            const auto t0 = std::chrono::steady_clock::now();
            const ProblemRecord* problem = problems.find(in.problem_id);
            if (!problem) {
                out.error = "unknown problem_id '" + in.problem_id + "'";
            } else {
                try {
                    out.breakdown = score_rollout(in.completion, *problem, config, runner);
                } catch (const TestRunnerBusy&) {
                    std::lock_guard lock(busy_mu);
                    if (!busy) busy = std::current_exception();
                }
            }
            out.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(static_cast<unsigned>(std::max(1, parallelism)),
                                                             static_cast<unsigned>(request.rollouts.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    if (busy) std::rethrow_exception(busy);

    for (const auto& g : request.groups) {
        std::vector<double> rewards;
        for (std::size_t i = g.start; i < g.start + g.count; ++i) rewards.push_back(resp.results[i].reward());
        resp.groups.push_back({g, group_advantages(rewards)});
    }
    return resp;
}

json to_json(const RolloutResult& r, bool include_timing) {
    json j = {{"rollout_id", r.rollout_id}, {"problem_id", r.problem_id}};
    if (r.breakdown) j["breakdown"] = to_json(*r.breakdown);
    else j["error"] = r.error;
    if (include_timing) j["elapsed_ms"] = r.elapsed_ms;
    return j;
}

json to_json(const BatchScoreResponse& r, bool include_timing) {
    json results = json::array();
    for (const auto& x : r.results) results.push_back(to_json(x, include_timing));
    json groups = json::array();
    for (const auto& g : r.groups) {
        json rewards = json::array();
        for (std::size_t i = g.span.start; i < g.span.start + g.span.count; ++i) rewards.push_back(r.results[i].reward());
        groups.push_back(
            {{"start", g.span.start}, {"count", g.span.count}, {"rewards", rewards}, {"advantages", g.advantages}});
    }
    return {{"schema_version", 1}, {"config_fingerprint", r.config_fingerprint}, {"results", results}, {"groups", groups}};
}

}  // namespace codequal
