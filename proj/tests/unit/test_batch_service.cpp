#include <atomic>
#include <thread>

#include "codequal/service.hpp"
#include "httplib.h"
#include "test_util.hpp"

using namespace codequal;
using codequal::testing::fixture_path;
using nlohmann::json;

namespace {

class StubRunner : public TestRunner {
public:
    TestReport run(const RunRequest& req) override {
        TestReport r;
        r.total_tests = 2;
        // "fail" anywhere in the solution means every test fails.
        r.passed = req.solution_code.find("fail") == std::string::npos ? 2 : 0;
        return r;
    }
};

class BusyRunner : public TestRunner {
public:
    TestReport run(const RunRequest&) override { throw TestRunnerBusy("all workers busy"); }
};

ProblemSet problems() {
    ProblemSet ps;
    ProblemRecord p;
    p.problem_id = "p1";
    p.test_code = "def test_a():\n    pass\n";
    ps.add(p);
    return ps;
}

const std::string kGood = "```python\n\"\"\"Doc.\"\"\"\n__all__ = []\n```";
const std::string kBad = "no code here";

json rollout(const std::string& id, const std::string& completion, const std::string& problem = "p1") {
    return {{"rollout_id", id}, {"completion", completion}, {"problem_id", problem}};
}

}  // namespace

TEST(ProblemSetTest, ParseAndDuplicates) {
    const auto ps = ProblemSet::parse_jsonl(
        "{\"problem_id\":\"a\",\"difficulty\":\"easy\",\"statement\":\"s\",\"initial_code\":\"\","
        "\"ideal_solution\":\"\",\"test_code\":\"t\"}\n\n");
    ASSERT_NE(ps.find("a"), nullptr);
    EXPECT_EQ(ps.find("b"), nullptr);
    EXPECT_THROW(ProblemSet::parse_jsonl("{\"problem_id\":\"a\",\"test_code\":\"t\"}\n"
                                         "{\"problem_id\":\"a\",\"test_code\":\"t\"}\n"),
                 RequestError);
    EXPECT_THROW(ProblemSet::parse_jsonl("{oops\n"), RequestError);
    EXPECT_EQ(ProblemSet::load_file(fixture_path("problems.jsonl")).records().size(), 3u);
}

TEST(BatchRequest, Validation) {
    const json ok = {{"rollouts", {rollout("a", kGood), rollout("b", kBad)}}, {"groups", {{{"start", 0}, {"count", 2}}}}};
    EXPECT_EQ(parse_batch_request(ok).groups.size(), 1u);
    json bad = ok;
    bad["groups"] = {{{"start", 1}, {"count", 2}}};
    EXPECT_THROW(parse_batch_request(bad), RequestError);
    bad["groups"] = {{{"start", 0}, {"count", 0}}};
    EXPECT_THROW(parse_batch_request(bad), RequestError);
    bad["groups"] = {{{"start", 0}, {"count", 2}}, {{"start", 1}, {"count", 1}}};
    EXPECT_THROW(parse_batch_request(bad), RequestError);
    bad = ok;
    bad["extra"] = 1;
    EXPECT_THROW(parse_batch_request(bad), RequestError);
    EXPECT_EQ(parse_rollout({{"completion", "x"}, {"problem_id", "p"}}, 4).rollout_id, "4");
}

TEST(Batch, GroupAdvantagesAlignWithBoundaries) {
    StubRunner runner;
    const auto req = parse_batch_request(
        {{"rollouts", {rollout("a", kGood), rollout("b", kBad), rollout("c", kGood), rollout("d", kGood)}},
         {"groups", {{{"start", 0}, {"count", 2}}, {{"start", 2}, {"count", 2}}}}});
    const auto resp = score_batch(req, problems(), EngineConfig{}, &runner, 3);
    ASSERT_EQ(resp.results.size(), 4u);
    EXPECT_EQ(resp.results[0].rollout_id, "a");
    EXPECT_EQ(resp.results[3].rollout_id, "d");
    EXPECT_EQ(resp.results[0].reward(), 1.0);
    EXPECT_EQ(resp.results[1].reward(), 0.0);
    ASSERT_EQ(resp.groups.size(), 2u);
    EXPECT_EQ(resp.groups[0].advantages, (std::vector<double>{1.0, -1.0}));
    EXPECT_EQ(resp.groups[1].advantages, (std::vector<double>{0.0, 0.0}));
}

TEST(Batch, UnknownProblemIsRowError) {
    StubRunner runner;
    const auto req = parse_batch_request({{"rollouts", {rollout("a", kGood, "missing"), rollout("b", kGood)}},
                                          {"groups", {{{"start", 0}, {"count", 2}}}}});
    const auto resp = score_batch(req, problems(), EngineConfig{}, &runner);
    EXPECT_FALSE(resp.results[0].error.empty());
    EXPECT_FALSE(resp.results[0].breakdown);
    EXPECT_EQ(resp.groups[0].advantages, (std::vector<double>{-1.0, 1.0}));
}

TEST(Service, Health) {
    const ScoringService svc(EngineConfig{}, problems(), nullptr);
    const auto r = svc.handle("GET", "/v1/health", "");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.body["ok"], true);
    EXPECT_EQ(r.body["config_fingerprint"], EngineConfig{}.fingerprint());
    EXPECT_EQ(r.headers.at(kSchemaVersionHeader), "1");
}

TEST(Service, RoutingErrors) {
    const ScoringService svc(EngineConfig{}, problems(), nullptr);
    EXPECT_EQ(svc.handle("POST", "/v1/health", "").status, 405);
    EXPECT_EQ(svc.handle("GET", "/v1/batch", "").status, 405);
    EXPECT_EQ(svc.handle("GET", "/v2/nope", "").status, 404);
    EXPECT_EQ(svc.handle("POST", "/v1/batch", "{not json").status, 400);
    EXPECT_EQ(svc.handle("POST", "/v1/score", R"({"completion":"x","problem_id":"zz"})").status, 404);
    EXPECT_EQ(svc.handle("POST", "/v1/score", R"({"completion":"x","problem_id":"p1","bogus":1})").status, 400);
    const auto bad_groups = svc.handle(
        "POST", "/v1/batch",
        json{{"rollouts", {rollout("a", kGood)}}, {"groups", {{{"start", 0}, {"count", 3}}}}}.dump());
    EXPECT_EQ(bad_groups.status, 400);
    EXPECT_TRUE(bad_groups.body.contains("error"));
    const auto bad_override = svc.handle(
        "POST", "/v1/batch",
        json{{"rollouts", {rollout("a", kGood)}}, {"config_overrides", {{"reward", {{"weights", {{"format", 0.9}}}}}}}}
            .dump());
    EXPECT_EQ(bad_override.status, 400);
}

TEST(Service, ScoreAndOverrides) {
    StubRunner runner;
    const ScoringService svc(EngineConfig{}, problems(), &runner);
    const auto r = svc.handle("POST", "/v1/score", rollout("a", kGood).dump());
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["results"][0]["breakdown"]["r_total"], 1.0);
    json body = {{"rollouts", {rollout("a", kBad)}},
                 {"config_overrides", {{"reward", {{"format_rewards", {{"none", 0.5}}}}}}}};
    const auto o = svc.handle("POST", "/v1/batch", body.dump());
    ASSERT_EQ(o.status, 200);
    EXPECT_NEAR(o.body["results"][0]["breakdown"]["r_total"].get<double>(), 0.1, 1e-12);
    EXPECT_NE(o.body["config_fingerprint"], EngineConfig{}.fingerprint());
}

TEST(Service, BusyRunnerIs503) {
    BusyRunner runner;
    const ScoringService svc(EngineConfig{}, problems(), &runner);
    const auto r = svc.handle("POST", "/v1/batch", json{{"rollouts", {rollout("a", kGood)}}}.dump());
    EXPECT_EQ(r.status, 503);
    EXPECT_EQ(r.headers.at("Retry-After"), "1");
    EXPECT_EQ(r.body["retryable"], true);
}

TEST(Service, RuleCatalog) {
    const auto all = rule_catalog_json();
    ASSERT_FALSE(all["rules"].empty());
    std::string prev;
    for (const auto& r : all["rules"]) {
        EXPECT_LT(prev, r["rule_id"].get<std::string>());
        prev = r["rule_id"];
    }
    for (const auto& r : rule_catalog_json("security")["rules"]) EXPECT_EQ(r["category"], "security");
}

TEST(Service, CliAndServiceBreakdownsMatch) {
    StubRunner runner;
    const ScoringService svc(EngineConfig{}, problems(), &runner);
    const auto via_service = svc.handle("POST", "/v1/score", rollout("a", kGood).dump());
    const auto direct = score_rollout(kGood, *problems().find("p1"), EngineConfig{}, &runner);
    EXPECT_EQ(via_service.body["results"][0]["breakdown"], to_json(direct));
}

TEST(Http, RoundTripOnEphemeralPort) {
    StubRunner runner;
    const ScoringService svc(EngineConfig{}, problems(), &runner);
    std::atomic<int> port{0};
    std::thread server([&] { run_http_service(svc, "127.0.0.1", 0, [&](int p) { port = p; }); });
    for (int i = 0; i < 500 && port == 0; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    ASSERT_NE(port.load(), 0);
    httplib::Client cli("127.0.0.1", port);
    const auto health = cli.Get("/v1/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(health->get_header_value(kSchemaVersionHeader), "1");
    const json body = {{"rollouts", {rollout("a", kGood), rollout("b", kBad)}},
                       {"groups", {{{"start", 0}, {"count", 2}}}}};
    const auto res = cli.Post("/v1/batch", body.dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    const auto j = json::parse(res->body);
    EXPECT_EQ(j["groups"][0]["advantages"], json::array({1.0, -1.0}));
    const auto missing = cli.Get("/v1/missing");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    stop_http_service();
    server.join();
}
