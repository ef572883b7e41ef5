#include <cstdlib>
#include <future>

#include "codequal/testrunner_client.hpp"
#include "test_util.hpp"

using namespace codequal;
using codequal::testing::fixture_path;
using nlohmann::json;

namespace {

bool have_python() { return std::system("python3 -c pass >/dev/null 2>&1") == 0; }

std::vector<std::string> fake_command() { return {"python3", fixture_path("fake_testrunner.py")}; }

RunRequest request(std::string solution, std::string tests, double timeout = 10.0) {
    RunRequest r;
    r.solution_code = std::move(solution);
    r.test_code = std::move(tests);
    r.timeout_seconds = timeout;
    return r;
}

const char* kTests =
    "def test_one():\n    assert add(1, 2) == 3\n"
    "def test_two():\n    assert add(0, 0) == 0\n"
    "def test_three():\n    assert add(-1, 1) == 0\n";

}  // namespace

TEST(Protocol, RequestShape) {
    const auto j = to_request_json(request("x = 1", "def test_a(): pass", 3.5), "r7");
    EXPECT_EQ(j["id"], "r7");
    EXPECT_EQ(j["solution_code"], "x = 1");
    EXPECT_EQ(j["timeout_seconds"], 3.5);
    EXPECT_TRUE(j.contains("memory_limit_mb"));
}

TEST(Protocol, ResponseParsing) {
    const json ok = {{"id", "r1"},        {"total_tests", 2}, {"passed", 1},
                     {"errored", false},  {"timed_out", false},
                     {"per_test", {{{"name", "test_a"}, {"passed", true}, {"message", ""}},
                                   {{"name", "test_b"}, {"passed", false}, {"message", "boom"}}}},
                     {"duration_seconds", 0.01}};
    const auto r = report_from_response(ok, "r1");
    EXPECT_EQ(r.total_tests, 2);
    EXPECT_EQ(r.passed, 1);
    ASSERT_EQ(r.per_test.size(), 2u);
    EXPECT_EQ(r.per_test[1].message, "boom");
    EXPECT_THROW(report_from_response(ok, "r2"), TestRunnerUnavailable);
    json over = ok;
    over["passed"] = 3;
    EXPECT_THROW(report_from_response(over, "r1"), TestRunnerUnavailable);
    EXPECT_THROW(report_from_response({{"id", "unknown"}, {"error", "bad"}}, "r1"), TestRunnerUnavailable);
    EXPECT_THROW(report_from_response(json::array(), "r1"), TestRunnerUnavailable);
}

TEST(Resolve, CommandAndPoolFromEnvironment) {
    TestRunnerSettings s;
    ::setenv("CODEQUAL_TESTRUNNER", "python3  -u runner.py", 1);
    ::setenv("CODEQUAL_TESTRUNNER_POOL", "5", 1);
    EXPECT_EQ(resolve_runner_command(s), (std::vector<std::string>{"python3", "-u", "runner.py"}));
    EXPECT_EQ(resolve_pool_size(s), 5);
    s.command = {"explicit"};
    EXPECT_EQ(resolve_runner_command(s), std::vector<std::string>{"explicit"});
    ::setenv("CODEQUAL_TESTRUNNER_POOL", "zero", 1);
    EXPECT_EQ(resolve_pool_size(s), s.pool_size);
    ::unsetenv("CODEQUAL_TESTRUNNER");
    ::unsetenv("CODEQUAL_TESTRUNNER_POOL");
    EXPECT_TRUE(resolve_runner_command(TestRunnerSettings{}).empty());
    EXPECT_EQ(make_test_runner(TestRunnerSettings{}), nullptr);
}

TEST(Subprocess, RunsTestsAgainstFakeRunner) {
    if (!have_python()) GTEST_SKIP() << "python3 not available";
    SubprocessTestRunner runner(fake_command());
    const auto all = runner.run(request("def add(a, b):\n    return a + b\n", kTests));
    EXPECT_EQ(all.total_tests, 3);
    EXPECT_EQ(all.passed, 3);
    EXPECT_EQ(correctness_reward(all), 1.0);
    const auto some = runner.run(request("def add(a, b):\n    return a * b + 0 if a else b\n", kTests));
    EXPECT_EQ(some.total_tests, 3);
    EXPECT_LT(some.passed, 3);
    const auto broken = runner.run(request("def add(:\n", kTests));
    EXPECT_TRUE(broken.errored);
    EXPECT_EQ(correctness_reward(broken), 0.0);
}

TEST(Subprocess, TimeoutIsReported) {
    if (!have_python()) GTEST_SKIP() << "python3 not available";
    SubprocessTestRunner runner(fake_command());
    const auto r = runner.run(request("def add(a, b):\n    while True:\n        pass\n", kTests, 0.5));
    EXPECT_TRUE(r.timed_out);
    EXPECT_EQ(correctness_reward(r), 0.0);
    // The worker stays usable afterwards.
    EXPECT_EQ(runner.run(request("def add(a, b):\n    return a + b\n", kTests)).passed, 3);
}

TEST(Subprocess, MissingExecutableIsUnavailable) {
    SubprocessTestRunner runner({"/nonexistent/codequal-runner"});
    EXPECT_THROW(runner.run(request("x = 1", kTests)), TestRunnerUnavailable);
}

TEST(Subprocess, WrongHandshakeIsUnavailable) {
    SubprocessTestRunner runner({"/bin/sh", "-c", "echo hello; cat >/dev/null"}, 1.0);
    EXPECT_THROW(runner.run(request("x = 1", kTests, 1.0)), TestRunnerUnavailable);
}

TEST(Pool, ConcurrentCallers) {
    if (!have_python()) GTEST_SKIP() << "python3 not available";
    TestRunnerPool pool(fake_command(), 2, 30.0);
    EXPECT_EQ(pool.size(), 2);
    std::vector<std::future<TestReport>> fs;
    for (int i = 0; i < 6; ++i)
        fs.push_back(std::async(std::launch::async,
                                [&] { return pool.run(request("def add(a, b):\n    return a + b\n", kTests)); }));
    for (auto& f : fs) EXPECT_EQ(f.get().passed, 3);
}

TEST(Pool, BusyWhenAcquireTimesOut) {
    if (!have_python()) GTEST_SKIP() << "python3 not available";
    TestRunnerPool pool(fake_command(), 1, 0.2);
    auto slow = std::async(std::launch::async, [&] {
        return pool.run(request("import time\ntime.sleep(1.5)\ndef add(a, b):\n    return a + b\n", kTests));
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    EXPECT_THROW(pool.run(request("def add(a, b):\n    return a + b\n", kTests)), TestRunnerBusy);
    EXPECT_EQ(slow.get().passed, 3);
}
