#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <sys/types.h>
#include <vector>

#include "codequal/config.hpp"
#include "codequal/reward.hpp"
#include "json.hpp"

namespace codequal {

// Line protocol with a runner worker: after start the worker prints one
// handshake line {"protocol":"codequal-testrunner","version":1}; then each
// request line gets exactly one response line carrying the same "id".

inline constexpr const char* kRunnerProtocol = "codequal-testrunner";
inline constexpr int kRunnerProtocolVersion = 1;

nlohmann::json to_request_json(const RunRequest& req, const std::string& id);
/// Throws TestRunnerUnavailable on a response that violates the protocol.
TestReport report_from_response(const nlohmann::json& response, const std::string& expected_id);

/// One worker process, started on first use and restarted after a failure.
/// Not thread-safe; TestRunnerPool serializes access.
class SubprocessTestRunner : public TestRunner {
public:
    /// `grace_seconds` is added to each request's timeout before the worker
    /// is declared unresponsive and killed.
    explicit SubprocessTestRunner(std::vector<std::string> command, double grace_seconds = 5.0);
    ~SubprocessTestRunner() override;
    SubprocessTestRunner(const SubprocessTestRunner&) = delete;
    SubprocessTestRunner& operator=(const SubprocessTestRunner&) = delete;

    TestReport run(const RunRequest& request) override;

private:
    void start();
    void stop();
    std::string read_line(double seconds);
    void write_all(const std::string& data);

    std::vector<std::string> command_;
    double grace_seconds_;
    pid_t pid_ = -1;
    int fd_ = -1;  // our end of the worker's stdin/stdout socket
    std::string buffer_;
    unsigned long long next_id_ = 0;
};

/// Fixed-size set of workers shared by concurrent callers.
class TestRunnerPool : public TestRunner {
public:
    TestRunnerPool(std::vector<std::string> command, int size, double acquire_timeout_seconds,
                   double grace_seconds = 5.0);

    /// Throws TestRunnerBusy when no worker frees up within the acquire timeout.
    TestReport run(const RunRequest& request) override;
    int size() const { return static_cast<int>(workers_.size()); }

private:
    std::vector<std::unique_ptr<SubprocessTestRunner>> workers_;
    std::vector<bool> busy_;
    std::mutex mu_;
    std::condition_variable cv_;
    double acquire_timeout_seconds_;
};

/// The runner command: settings.command, else CODEQUAL_TESTRUNNER split on
/// whitespace, else empty.
std::vector<std::string> resolve_runner_command(const TestRunnerSettings& settings);
/// CODEQUAL_TESTRUNNER_POOL when set to a positive integer, else settings.pool_size.
int resolve_pool_size(const TestRunnerSettings& settings);

/// A pool for the resolved command, or nullptr when no runner is configured.
std::unique_ptr<TestRunner> make_test_runner(const TestRunnerSettings& settings);

}  // namespace codequal
