#include "codequal/testrunner_client.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <sstream>

extern char** environ;

namespace codequal {

using nlohmann::json;

json to_request_json(const RunRequest& req, const std::string& id) {
    return {{"id", id},
            {"solution_code", req.solution_code},
            {"test_code", req.test_code},
            {"timeout_seconds", req.timeout_seconds},
            {"memory_limit_mb", req.memory_limit_mb}};
}

TestReport report_from_response(const json& r, const std::string& expected_id) {
    if (!r.is_object()) throw TestRunnerUnavailable("runner response is not an object");
    if (!r.contains("id") || r["id"] != expected_id) throw TestRunnerUnavailable("runner response id mismatch");
    if (r.contains("error") && !r["error"].is_null())
        throw TestRunnerUnavailable("runner reported an error: " + r["error"].dump());
    try {
        TestReport t;
        t.total_tests = r.at("total_tests").get<int>();
        t.passed = r.at("passed").get<int>();
        t.errored = r.at("errored").get<bool>();
        t.timed_out = r.at("timed_out").get<bool>();
        t.duration_seconds = r.value("duration_seconds", 0.0);
        if (r.contains("per_test"))
            for (const auto& c : r["per_test"])
                t.per_test.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(),
                                      c.value("message", std::string())});
        if (t.total_tests < 0 || t.passed < 0 || t.passed > t.total_tests)
            throw TestRunnerUnavailable("runner response has inconsistent counts");
        return t;
    } catch (const json::exception& e) {
        throw TestRunnerUnavailable(std::string("malformed runner response: ") + e.what());
    }
}

SubprocessTestRunner::SubprocessTestRunner(std::vector<std::string> command, double grace_seconds)
    : command_(std::move(command)), grace_seconds_(grace_seconds) {}

SubprocessTestRunner::~SubprocessTestRunner() { stop(); }

void SubprocessTestRunner::stop() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, nullptr, 0);
    }
    pid_ = -1;
    buffer_.clear();
}

void SubprocessTestRunner::start() {
    if (command_.empty()) throw TestRunnerUnavailable("no test runner command");
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
        throw TestRunnerUnavailable(std::string("socketpair: ") + std::strerror(errno));
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, sv[1], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, sv[1], STDOUT_FILENO);
    std::vector<char*> argv;
    for (auto& a : command_) argv.push_back(a.data());
    argv.push_back(nullptr);
    pid_t pid = -1;
    const int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(sv[1]);
    if (rc != 0) {
        ::close(sv[0]);
        throw TestRunnerUnavailable("cannot start test runner '" + command_[0] + "': " + std::strerror(rc));
    }
    pid_ = pid;
    fd_ = sv[0];
    try {
        const json hello = json::parse(read_line(grace_seconds_));
        if (hello.value("protocol", "") != kRunnerProtocol || hello.value("version", 0) != kRunnerProtocolVersion)
            throw TestRunnerUnavailable("test runner handshake has the wrong protocol or version");
    } catch (const json::exception&) {
        stop();
        throw TestRunnerUnavailable("test runner handshake is not valid JSON");
    } catch (...) {
        stop();
        throw;
    }
}

std::string SubprocessTestRunner::read_line(double seconds) {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::duration<double>(seconds);
    while (true) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
        if (left <= 0) throw TestRunnerUnavailable("test runner did not answer in time");
        pollfd p{fd_, POLLIN, 0};
        const int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left, 1000)));
        if (rc < 0 && errno != EINTR) throw TestRunnerUnavailable(std::string("poll: ") + std::strerror(errno));
        if (rc <= 0) continue;
        char chunk[65536];
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n == 0) throw TestRunnerUnavailable("test runner exited");
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw TestRunnerUnavailable(std::string("read from test runner: ") + std::strerror(errno));
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

void SubprocessTestRunner::write_all(const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TestRunnerUnavailable(std::string("write to test runner: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

TestReport SubprocessTestRunner::run(const RunRequest& request) {
    if (pid_ <= 0) start();
    const std::string id = std::to_string(++next_id_);
    try {
        write_all(to_request_json(request, id).dump() + "\n");
        const std::string line = read_line(request.timeout_seconds + grace_seconds_);
        json response;
        try {
            response = json::parse(line);
        } catch (const json::exception&) {
            throw TestRunnerUnavailable("test runner response is not valid JSON");
        }
        return report_from_response(response, id);
    } catch (const TestRunnerUnavailable&) {
        stop();  // the next request starts a fresh worker
        throw;
    }
}

TestRunnerPool::TestRunnerPool(std::vector<std::string> command, int size, double acquire_timeout_seconds,
                               double grace_seconds)
    : busy_(static_cast<std::size_t>(std::max(1, size)), false), acquire_timeout_seconds_(acquire_timeout_seconds) {
    for (int i = 0; i < std::max(1, size); ++i)
        workers_.push_back(std::make_unique<SubprocessTestRunner>(command, grace_seconds));
}

TestReport TestRunnerPool::run(const RunRequest& request) {
    std::size_t slot = 0;
    {
        std::unique_lock lock(mu_);
        auto free_slot = [&] { return std::find(busy_.begin(), busy_.end(), false) != busy_.end(); };
        if (!cv_.wait_for(lock, std::chrono::duration<double>(acquire_timeout_seconds_), free_slot))
            throw TestRunnerBusy("all test runner workers are busy");
        slot = static_cast<std::size_t>(std::find(busy_.begin(), busy_.end(), false) - busy_.begin());
        busy_[slot] = true;
    }
    struct Release {
        TestRunnerPool& pool;
        std::size_t slot;
        ~Release() {
            {
                std::lock_guard lock(pool.mu_);
                pool.busy_[slot] = false;
            }
            pool.cv_.notify_one();
        }
    } release{*this, slot};
    return workers_[slot]->run(request);
}

std::vector<std::string> resolve_runner_command(const TestRunnerSettings& settings) {
    if (!settings.command.empty()) return settings.command;
    const char* env = std::getenv("CODEQUAL_TESTRUNNER");
    std::vector<std::string> out;
    if (!env) return out;
    std::istringstream in(env);
    for (std::string part; in >> part;) out.push_back(part);
    return out;
}

int resolve_pool_size(const TestRunnerSettings& settings) {
    if (const char* env = std::getenv("CODEQUAL_TESTRUNNER_POOL")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 256) return static_cast<int>(v);
    }
    return settings.pool_size;
}

std::unique_ptr<TestRunner> make_test_runner(const TestRunnerSettings& settings) {
    auto command = resolve_runner_command(settings);
    if (command.empty()) return nullptr;
    return std::make_unique<TestRunnerPool>(std::move(command), resolve_pool_size(settings),
                                            settings.acquire_timeout_seconds);
}

}  // namespace codequal
