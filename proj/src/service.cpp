#include "codequal/service.hpp"

#include <mutex>

#include "codequal/findings.hpp"
#include "httplib.h"

namespace codequal {

using nlohmann::json;

namespace {

ServiceResponse error_response(int status, const std::string& message, bool retryable = false) {
    ServiceResponse r;
    r.status = status;
    r.body = {{"schema_version", kSchemaVersion}, {"error", message}, {"retryable", retryable}};
    if (retryable) r.headers["Retry-After"] = "1";
    return r;
}

}  // namespace

json rule_catalog_json(const std::string& category_filter) {
    json rules = json::array();
    for (const auto& d : rule_registry()) {
        if (!category_filter.empty() && to_string(d.category) != category_filter) continue;
        json row = {{"rule_id", d.rule_id},
                    {"category", to_string(d.category)},
                    {"default_severity", to_string(d.default_severity)},
                    {"cwe_id", d.cwe_id ? json(*d.cwe_id) : json(nullptr)},
                    {"title", d.title}};
        if (d.escalated_severity) row["escalated_severity"] = to_string(*d.escalated_severity);
        rules.push_back(std::move(row));
    }
    return {{"schema_version", kSchemaVersion}, {"rules", rules}};
}

ScoringService::ScoringService(EngineConfig config, ProblemSet problems, TestRunner* runner)
    : config_(std::move(config)), problems_(std::move(problems)), runner_(runner) {}

ServiceResponse ScoringService::health() const {
    return {200,
            {{"schema_version", kSchemaVersion},
             {"ok", true},
             {"version", kEngineVersion},
             {"config_fingerprint", config_.fingerprint()},
             {"test_runner", runner_ != nullptr},
             {"problems", problems_.records().size()}},
            {}};
}

ServiceResponse ScoringService::rules() const { return {200, rule_catalog_json(), {}}; }

ServiceResponse ScoringService::batch(const json& request) const {
    try {
        const BatchScoreRequest req = parse_batch_request(request);
        const EngineConfig config = apply_overrides(config_, req.config_overrides);
        const int par = config.parallelism > 0 ? config.parallelism : 1;
        return {200, to_json(score_batch(req, problems_, config, runner_, par)), {}};
    } catch (const RequestError& e) {
        return error_response(400, e.what());
    } catch (const ConfigError& e) {
        return error_response(400, std::string("config_overrides: ") + e.what());
    } catch (const TestRunnerBusy& e) {
        return error_response(503, e.what(), true);
    }
}

ServiceResponse ScoringService::score(const json& request) const {
    if (!request.is_object()) return error_response(400, "request body must be an object");
    json rollout = request;
    json batch_body = {{"rollouts", json::array()}};
    if (rollout.contains("config_overrides")) {
        batch_body["config_overrides"] = rollout["config_overrides"];
        rollout.erase("config_overrides");
    }
    for (const auto& [key, _] : rollout.items())
        if (key != "rollout_id" && key != "completion" && key != "problem_id")
            return error_response(400, "unknown request field '" + key + "'");
    if (rollout.contains("problem_id") && rollout["problem_id"].is_string() &&
        !problems_.find(rollout["problem_id"].get<std::string>()))
        return error_response(404, "unknown problem_id '" + rollout["problem_id"].get<std::string>() + "'");
    batch_body["rollouts"].push_back(std::move(rollout));
    return batch(batch_body);
}

ServiceResponse ScoringService::handle(const std::string& method, const std::string& path,
                                       const std::string& body) const {
    ServiceResponse r;
    if (path == "/v1/health" || path == "/v1/rules") {
        if (method != "GET") r = error_response(405, "use GET");
        else r = path == "/v1/health" ? health() : rules();
    } else if (path == "/v1/score" || path == "/v1/batch") {
        if (method != "POST") {
            r = error_response(405, "use POST");
        } else {
            json parsed = json::parse(body, nullptr, false);
            if (parsed.is_discarded()) r = error_response(400, "request body is not valid JSON");
            else r = path == "/v1/score" ? score(parsed) : batch(parsed);
        }
    } else {
        r = error_response(404, "no such endpoint: " + path);
    }
    r.headers[kSchemaVersionHeader] = std::to_string(kSchemaVersion);
    return r;
}

namespace {

std::mutex g_server_mu;
httplib::Server* g_server = nullptr;

}  // namespace

bool run_http_service(const ScoringService& service, const std::string& bind_address, int port,
                      const std::function<void(int)>& on_ready) {
    httplib::Server server;
    auto route = [&service](const httplib::Request& req, httplib::Response& res) {
        const ServiceResponse r = service.handle(req.method, req.path, req.body);
        res.status = r.status;
        for (const auto& [k, v] : r.headers) res.set_header(k, v);
        res.set_content(r.body.dump(), "application/json");
    };
    for (const char* path : {"/v1/health", "/v1/rules", "/v1/score", "/v1/batch"}) {
        server.Get(path, route);
        server.Post(path, route);
    }
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        res.set_header(kSchemaVersionHeader, std::to_string(kSchemaVersion));
        res.set_content(json{{"schema_version", kSchemaVersion}, {"error", "no such endpoint: " + req.path}}.dump(),
                        "application/json");
    });
    if (port == 0) {
        port = server.bind_to_any_port(bind_address);
        if (port < 0) return false;
    } else if (!server.bind_to_port(bind_address, port)) {
        return false;
    }
    {
        std::lock_guard lock(g_server_mu);
        g_server = &server;
    }
    if (on_ready) on_ready(port);
    const bool ok = server.listen_after_bind();
    std::lock_guard lock(g_server_mu);
    g_server = nullptr;
    return ok;
}

void stop_http_service() {
    std::lock_guard lock(g_server_mu);
    if (g_server) g_server->stop();
}

}  // namespace codequal
