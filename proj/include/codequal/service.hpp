#pragma once

#include <functional>
#include <map>
#include <string>

#include "codequal/batch.hpp"
#include "codequal/config.hpp"
#include "codequal/reward.hpp"

namespace codequal {

inline constexpr const char* kSchemaVersionHeader = "X-Codequal-Schema-Version";
inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kEngineVersion = "1.0.0";

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
    std::map<std::string, std::string> headers;
};

/// Request handling for the scoring API, independent of the transport.
/// Routes: GET /v1/health, GET /v1/rules, POST /v1/score, POST /v1/batch.
/// Handlers are safe to call concurrently; the runner is the only shared
/// mutable resource and synchronizes itself.
class ScoringService {
public:
    ScoringService(EngineConfig config, ProblemSet problems, TestRunner* runner);

    ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body) const;

    ServiceResponse health() const;
    ServiceResponse rules() const;
    ServiceResponse score(const nlohmann::json& request) const;
    ServiceResponse batch(const nlohmann::json& request) const;

private:
    EngineConfig config_;
    ProblemSet problems_;
    TestRunner* runner_;
};

/// Machine-readable rule catalog, ordered by rule_id.
nlohmann::json rule_catalog_json(const std::string& category_filter = "");

/// Blocks serving HTTP on bind_address:port until stop_http_service is called
/// or the listener fails. Port 0 picks a free port. `on_ready` receives the
/// bound port once the socket is listening. Returns false when binding fails.
bool run_http_service(const ScoringService& service, const std::string& bind_address, int port,
                      const std::function<void(int)>& on_ready = {});
void stop_http_service();

}  // namespace codequal
