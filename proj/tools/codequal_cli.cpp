// codequal: static quality analysis and rollout reward scoring.
//
// Exit codes: 0 success, 1 aggregate score below --min-score, 2 usage or
// malformed input, 3 unreadable input.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "codequal/batch.hpp"
#include "codequal/config.hpp"
#include "codequal/scoring.hpp"
#include "codequal/service.hpp"
#include "codequal/testrunner_client.hpp"

namespace cq = codequal;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBelowThreshold = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

cq::EngineConfig load_config(const std::string& path) {
    if (!path.empty() && !std::ifstream(path)) throw IoError("cannot read config file " + path);
    cq::EngineConfig config = path.empty() ? cq::EngineConfig{} : cq::load_engine_config(path);
#ifdef CODEQUAL_DEFAULT_ADVISORY_DB
    if (!config.analyzer.advisory_db_path && fs::exists(CODEQUAL_DEFAULT_ADVISORY_DB))
        config.analyzer.advisory_db_path = CODEQUAL_DEFAULT_ADVISORY_DB;
#endif
    return config;
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void print_text_report(const cq::QualityReport& r, std::ostream& out) {
    for (const auto& f : r.per_file) {
        out << f.file_label << "  score " << fixed(f.score) << "  W " << fixed(f.weighted_sum, 1)
            << (f.parse_error ? "  (parse error)" : "") << "\n";
        for (const auto& x : f.findings) {
            out << "  " << x.span.start_line << ":" << x.span.start_col + 1 << "  " << cq::to_string(x.severity) << "  "
                << x.rule_id;
            if (x.cwe_id) out << " [" << *x.cwe_id << "]";
            out << "  " << x.message << "\n";
        }
    }
    for (const auto& e : r.io_failures) out << "error: " << e.path << ": " << e.message << "\n";
    out << "files " << r.per_file.size() << "  aggregate score " << fixed(r.aggregate_score)
        << (r.empty_input ? "  (no analyzable files)" : "") << "\n";
}

struct AnalyzeOptions {
    std::vector<std::string> paths;
    std::string format = "text";
    double min_score = 0.0;
    std::string config;
    std::string advisory_db;
    std::string type_report;
};

int run_analyze(const AnalyzeOptions& o) {
    cq::EngineConfig config = load_config(o.config);
    if (!o.advisory_db.empty()) config.analyzer.advisory_db_path = o.advisory_db;
    cq::QualityReport report = cq::analyze_path(o.paths, config.analyzer, config.parallelism);
    if (!o.type_report.empty())
        cq::add_external_findings(report, cq::parse_type_report(read_file(o.type_report)),
                                  config.analyzer.severity_weights);
    if (o.format == "json") std::cout << cq::serialize_report(report);
    else print_text_report(report, std::cout);
    if (!report.io_failures.empty()) return kExitIo;
    return report.aggregate_score >= o.min_score ? kExitOk : kExitBelowThreshold;
}

int run_rules(const std::string& category, const std::string& format) {
    const json catalog = cq::rule_catalog_json(category);
    if (format == "json") {
        std::cout << catalog.dump(2) << "\n";
        return kExitOk;
    }
    for (const auto& r : catalog["rules"]) {
        std::cout << r["rule_id"].get<std::string>() << "  " << r["category"].get<std::string>() << "  "
                  << r["default_severity"].get<std::string>() << "  "
                  << (r["cwe_id"].is_null() ? std::string("-") : r["cwe_id"].get<std::string>()) << "  "
                  << r["title"].get<std::string>() << "\n";
    }
    return kExitOk;
}

struct RewardOptions {
    std::string problems;
    std::string completions;
    std::string config;
};

int run_reward(const RewardOptions& o) {
    const cq::EngineConfig config = load_config(o.config);
    const cq::ProblemSet problems = cq::ProblemSet::parse_jsonl(read_file(o.problems));
    cq::BatchScoreRequest request;
    request.rollouts = cq::parse_completions_jsonl(read_file(o.completions));
    if (request.rollouts.empty()) return kExitOk;

    const auto runner = cq::make_test_runner(config.reward.runner);
    const int par = config.parallelism > 0 ? config.parallelism : 1;
    const cq::BatchScoreResponse resp = cq::score_batch(request, problems, config, runner.get(), par);

    double total = 0.0;
    int errors = 0;
    for (const auto& r : resp.results) {
        std::cout << cq::to_json(r, false).dump() << "\n";
        total += r.reward();
        errors += r.breakdown ? 0 : 1;
    }
    std::cout << json{{"summary",
                       {{"rollouts", resp.results.size()},
                        {"errors", errors},
                        {"mean_r_total", total / static_cast<double>(resp.results.size())},
                        {"config_fingerprint", resp.config_fingerprint}}}}
                     .dump()
              << "\n";
    return kExitOk;
}

struct ServeOptions {
    std::string bind = "127.0.0.1";
    int port = 8080;
    std::string problems;
    std::string config;
};

int run_serve(const ServeOptions& o) {
    const cq::EngineConfig config = load_config(o.config);
    cq::ProblemSet problems;
    if (!o.problems.empty()) problems = cq::ProblemSet::parse_jsonl(read_file(o.problems));
    const auto runner = cq::make_test_runner(config.reward.runner);
    const cq::ScoringService service(config, std::move(problems), runner.get());

    // Signals are taken synchronously on a helper thread so shutdown can lock.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    std::thread([set] {
        int sig = 0;
        sigwait(&set, &sig);
        cq::stop_http_service();
    }).detach();

    const bool ok = cq::run_http_service(service, o.bind, o.port, [&](int port) {
        std::cerr << "codequal listening on " << o.bind << ":" << port << " (config " << config.fingerprint()
                  << ", test runner " << (runner ? "on" : "off") << ")\n";
    });
    if (!ok) {
        std::cerr << "error: cannot listen on " << o.bind << ":" << o.port << "\n";
        return kExitIo;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static code-quality analysis and rollout reward scoring"};
    app.require_subcommand(1);

    AnalyzeOptions analyze;
    auto* a = app.add_subcommand("analyze", "Analyze Python files and requirements manifests");
    a->add_option("paths", analyze.paths, "Files or directories")->required();
    a->add_option("--format", analyze.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    a->add_option("--min-score", analyze.min_score, "Fail (exit 1) below this aggregate score")
        ->check(CLI::Range(0.0, 1.0));
    a->add_option("--config", analyze.config, "JSON config file");
    a->add_option("--advisory-db", analyze.advisory_db, "Advisory database (JSON Lines)");
    a->add_option("--type-report", analyze.type_report, "External type checker output to merge");

    std::string rules_category;
    std::string rules_format = "text";
    auto* r = app.add_subcommand("rules", "List the rule catalog");
    r->add_option("--category", rules_category, "Only this category")
        ->check(CLI::IsMember({"maintainability", "security", "performance", "reliability"}));
    r->add_option("--format", rules_format, "Output format")->check(CLI::IsMember({"text", "json"}));

    RewardOptions reward;
    auto* w = app.add_subcommand("reward", "Score completions against a problem set");
    w->add_option("--problems", reward.problems, "Problems (JSON Lines)")->required();
    w->add_option("--completions", reward.completions, "Completions (JSON Lines)")->required();
    w->add_option("--config", reward.config, "JSON config file");

    ServeOptions serve;
    auto* s = app.add_subcommand("serve", "Run the HTTP scoring service");
    s->add_option("--bind", serve.bind, "Address to bind");
    s->add_option("--port", serve.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    s->add_option("--problems", serve.problems, "Problems (JSON Lines)");
    s->add_option("--config", serve.config, "JSON config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*a) return run_analyze(analyze);
        if (*r) return run_rules(rules_category, rules_format);
        if (*w) return run_reward(reward);
        if (*s) return run_serve(serve);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const cq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const cq::RequestError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
