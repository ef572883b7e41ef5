#include "codequal/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "codequal/analyzers.hpp"

namespace codequal {

namespace fs = std::filesystem;
using nlohmann::json;

double weighted_sum(const std::vector<Finding>& findings, const SeverityWeights& weights) {
    // Summed per severity bucket so the result does not depend on finding order.
    std::array<long long, 5> counts{};
    for (const auto& f : findings) ++counts[static_cast<std::size_t>(f.severity)];
    double w = 0.0;
    for (Severity s : kAllSeverities) w += weights.weight(s) * static_cast<double>(counts[static_cast<std::size_t>(s)]);
    return w;
}

double quality_score(double weighted) {
    if (!std::isfinite(weighted) || weighted < 0) throw std::invalid_argument("weighted sum must be finite and >= 0");
    return 1.0 / (1.0 + weighted);
}

FileReport make_file_report(std::string file_label, std::vector<Finding> findings, const SeverityWeights& weights) {
    FileReport r;
    r.file_label = std::move(file_label);
    r.findings = merge_findings({std::move(findings)});
    for (const auto& f : r.findings) ++r.counts[static_cast<std::size_t>(f.severity)];
    r.weighted_sum = weighted_sum(r.findings, weights);
    r.score = quality_score(r.weighted_sum);
    return r;
}

FileReport analyze_source(const ParseResult& unit_or_failure, const AnalyzerConfig& config) {
    if (const auto* failure = std::get_if<ParseFailure>(&unit_or_failure)) {
        Span span;
        span.file_label = failure->file_label;
        span.start_line = span.end_line = failure->line;
        span.start_col = span.end_col = failure->col;
        FileReport r = make_file_report(failure->file_label,
                                        {make_finding("PARSE-ERROR", span, "syntax error: " + failure->message)},
                                        config.severity_weights);
        r.parse_error = true;
        return r;
    }
    const SourceUnit& u = std::get<SourceUnit>(unit_or_failure);
    std::vector<std::vector<Finding>> parts{
        detect_complexity_issues(u, config.maintainability),
        detect_dead_code(u),
        detect_structure_issues(u, config.maintainability),
        detect_style_issues(u, config.maintainability),
        detect_injection(u),
        detect_unsafe_deserialization(u),
        detect_weak_crypto(u, config.secrets),
        detect_hardcoded_secrets(u, config.secrets),
        detect_string_concat_in_loops(u),
        detect_loop_resource_issues(u),
        detect_data_structure_issues(u, config.performance),
        detect_exception_issues(u),
        detect_concurrency_issues(u),
        detect_infinite_loops(u),
        detect_type_safety_issues(u),
    };
    std::vector<Finding> enabled;
    for (auto& part : parts)
        for (auto& f : part)
            if (config.rule_enabled(f.rule_id)) enabled.push_back(std::move(f));
    return make_file_report(u.file_label(), std::move(enabled), config.severity_weights);
}

FileReport analyze_manifest(const std::string& file_label, std::string_view text, const AdvisoryDb& db,
                            const AnalyzerConfig& config) {
    std::vector<Finding> enabled;
    for (auto& f : check_dependencies(text, db, file_label))
        if (config.rule_enabled(f.rule_id)) enabled.push_back(std::move(f));
    return make_file_report(file_label, std::move(enabled), config.severity_weights);
}

bool is_analyzable_file(const fs::path& p) {
    const std::string name = p.filename().string();
    if (p.extension() == ".py") return true;
    return name.starts_with("requirements") && p.extension() == ".txt";
}

namespace {

bool is_manifest(const fs::path& p) { return p.extension() == ".txt"; }

struct Job {
    std::string label;
    fs::path path;
};

/// Reads a whole file; nullopt when it cannot be opened or read.
std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) return std::nullopt;
    return buf.str();
}

}  // namespace

double aggregate_score(const std::vector<FileReport>& files) {
    if (files.empty()) return 1.0;
    double sum = 0.0;
    for (const auto& f : files) sum += f.score;
    return sum / static_cast<double>(files.size());
}

QualityReport analyze_path(const std::vector<std::string>& paths, const AnalyzerConfig& config, int parallelism) {
    QualityReport report;
    report.config_fingerprint = config.fingerprint();

    std::vector<Job> jobs;
    for (const auto& raw : paths) {
        const fs::path p(raw);
        std::error_code ec;
        const auto status = fs::status(p, ec);
        if (ec || !fs::exists(status)) {
            report.io_failures.push_back({raw, "no such file or directory"});
            continue;
        }
        if (fs::is_directory(status)) {
            std::vector<Job> found;
            fs::recursive_directory_iterator it(p, fs::directory_options::skip_permission_denied, ec), end;
            if (ec) {
                report.io_failures.push_back({raw, ec.message()});
                continue;
            }
            for (; it != end; it.increment(ec)) {
                if (ec) {
                    report.io_failures.push_back({it->path().generic_string(), ec.message()});
                    break;
                }
                if (it->is_regular_file(ec) && is_analyzable_file(it->path()))
                    found.push_back({it->path().generic_string(), it->path()});
            }
            jobs.insert(jobs.end(), found.begin(), found.end());
        } else {
            jobs.push_back({p.generic_string(), p});
        }
    }
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.label < b.label; });
    jobs.erase(std::unique(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.label == b.label; }),
               jobs.end());

    AdvisoryDb db;
    const bool any_manifest = std::any_of(jobs.begin(), jobs.end(), [](const Job& j) { return is_manifest(j.path); });
    if (any_manifest && config.advisory_db_path) {
        try {
            db = AdvisoryDb::load_file(*config.advisory_db_path);
        } catch (const std::exception& e) {
            report.io_failures.push_back({*config.advisory_db_path, e.what()});
        }
    }

    std::vector<std::optional<FileReport>> results(jobs.size());
    std::vector<std::optional<IoFailure>> failures(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            const Job& job = jobs[i];
            auto text = read_file(job.path);
            if (!text) {
                failures[i] = IoFailure{job.label, "cannot read file"};
                continue;
            }
            if (is_manifest(job.path))
                results[i] = analyze_manifest(job.label, *text, db, config);
            else
                results[i] = analyze_source(parse_source(job.label, std::move(*text)), config);
        }
    };
    unsigned threads = parallelism > 0 ? static_cast<unsigned>(parallelism) : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (results[i]) report.per_file.push_back(std::move(*results[i]));
        if (failures[i]) report.io_failures.push_back(std::move(*failures[i]));
    }
    report.empty_input = report.per_file.empty();
    report.aggregate_score = aggregate_score(report.per_file);
    return report;
}

void add_external_findings(QualityReport& report, const std::vector<Finding>& findings, const SeverityWeights& weights) {
    std::map<std::string, std::vector<Finding>> by_file;
    for (const auto& f : findings) by_file[f.file_label()].push_back(f);
    for (auto& [label, extra] : by_file) {
        auto it = std::find_if(report.per_file.begin(), report.per_file.end(),
                               [&](const FileReport& r) { return r.file_label == label; });
        // Type checkers print paths relative to where they ran: fall back to
        // the single analyzed file whose label ends with that path.
        if (it == report.per_file.end()) {
            const std::string suffix = "/" + label;
            auto ends_with = [&](const FileReport& r) { return r.file_label.ends_with(suffix); };
            auto first = std::find_if(report.per_file.begin(), report.per_file.end(), ends_with);
            if (first != report.per_file.end() && std::find_if(std::next(first), report.per_file.end(), ends_with) ==
                                                      report.per_file.end())
                it = first;
        }
        std::vector<Finding> all;
        for (Finding& f : extra) {
            if (it != report.per_file.end()) f.span.file_label = it->file_label;
            all.push_back(std::move(f));
        }
        if (it != report.per_file.end()) {
            all.insert(all.end(), it->findings.begin(), it->findings.end());
            const bool parse_error = it->parse_error;
            *it = make_file_report(it->file_label, std::move(all), weights);
            it->parse_error = parse_error;
        } else {
            report.per_file.push_back(make_file_report(label, std::move(all), weights));
        }
    }
    std::sort(report.per_file.begin(), report.per_file.end(),
              [](const FileReport& a, const FileReport& b) { return a.file_label < b.file_label; });
    report.empty_input = report.per_file.empty();
    report.aggregate_score = aggregate_score(report.per_file);
}

std::vector<Finding> parse_type_report(std::string_view text) {
    static const std::regex kLine{R"(^(.+?):(\d+):(?:(\d+):)?\s*([A-Za-z][\w-]*):\s*(.*)$)"};
    static const std::regex kTrailingCode{R"(^(.*?)\s*\[([\w-]+)\]\s*$)"};
    std::vector<Finding> out;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::smatch m;
        if (!std::regex_match(line, m, kLine)) continue;
        std::string code = m[4].str();
        std::string message = m[5].str();
        if (code == "note") continue;
        std::smatch c;
        if (std::regex_match(message, c, kTrailingCode)) {
            code = c[2].str();
            message = c[1].str();
        }
        Span span;
        span.file_label = m[1].str();
        try {
            span.start_line = span.end_line = std::max(1, std::stoi(m[2].str()));
            // Type checkers print 1-based columns.
            span.start_col = span.end_col = m[3].matched ? std::max(0, std::stoi(m[3].str()) - 1) : 0;
        } catch (const std::out_of_range&) {
            continue;
        }
        out.push_back(make_finding("REL-TYPE-EXTERNAL", span, code + ": " + message));
    }
    return out;
}

json to_json(const Span& s) {
    return {{"file_label", s.file_label},
            {"start_line", s.start_line},
            {"start_col", s.start_col},
            {"end_line", s.end_line},
            {"end_col", s.end_col}};
}

json to_json(const Finding& f) {
    return {{"rule_id", f.rule_id},
            {"category", to_string(f.category)},
            {"severity", to_string(f.severity)},
            {"cwe_id", f.cwe_id ? json(*f.cwe_id) : json(nullptr)},
            {"message", f.message},
            {"span", to_json(f.span)}};
}

json to_json(const FileReport& f) {
    json counts = json::object();
    for (Severity s : kAllSeverities) counts[std::string(to_string(s))] = f.count(s);
    json findings = json::array();
    for (const auto& x : f.findings) findings.push_back(to_json(x));
    return {{"file_label", f.file_label},
            {"findings", findings},
            {"counts", counts},
            {"weighted_sum", f.weighted_sum},
            {"score", f.score},
            {"parse_error", f.parse_error}};
}

json to_json(const QualityReport& r) {
    json files = json::array();
    for (const auto& f : r.per_file) files.push_back(to_json(f));
    json failures = json::array();
    for (const auto& f : r.io_failures) failures.push_back({{"path", f.path}, {"message", f.message}});
    return {{"schema_version", 1},
            {"config_fingerprint", r.config_fingerprint},
            {"aggregate_score", r.aggregate_score},
            {"empty_input", r.empty_input},
            {"io_failures", failures},
            {"per_file", files}};
}

std::string serialize_report(const QualityReport& r) { return to_json(r).dump(2) + "\n"; }

}  // namespace codequal
