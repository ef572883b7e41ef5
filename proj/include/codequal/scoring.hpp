#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "codequal/config.hpp"
#include "codequal/dependencies.hpp"
#include "codequal/findings.hpp"
#include "codequal/source.hpp"
#include "json.hpp"

namespace codequal {

/// Σ over findings of the weight of each finding's severity.
double weighted_sum(const std::vector<Finding>& findings, const SeverityWeights& weights);

/// 1 / (1 + W). Throws std::invalid_argument for negative or non-finite W.
double quality_score(double weighted);

struct FileReport {
    std::string file_label;
    std::vector<Finding> findings;
    std::array<int, 5> counts{};  // indexed by Severity
    double weighted_sum = 0.0;
    double score = 1.0;
    bool parse_error = false;

    int count(Severity s) const { return counts[static_cast<std::size_t>(s)]; }
};

struct IoFailure {
    std::string path;
    std::string message;
};

struct QualityReport {
    std::vector<FileReport> per_file;  // sorted by file_label
    double aggregate_score = 1.0;
    std::string config_fingerprint;
    bool empty_input = false;  // nothing was analyzed; the aggregate is vacuous
    std::vector<IoFailure> io_failures;
};

/// Builds a file entry from merged findings: counts, W and score.
FileReport make_file_report(std::string file_label, std::vector<Finding> findings, const SeverityWeights& weights);

/// Runs every enabled analyzer on a parsed unit; a ParseFailure becomes one
/// critical PARSE-ERROR finding.
FileReport analyze_source(const ParseResult& unit_or_failure, const AnalyzerConfig& config);

/// Dependency findings for a requirements manifest.
FileReport analyze_manifest(const std::string& file_label, std::string_view text, const AdvisoryDb& db,
                            const AnalyzerConfig& config);

/// True for file names the directory walk picks up: *.py and requirements*.txt.
bool is_analyzable_file(const std::filesystem::path& p);

/// Analyzes files and directories (recursively). Unreadable paths are
/// recorded in io_failures and the rest is still analyzed. The advisory
/// database named by the config is loaded once; when it cannot be loaded
/// the failure is recorded and manifests are checked against an empty one.
QualityReport analyze_path(const std::vector<std::string>& paths, const AnalyzerConfig& config, int parallelism = 0);

/// Mean of per-file scores, 1 for an empty list.
double aggregate_score(const std::vector<FileReport>& files);

/// Adds findings to the matching file entries (creating entries for unknown
/// labels) and recomputes scores.
void add_external_findings(QualityReport& report, const std::vector<Finding>& findings, const SeverityWeights& weights);

/// Lines "<file>:<line>:<column>: <code>: <message>" (column optional) as
/// low-severity REL-TYPE-EXTERNAL findings. A trailing "[name]" on the
/// message replaces the code. Note lines and lines in other shapes are skipped.
std::vector<Finding> parse_type_report(std::string_view text);

nlohmann::json to_json(const Span& s);
nlohmann::json to_json(const Finding& f);
nlohmann::json to_json(const FileReport& f);
nlohmann::json to_json(const QualityReport& r);

/// Canonical serialized report (2-space indented JSON, trailing newline).
std::string serialize_report(const QualityReport& r);

}  // namespace codequal
