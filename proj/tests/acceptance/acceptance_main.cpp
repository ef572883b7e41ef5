// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// usage: codequal_acceptance [artifact-dir]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "codequal/batch.hpp"
#include "codequal/scoring.hpp"
#include "codequal/testrunner_client.hpp"

using namespace codequal;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kScoreTol = 1e-12;
constexpr double kRewardTol = 1e-12;
constexpr double kAdvantageTol = 1e-9;
constexpr double kLatencyP50Limit = 1.0;     // seconds per snippet
constexpr double kGoldenTimeLimit = 30.0;    // seconds for the whole corpus
constexpr int kMinGoldenRules = 25;
constexpr int kMaxSnippetLines = 200;

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    if (!ok) ++failures;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fixed(double v, int digits = 6) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string sci(double v) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(2) << v;
    return s.str();
}

Finding synthetic(Severity s) {
    Finding f;
    f.rule_id = "MAINT-NAMING";
    f.severity = s;
    f.span = Span{"synthetic.py", 1, 0, 1, 1};
    return f;
}

// ---------------------------------------------------------------------------

struct Multiset {
    std::array<int, 5> counts;  // info, low, medium, high, critical
    long w_num, w_den, q_num, q_den;
    double q;
};

// Exact fractions from an independent rational computation.
const Multiset kMultisets[] = {
    {{0, 0, 0, 0, 0}, 0, 1, 1, 1, 1.0},
    {{1, 0, 0, 0, 0}, 1, 2, 2, 3, 0.6666666666666666},
    {{0, 1, 0, 0, 0}, 1, 1, 1, 2, 0.5},
    {{0, 0, 1, 0, 0}, 5, 2, 2, 7, 0.2857142857142857},
    {{0, 0, 0, 1, 0}, 5, 1, 1, 6, 0.16666666666666666},
    {{0, 0, 0, 0, 1}, 10, 1, 1, 11, 0.09090909090909091},
    {{1, 2, 0, 0, 1}, 25, 2, 2, 27, 0.07407407407407407},
    {{2, 0, 0, 0, 0}, 1, 1, 1, 2, 0.5},
    {{0, 3, 1, 0, 0}, 11, 2, 2, 13, 0.15384615384615385},
    {{4, 4, 4, 4, 4}, 76, 1, 1, 77, 0.012987012987012988},
    {{0, 0, 2, 1, 0}, 10, 1, 1, 11, 0.09090909090909091},
    {{7, 0, 0, 0, 0}, 7, 2, 2, 9, 0.2222222222222222},
    {{0, 0, 0, 0, 3}, 30, 1, 1, 31, 0.03225806451612903},
    {{1, 1, 1, 1, 1}, 19, 1, 1, 20, 0.05},
    {{10, 10, 0, 0, 0}, 15, 1, 1, 16, 0.0625},
    {{0, 0, 0, 2, 2}, 30, 1, 1, 31, 0.03225806451612903},
    {{3, 0, 5, 0, 0}, 14, 1, 1, 15, 0.06666666666666667},
    {{0, 6, 0, 0, 1}, 16, 1, 1, 17, 0.058823529411764705},
    {{2, 1, 0, 3, 0}, 17, 1, 1, 18, 0.05555555555555555},
    {{20, 0, 0, 0, 0}, 10, 1, 1, 11, 0.09090909090909091},
    {{0, 0, 0, 0, 20}, 200, 1, 1, 201, 0.004975124378109453},
    {{5, 4, 3, 2, 1}, 34, 1, 1, 35, 0.02857142857142857},
    {{1, 0, 1, 0, 1}, 13, 1, 1, 14, 0.07142857142857142},
    {{0, 2, 0, 2, 0}, 12, 1, 1, 13, 0.07692307692307693},
};

void score_formula() {
    int ok = 0;
    double worst = 0.0;
    for (const auto& m : kMultisets) {
        std::vector<Finding> fs;
        for (std::size_t s = 0; s < 5; ++s)
            for (int i = 0; i < m.counts[s]; ++i) fs.push_back(synthetic(static_cast<Severity>(s)));
        std::shuffle(fs.begin(), fs.end(), std::mt19937(static_cast<unsigned>(fs.size())));
        const double w = weighted_sum(fs, SeverityWeights{});
        const double q = quality_score(w);
        // W is a multiple of 1/2, so the rational comparison is exact in binary.
        const bool w_exact = w * static_cast<double>(m.w_den) == static_cast<double>(m.w_num);
        const bool q_rational = std::abs(q * static_cast<double>(m.q_den) - static_cast<double>(m.q_num)) <=
                                kScoreTol * static_cast<double>(m.q_den);
        worst = std::max(worst, std::abs(q - m.q));
        if (w_exact && q_rational && std::abs(q - m.q) <= kScoreTol) ++ok;
    }
    const int n = static_cast<int>(std::size(kMultisets));
    report(ok == n && n >= 20, "score-formula",
           std::to_string(ok) + "/" + std::to_string(n) + " multisets match, max |error| " + sci(worst));
}

void score_curves(const fs::path& artifacts) {
    constexpr int kMaxN = 20;
    const SeverityWeights weights;
    std::array<std::array<double, kMaxN + 1>, 5> curve{};
    for (std::size_t s = 0; s < 5; ++s)
        for (int n = 0; n <= kMaxN; ++n) {
            std::vector<Finding> fs(static_cast<std::size_t>(n), synthetic(static_cast<Severity>(s)));
            curve[s][static_cast<std::size_t>(n)] = quality_score(weighted_sum(fs, weights));
        }
    bool decreasing = true, ordered = true;
    for (std::size_t s = 0; s < 5; ++s)
        for (int n = 1; n <= kMaxN; ++n)
            if (!(curve[s][n] < curve[s][n - 1])) decreasing = false;
    for (int n = 0; n <= kMaxN; ++n)
        for (std::size_t s = 1; s < 5; ++s) {
            // Equal at N = 0, strictly lower for a heavier severity afterwards.
            if (n == 0 ? curve[s][0] != curve[s - 1][0] : !(curve[s][n] < curve[s - 1][n])) ordered = false;
        }

    fs::create_directories(artifacts);
    const char* names[] = {"info", "low", "medium", "high", "critical"};
    {
        std::ofstream csv(artifacts / "score_curves.csv");
        csv << "n,info,low,medium,high,critical\n";
        for (int n = 0; n <= kMaxN; ++n) {
            csv << n;
            for (std::size_t s = 0; s < 5; ++s) csv << "," << std::setprecision(17) << curve[s][n];
            csv << "\n";
        }
    }
    {
        const char* colors[] = {"#4c72b0", "#55a868", "#dd8452", "#c44e52", "#8172b3"};
        constexpr double W = 640, H = 400, L = 60, R = 130, T = 20, B = 50;
        auto x = [&](int n) { return L + (W - L - R) * n / kMaxN; };
        auto y = [&](double v) { return T + (H - T - B) * (1.0 - v); };
        std::ofstream svg(artifacts / "score_curves.svg");
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
            << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << "<line x1=\"" << L << "\" y1=\"" << y(0) << "\" x2=\"" << x(kMaxN) << "\" y2=\"" << y(0)
            << "\" stroke=\"black\"/>\n"
            << "<line x1=\"" << L << "\" y1=\"" << y(0) << "\" x2=\"" << L << "\" y2=\"" << y(1)
            << "\" stroke=\"black\"/>\n";
        for (int n = 0; n <= kMaxN; n += 5)
            svg << "<text x=\"" << x(n) << "\" y=\"" << y(0) + 18 << "\" text-anchor=\"middle\">" << n << "</text>\n";
        for (double v : {0.0, 0.25, 0.5, 0.75, 1.0})
            svg << "<text x=\"" << L - 8 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
        svg << "<text x=\"" << (L + x(kMaxN)) / 2 << "\" y=\"" << H - 10
            << "\" text-anchor=\"middle\">number of findings</text>\n"
            << "<text x=\"15\" y=\"" << (T + y(0)) / 2 << "\" transform=\"rotate(-90 15 " << (T + y(0)) / 2
            << ")\" text-anchor=\"middle\">quality score</text>\n";
        for (std::size_t s = 0; s < 5; ++s) {
            svg << "<polyline fill=\"none\" stroke=\"" << colors[s] << "\" stroke-width=\"2\" points=\"";
            for (int n = 0; n <= kMaxN; ++n) svg << x(n) << "," << y(curve[s][n]) << " ";
            svg << "\"/>\n<text x=\"" << x(kMaxN) + 8 << "\" y=\"" << T + 20 + 18 * s << "\" fill=\"" << colors[s]
                << "\">" << names[s] << "</text>\n";
        }
        svg << "</svg>\n";
    }
    report(decreasing && ordered, "score-curves",
           std::string("strictly decreasing in N: ") + (decreasing ? "yes" : "no") +
               ", severity ordering: " + (ordered ? "yes" : "no") + ", plot " +
               (artifacts / "score_curves.svg").string());
}

void golden_corpus(const fs::path& fixtures) {
    const auto t0 = std::chrono::steady_clock::now();
    int exact = 0, total = 0;
    std::vector<std::string> mismatched;
    for (const auto& e : fs::directory_iterator(fixtures / "defects")) {
        if (!e.is_regular_file() || e.path().extension() != ".py") continue;
        const std::string rule = e.path().stem().string();
        ++total;
        if (!registry_contains(rule)) {
            mismatched.push_back(rule);
            continue;
        }
        const RuleDescriptor& d = registry_lookup(rule);
        const auto r = analyze_source(parse_source(e.path().filename().string(), read_file(e.path())), {});
        int hits = 0;
        bool extra = false;
        for (const auto& f : r.findings) {
            if (f.rule_id == rule && f.severity == d.default_severity && f.cwe_id == d.cwe_id)
                ++hits;
            // Class complexity is defined by a method that is itself over the cyclomatic limit.
            else if (!(rule == "MAINT-CLASS-COMPLEXITY" && f.rule_id == "MAINT-CYCLOMATIC"))
                extra = true;
        }
        if (hits == 1 && !extra)
            ++exact;
        else
            mismatched.push_back(rule);
    }
    const auto clean = analyze_path({(fixtures / "clean").string()}, {});
    std::size_t clean_findings = 0;
    for (const auto& f : clean.per_file) clean_findings += f.findings.size();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string detail = std::to_string(exact) + "/" + std::to_string(total) + " fixtures exact, " +
                         std::to_string(clean.per_file.size()) + " clean files with " +
                         std::to_string(clean_findings) + " findings, " + fixed(seconds, 2) + "s";
    for (const auto& m : mismatched) detail += " [mismatch " + m + "]";
    report(exact == total && exact >= kMinGoldenRules && clean_findings == 0 && !clean.per_file.empty() &&
               seconds < kGoldenTimeLimit,
           "golden-corpus", detail);
}

void reward_mix() {
    double worst = 0.0;
    int grid = 0;
    for (int a = 0; a <= 10; ++a)
        for (int b = 0; b <= 10; ++b)
            for (int c = 0; c <= 10; ++c) {
                const RewardComponents rc{a / 10.0, b / 10.0, c / 10.0};
                const double expected = (2.0 * rc.r_format + 3.0 * rc.r_correct + 5.0 * rc.r_quality) / 10.0;
                worst = std::max(worst, std::abs(combined_reward(rc) - expected));
                ++grid;
            }
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
        const RewardComponents base{u(rng), u(rng), u(rng)};
        const double r = combined_reward(base);
        if (r < 0.0 || r > 1.0 + kRewardTol) ++violations;
        for (int k = 0; k < 3; ++k) {
            RewardComponents up = base;
            double& field = k == 0 ? up.r_format : k == 1 ? up.r_correct : up.r_quality;
            field = field + (1.0 - field) * u(rng);
            if (combined_reward(up) < r) ++violations;
        }
    }
    report(worst <= kRewardTol && violations == 0, "reward-mix",
           std::to_string(grid) + " grid triples, max |error| " + sci(worst) +
               ", monotonicity violations in 1000 random triples: " + std::to_string(violations));
}

void advantage_normalization() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad_mean = 0, bad_std = 0, bad_order = 0, bad_affine = 0, bad_constant = 0;
    double worst_mean = 0, worst_std = 0;
    for (int g = 0; g < 1000; ++g) {
        const std::size_t n = 2 + rng() % 15;
        std::vector<double> r(n);
        for (double& x : r) x = u(rng);
        if (std::all_of(r.begin(), r.end(), [&](double x) { return x == r[0]; })) r[0] += 0.5;
        const auto a = group_advantages(r);
        const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
        double var = 0;
        for (double x : a) var += (x - mean) * (x - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        worst_mean = std::max(worst_mean, std::abs(mean));
        worst_std = std::max(worst_std, std::abs(sd - 1.0));
        if (std::abs(mean) > kAdvantageTol) ++bad_mean;
        if (std::abs(sd - 1.0) > kAdvantageTol) ++bad_std;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if ((r[i] < r[j]) != (a[i] < a[j])) ++bad_order;
        const double shift = u(rng) * 10 - 5, scale = 0.01 + u(rng) * 100;
        std::vector<double> shifted = r, scaled = r;
        for (double& x : shifted) x += shift;
        for (double& x : scaled) x *= scale;
        const auto as = group_advantages(shifted), ak = group_advantages(scaled);
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(as[i] - a[i]) > kAdvantageTol || std::abs(ak[i] - a[i]) > kAdvantageTol) ++bad_affine;
        const std::vector<double> constant(n, u(rng));
        for (double x : group_advantages(constant))
            if (x != 0.0) ++bad_constant;
    }
    report(bad_mean + bad_std + bad_order + bad_affine + bad_constant == 0, "advantage-normalization",
           "1000 groups, max |mean| " + sci(worst_mean) + ", max |std-1| " + sci(worst_std) +
               ", order violations " + std::to_string(bad_order) + ", affine violations " +
               std::to_string(bad_affine) + ", nonzero constant-group advantages " + std::to_string(bad_constant));
}

std::string synthetic_snippet() {
    std::ostringstream s;
    s << "\"\"\"Generated module.\"\"\"\nimport os\n\n";
    int lines = 3;
    for (int f = 0; lines + 10 <= kMaxSnippetLines; ++f) {
        s << "def handler_" << f << "(items, limit):\n"
          << "    \"\"\"Process items.\"\"\"\n"
          << "    total = 0\n"
          << "    for item in items:\n"
          << "        if item > limit:\n"
          << "            total += item\n"
          << "        elif item < 0:\n"
          << "            total -= os.getpid()\n"
          << "    return total\n\n";
        lines += 10;
    }
    return s.str();
}

void latency(const fs::path& fixtures, const ProblemSet& problems) {
    std::vector<std::pair<std::string, std::string>> snippets;
    for (const auto& e : fs::recursive_directory_iterator(fixtures)) {
        if (!e.is_regular_file() || e.path().extension() != ".py") continue;
        std::string text = read_file(e.path());
        if (std::count(text.begin(), text.end(), '\n') <= kMaxSnippetLines)
            snippets.emplace_back(e.path().filename().string(), std::move(text));
    }
    for (const auto& p : problems.records()) {
        snippets.emplace_back(p.problem_id + "/ideal.py", p.ideal_solution);
        snippets.emplace_back(p.problem_id + "/initial.py", p.initial_code);
    }
    snippets.emplace_back("synthetic.py", synthetic_snippet());

    std::vector<double> times;
    for (int round = 0; round < 5; ++round)
        for (const auto& [label, text] : snippets) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto r = analyze_source(parse_source(label, text), {});
            times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            if (r.score <= 0) times.back() = 1e9;
        }
    std::sort(times.begin(), times.end());
    auto pct = [&](double p) { return times[static_cast<std::size_t>(p * static_cast<double>(times.size() - 1))]; };
    report(pct(0.5) < kLatencyP50Limit, "latency",
           std::to_string(snippets.size()) + " snippets x 5 rounds, p50 " + fixed(pct(0.5) * 1000, 3) + " ms, p95 " +
               fixed(pct(0.95) * 1000, 3) + " ms, max " + fixed(times.back() * 1000, 3) + " ms");
}

void determinism(const fs::path& fixtures) {
    AnalyzerConfig c;
    c.advisory_db_path = std::string(CODEQUAL_SOURCE_DIR) + "/data/advisories.jsonl";
    const std::string first = serialize_report(analyze_path({fixtures.string()}, c, 1));
    const std::string second = serialize_report(analyze_path({fixtures.string()}, c, 1));
    const std::string parallel = serialize_report(analyze_path({fixtures.string()}, c, 4));
    report(first == second && first == parallel, "determinism",
           std::to_string(first.size()) + " byte report, repeat identical: " + (first == second ? "yes" : "no") +
               ", 4-thread identical: " + (first == parallel ? "yes" : "no"));
}

std::string run_capture(const std::string& cmd, int& code) {
    std::string out;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) {
        code = -1;
        return out;
    }
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, n);
    const int status = ::pclose(p);
    code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

void dataset_consistency(const fs::path& fixtures, const ProblemSet& problems) {
    std::string detail;
    bool ok = !problems.records().empty();

    const bool python = std::system("python3 -c pass >/dev/null 2>&1") == 0;
    if (python) {
        TestRunnerPool runner({"python3", (fixtures / "fake_testrunner.py").string()}, 1, 30.0);
        int perfect = 0;
        for (const auto& p : problems.records()) {
            const auto b = score_rollout("```python\n" + p.ideal_solution + "\n```", p, EngineConfig{}, &runner);
            if (b.correctness_available && b.r_correct == 1.0) ++perfect;
        }
        ok = ok && perfect == static_cast<int>(problems.records().size());
        detail += "ideal solutions with r_correct = 1: " + std::to_string(perfect) + "/" +
                  std::to_string(problems.records().size());
    } else {
        detail += "runner half skipped (python3 not found)";
    }

    int code = 0;
    const std::string out = run_capture("env -u CODEQUAL_TESTRUNNER '" + std::string(CODEQUAL_CLI) +
                                            "' reward --problems '" + (fixtures / "problems.jsonl").string() +
                                            "' --completions '" + (fixtures / "completions.jsonl").string() +
                                            "' 2>/dev/null",
                                        code);
    int rows = 0, flagged = 0;
    std::istringstream lines(out);
    for (std::string line; std::getline(lines, line);) {
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("breakdown") || j["breakdown"].is_null()) continue;
        const auto& b = j["breakdown"];
        if (b["format"] == "none") continue;
        ++rows;
        if (b["correctness_available"] == false && b.contains("r_format") && b.contains("r_quality") &&
            b.contains("quality"))
            ++flagged;
    }
    ok = ok && code == 0 && rows > 0 && flagged == rows;
    detail += ", runner absent: CLI exit " + std::to_string(code) + ", " + std::to_string(flagged) + "/" +
              std::to_string(rows) + " rows scored with r_correct flagged unavailable";
    report(ok, "dataset-self-consistency", detail);
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path artifacts = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance-artifacts");
    const fs::path fixtures = CODEQUAL_FIXTURES;
    const ProblemSet problems = ProblemSet::load_file((fixtures / "problems.jsonl").string());

    score_formula();
    score_curves(artifacts);
    golden_corpus(fixtures);
    reward_mix();
    advantage_normalization();
    latency(fixtures, problems);
    determinism(fixtures);
    dataset_consistency(fixtures, problems);

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
    return failures == 0 ? 0 : 1;
}
