#include <cstdio>
#include <filesystem>

#include "ast_dump.hpp"
#include "codequal/parser.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using codequal::testing::read_text;

namespace {

bool have_python() { return std::system("python3 -c pass >/dev/null 2>&1") == 0; }

std::string oracle_dump(const fs::path& file) {
    const std::string cmd = "python3 '" + std::string(CODEQUAL_SOURCE_DIR) + "/tests/oracle/py_ast_dump.py' '" +
                            file.string() + "' 2>&1";
    std::string out;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return out;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, n);
    ::pclose(p);
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

// Syntax errors are compared by line only: recovery points differ in column.
std::string our_dump(const std::string& text) {
    try {
        return codequal::testing::dump_ast(*codequal::py::parse_module(text));
    } catch (const codequal::py::SyntaxError& e) {
        return "SYNTAX-ERROR " + std::to_string(e.line());
    }
}

std::string normalize_oracle(const std::string& s) {
    if (!s.starts_with("SYNTAX-ERROR ")) return s;
    return s.substr(0, s.find(':'));
}

std::vector<fs::path> corpus() {
    std::vector<fs::path> out;
    for (const char* dir : {"tests/fixtures", "tests/oracle"})
        for (const auto& e : fs::recursive_directory_iterator(fs::path(CODEQUAL_SOURCE_DIR) / dir))
            if (e.is_regular_file() && e.path().extension() == ".py") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(ParserDifferential, MatchesReferenceParserOnCorpus) {
    if (!have_python()) GTEST_SKIP() << "python3 not available";
    const auto files = corpus();
    ASSERT_GE(files.size(), 50u);
    for (const auto& f : files)
        EXPECT_EQ(our_dump(read_text(f.string())), normalize_oracle(oracle_dump(f))) << f;
}
