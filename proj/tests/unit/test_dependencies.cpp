#include "codequal/dependencies.hpp"
#include "test_util.hpp"

using namespace codequal;

namespace {

AdvisoryDb toy_db() {
    return AdvisoryDb::parse_jsonl(
        "# toy database\n"
        "{\"name\": \"Left_Pad\", \"range\": \">=1.0,<1.3\", \"advisory_id\": \"ADV-1\", \"cwe_id\": \"CWE-20\"}\n"
        "\n"
        "{\"name\": \"left-pad\", \"range\": \"==2.0.1 || ==2.0.2\", \"advisory_id\": \"ADV-2\"}\n");
}

}  // namespace

TEST(Version, Ordering) {
    EXPECT_EQ(Version::parse("1.0"), Version::parse("1.0.0"));
    EXPECT_LT(Version::parse("1.0a1"), Version::parse("1.0b2"));
    EXPECT_LT(Version::parse("1.0b2"), Version::parse("1.0rc1"));
    EXPECT_LT(Version::parse("1.0rc1"), Version::parse("1.0"));
    EXPECT_LT(Version::parse("1.0"), Version::parse("1.0.post1"));
    EXPECT_LT(Version::parse("1.0.dev3"), Version::parse("1.0a1"));
    EXPECT_LT(Version::parse("1.9"), Version::parse("1.10"));
    EXPECT_LT(Version::parse("2.0"), Version::parse("1!0.5"));
    EXPECT_EQ(Version::parse("1.0+local"), Version::parse("1.0"));
    EXPECT_THROW(Version::parse("one.two"), VersionError);
}

TEST(VersionRange, ClausesAndAlternatives) {
    const auto r = VersionRange::parse(">=1.0,<1.26.5 || ==2.0.1");
    EXPECT_TRUE(r.contains(Version::parse("1.5")));
    EXPECT_TRUE(r.contains(Version::parse("2.0.1")));
    EXPECT_FALSE(r.contains(Version::parse("1.26.5")));
    EXPECT_FALSE(r.contains(Version::parse("0.9")));
    EXPECT_TRUE(VersionRange::parse("==1.2.*").contains(Version::parse("1.2.9")));
    EXPECT_FALSE(VersionRange::parse("!=1.2.*").contains(Version::parse("1.2.9")));
    EXPECT_TRUE(VersionRange::parse("~=1.4.2").contains(Version::parse("1.4.9")));
    EXPECT_FALSE(VersionRange::parse("~=1.4.2").contains(Version::parse("1.5")));
    EXPECT_THROW(VersionRange::parse(">>1"), VersionError);
}

TEST(PackageName, Normalization) {
    EXPECT_EQ(normalize_package_name("Left_Pad"), "left-pad");
    EXPECT_EQ(normalize_package_name("zope.interface"), "zope-interface");
    EXPECT_EQ(normalize_package_name("a--_.b"), "a-b");
}

TEST(RequirementLine, Parsing) {
    const auto r = parse_requirement_line("requests[security] == 2.25.0 ; python_version >= '3.8'");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->name, "requests");
    EXPECT_EQ(r->pinned_version(), "2.25.0");
    EXPECT_FALSE(parse_requirement_line("-r other.txt"));
    EXPECT_FALSE(parse_requirement_line("--index-url https://example.com"));
    EXPECT_FALSE(parse_requirement_line("./local/pkg"));
    const auto ranged = parse_requirement_line("numpy>=1.0,<2");
    ASSERT_TRUE(ranged);
    EXPECT_FALSE(ranged->pinned_version());
    EXPECT_THROW(parse_requirement_line("not a valid line %%%"), VersionError);
}

TEST(CheckDependencies, EmptyDb) { EXPECT_TRUE(check_dependencies("left-pad==1.0.0\n", AdvisoryDb{}).empty()); }

TEST(CheckDependencies, BothSidesOfBoundary) {
    const AdvisoryDb db = toy_db();
    const auto inside = check_dependencies("left-pad==1.2.9\n", db);
    ASSERT_EQ(inside.size(), 1u);
    EXPECT_EQ(inside[0].rule_id, "SEC-VULNERABLE-DEPENDENCY");
    EXPECT_EQ(inside[0].severity, Severity::High);
    EXPECT_NE(inside[0].message.find("ADV-1"), std::string::npos);
    EXPECT_TRUE(check_dependencies("left-pad==1.3\n", db).empty());
    EXPECT_TRUE(check_dependencies("left-pad==0.9\n", db).empty());
    EXPECT_EQ(check_dependencies("Left.Pad==1.0\n", db).size(), 1u);
    EXPECT_EQ(check_dependencies("left-pad==2.0.2\n", db).size(), 1u);
    EXPECT_TRUE(check_dependencies("left-pad>=1.0\n", db).empty());
}

TEST(CheckDependencies, UnparseableLineIsInfo) {
    const auto fs = check_dependencies("not a valid line %%%\n", AdvisoryDb{});
    ASSERT_EQ(fs.size(), 1u);
    EXPECT_EQ(fs[0].rule_id, "SEC-REQUIREMENT-UNPARSEABLE");
    EXPECT_EQ(fs[0].severity, Severity::Info);
}

TEST(CheckDependencies, CommentsContinuationsAndLines) {
    const AdvisoryDb db = toy_db();
    const auto fs = check_dependencies("# pinned\n\nflask==2.0  # web\nleft-pad==\\\n1.1\n", db, "reqs.txt");
    ASSERT_EQ(fs.size(), 1u);
    EXPECT_EQ(fs[0].span.start_line, 4);
    EXPECT_EQ(fs[0].span.file_label, "reqs.txt");
}

TEST(AdvisoryDb, MalformedLineReportsLineNumber) {
    try {
        AdvisoryDb::parse_jsonl("{\"name\": \"a\", \"range\": \"<1\", \"advisory_id\": \"X\"}\n{oops\n");
        FAIL() << "expected AdvisoryDbError";
    } catch (const AdvisoryDbError& e) {
        EXPECT_EQ(e.line(), 2);
    }
    EXPECT_THROW(AdvisoryDb::parse_jsonl("{\"name\": \"a\", \"range\": \"<<1\", \"advisory_id\": \"X\"}\n"),
                 AdvisoryDbError);
    EXPECT_THROW(AdvisoryDb::parse_jsonl("{\"name\": \"a\", \"range\": \"<1\"}\n"), AdvisoryDbError);
}

TEST(AdvisoryDb, BundledDatabaseLoads) {
    const AdvisoryDb db = AdvisoryDb::load_file(std::string(CODEQUAL_SOURCE_DIR) + "/data/advisories.jsonl");
    EXPECT_GE(db.records().size(), 5u);
    EXPECT_EQ(db.matching("requests", Version::parse("2.25.0")).size(), 1u);
}
