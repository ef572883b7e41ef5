#include "codequal/dependencies.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace codequal {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    return std::string(s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1));
}

long long to_number(const std::ssub_match& m, long long fallback) {
    if (!m.matched || m.length() == 0) return fallback;
    try {
        return std::stoll(m.str());
    } catch (const std::out_of_range&) {
        throw VersionError("version component out of range: " + m.str());
    }
}

const std::regex kVersionRe{
    R"(v?(?:(\d+)!)?(\d+(?:\.\d+)*))"
    R"((?:[-_.]?(a|b|c|rc|alpha|beta|pre|preview)[-_.]?(\d*))?)"
    R"((?:-(\d+)|[-_.]?(post|rev|r)[-_.]?(\d*))?)"
    R"((?:[-_.]?(dev)[-_.]?(\d*))?)"
    R"((?:\+([a-z0-9]+(?:[-_.][a-z0-9]+)*))?)"};

}  // namespace

Version Version::parse(std::string_view text) {
    const std::string s = lower(trim(text));
    std::smatch m;
    if (!std::regex_match(s, m, kVersionRe)) throw VersionError("invalid version: '" + std::string(text) + "'");
    Version v;
    v.text_ = trim(text);
    v.epoch_ = to_number(m[1], 0);
    std::stringstream release(m[2].str());
    for (std::string part; std::getline(release, part, '.');) v.release_.push_back(std::stoll(part));
    if (m[3].matched) {
        const std::string phase = m[3].str();
        const int p = phase[0] == 'a' ? 0 : phase[0] == 'b' ? 1 : 2;
        v.pre_ = std::make_pair(p, to_number(m[4], 0));
    }
    if (m[5].matched) v.post_ = to_number(m[5], 0);
    else if (m[6].matched) v.post_ = to_number(m[7], 0);
    if (m[8].matched) v.dev_ = to_number(m[9], 0);
    return v;
}

std::strong_ordering operator<=>(const Version& a, const Version& b) {
    if (auto c = a.epoch_ <=> b.epoch_; c != 0) return c;
    // Trailing zeros do not distinguish releases: 1.0 == 1.0.0.
    const std::size_t n = std::max(a.release_.size(), b.release_.size());
    for (std::size_t i = 0; i < n; ++i) {
        const long long x = i < a.release_.size() ? a.release_[i] : 0;
        const long long y = i < b.release_.size() ? b.release_[i] : 0;
        if (auto c = x <=> y; c != 0) return c;
    }
    constexpr long long kLow = std::numeric_limits<long long>::min();
    constexpr long long kHigh = std::numeric_limits<long long>::max();
    // A dev release of a final version sorts before its pre-releases.
    auto pre_key = [&](const Version& v) -> std::pair<long long, long long> {
        if (v.pre_) return {v.pre_->first, v.pre_->second};
        if (!v.post_ && v.dev_) return {kLow, 0};
        return {kHigh, 0};
    };
    if (auto c = pre_key(a) <=> pre_key(b); c != 0) return c;
    if (auto c = a.post_.value_or(kLow) <=> b.post_.value_or(kLow); c != 0) return c;
    return a.dev_.value_or(kHigh) <=> b.dev_.value_or(kHigh);
}

bool VersionClause::admits(const Version& v, std::string_view raw) const {
    if (op == "===") return trim(raw) == version_text;
    if (wildcard) {
        const Version prefix = Version::parse(version_text);
        const auto& want = prefix.release();
        const auto& have = v.release();
        bool match = true;
        for (std::size_t i = 0; i < want.size(); ++i)
            if ((i < have.size() ? have[i] : 0) != want[i]) match = false;
        return op == "==" ? match : !match;
    }
    const Version bound = Version::parse(version_text);
    if (op == "==") return v == bound;
    if (op == "!=") return v != bound;
    if (op == "<") return v < bound;
    if (op == "<=") return v <= bound;
    if (op == ">") return v > bound;
    if (op == ">=") return v >= bound;
    if (op == "~=") {
        // ~=X.Y.Z means >=X.Y.Z together with ==X.Y.*
        const auto& rel = bound.release();
        if (v < bound) return false;
        for (std::size_t i = 0; i + 1 < rel.size(); ++i)
            if ((i < v.release().size() ? v.release()[i] : 0) != rel[i]) return false;
        return true;
    }
    return false;
}

namespace {

const std::regex kClauseRe{R"(\s*(===|==|!=|<=|>=|~=|<|>)\s*([A-Za-z0-9.*+!_-]+)\s*)"};

VersionClause parse_clause(std::string_view text) {
    const std::string s(text);
    std::smatch m;
    if (!std::regex_match(s, m, kClauseRe)) throw VersionError("invalid version clause: '" + trim(text) + "'");
    VersionClause c{m[1].str(), m[2].str(), false};
    if (c.op == "===") return c;
    if (c.version_text.size() > 2 && c.version_text.ends_with(".*")) {
        if (c.op != "==" && c.op != "!=") throw VersionError("wildcard only allowed with == and !=");
        c.wildcard = true;
        c.version_text.resize(c.version_text.size() - 2);
    }
    if (c.op == "~=" && Version::parse(c.version_text).release().size() < 2)
        throw VersionError("~= needs at least two release components");
    Version::parse(c.version_text);
    return c;
}

std::vector<std::string> split(std::string_view s, std::string_view sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t at = s.find(sep, start);
        out.emplace_back(s.substr(start, at == std::string_view::npos ? s.npos : at - start));
        if (at == std::string_view::npos) break;
        start = at + sep.size();
    }
    return out;
}

}  // namespace

VersionRange VersionRange::parse(std::string_view text) {
    VersionRange r;
    r.text_ = trim(text);
    for (const auto& alt : split(r.text_, "||")) {
        std::vector<VersionClause> clauses;
        for (const auto& part : split(alt, ",")) clauses.push_back(parse_clause(part));
        r.alternatives_.push_back(std::move(clauses));
    }
    return r;
}

bool VersionRange::contains(const Version& v) const {
    const std::string raw = v.str();
    return std::any_of(alternatives_.begin(), alternatives_.end(), [&](const auto& clauses) {
        return std::all_of(clauses.begin(), clauses.end(), [&](const VersionClause& c) { return c.admits(v, raw); });
    });
}

std::string normalize_package_name(std::string_view name) {
    std::string out;
    bool pending_sep = false;
    for (unsigned char c : trim(name)) {
        if (c == '-' || c == '_' || c == '.') {
            pending_sep = true;
            continue;
        }
        if (pending_sep && !out.empty()) out.push_back('-');
        pending_sep = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

AdvisoryDb::AdvisoryDb(std::vector<Advisory> records) : records_(std::move(records)) {
    for (auto& r : records_) r.package_name = normalize_package_name(r.package_name);
}

AdvisoryDb AdvisoryDb::parse_jsonl(std::string_view text) {
    std::vector<Advisory> records;
    std::istringstream in{std::string(text)};
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(t);
        } catch (const nlohmann::json::parse_error& e) {
            throw AdvisoryDbError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw AdvisoryDbError(line_no, "record must be a JSON object");
        auto text_field = [&](const char* key) {
            if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty())
                throw AdvisoryDbError(line_no, std::string("missing or empty string field '") + key + "'");
            return j[key].get<std::string>();
        };
        Advisory a{text_field("name"), {}, text_field("advisory_id"), std::nullopt};
        try {
            a.vulnerable_range = VersionRange::parse(text_field("range"));
        } catch (const VersionError& e) {
            throw AdvisoryDbError(line_no, e.what());
        }
        if (j.contains("cwe_id") && !j["cwe_id"].is_null()) {
            if (!j["cwe_id"].is_string()) throw AdvisoryDbError(line_no, "cwe_id must be a string or null");
            a.cwe_id = j["cwe_id"].get<std::string>();
        }
        records.push_back(std::move(a));
    }
    return AdvisoryDb(std::move(records));
}

AdvisoryDb AdvisoryDb::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read advisory database: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_jsonl(buf.str());
}

std::vector<const Advisory*> AdvisoryDb::matching(std::string_view package, const Version& v) const {
    const std::string name = normalize_package_name(package);
    std::vector<const Advisory*> out;
    for (const auto& r : records_)
        if (r.package_name == name && r.vulnerable_range.contains(v)) out.push_back(&r);
    return out;
}

std::optional<std::string> Requirement::pinned_version() const {
    if (url || clauses.size() != 1) return std::nullopt;
    const auto& c = clauses.front();
    if ((c.op == "==" && !c.wildcard) || c.op == "===") return c.version_text;
    return std::nullopt;
}

namespace {

const std::regex kRequirementRe{
    R"(([A-Za-z0-9](?:[A-Za-z0-9._-]*[A-Za-z0-9])?)\s*(\[\s*[A-Za-z0-9._-]+(?:\s*,\s*[A-Za-z0-9._-]+)*\s*\])?\s*(.*))"};

bool looks_like_location(std::string_view s) {
    return s.starts_with(".") || s.starts_with("/") || s.starts_with("git+") || s.starts_with("hg+") ||
           s.starts_with("svn+") || s.starts_with("bzr+") || s.find("://") != std::string_view::npos;
}

}  // namespace

std::optional<Requirement> parse_requirement_line(std::string_view raw) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '-') return std::nullopt;
    // Environment markers select platforms; they never change the pin.
    if (const auto semi = line.find(';'); semi != std::string::npos) line = trim(line.substr(0, semi));
    std::smatch m;
    if (!std::regex_match(line, m, kRequirementRe)) {
        if (looks_like_location(line)) return std::nullopt;
        throw VersionError("unparseable requirement: '" + line + "'");
    }
    Requirement req;
    req.name = m[1].str();
    std::string rest = trim(m[3].str());
    if (rest.starts_with("@")) {
        if (trim(rest.substr(1)).empty()) throw VersionError("missing URL after '@'");
        req.url = true;
        return req;
    }
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')') rest = trim(rest.substr(1, rest.size() - 2));
    if (rest.empty()) return req;
    try {
        for (const auto& part : split(rest, ",")) req.clauses.push_back(parse_clause(part));
    } catch (const VersionError&) {
        if (looks_like_location(line)) return std::nullopt;
        throw;
    }
    return req;
}

std::vector<Finding> check_dependencies(std::string_view manifest_text, const AdvisoryDb& db,
                                        const std::string& file_label) {
    std::vector<Finding> out;
    std::vector<std::string> lines = split(manifest_text, "\n");
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const int line_no = static_cast<int>(i) + 1;
        std::string logical = lines[i];
        if (!logical.empty() && logical.back() == '\r') logical.pop_back();
        // A trailing backslash continues the requirement on the next line.
        int last_line = line_no;
        while (!logical.empty() && logical.back() == '\\' && i + 1 < lines.size()) {
            logical.pop_back();
            std::string next = lines[++i];
            if (!next.empty() && next.back() == '\r') next.pop_back();
            logical += next;
            ++last_line;
        }
        // '#' starts a comment at line start or after whitespace.
        for (std::size_t k = 0; k < logical.size(); ++k) {
            if (logical[k] == '#' && (k == 0 || std::isspace(static_cast<unsigned char>(logical[k - 1])))) {
                logical.resize(k);
                break;
            }
        }
        Span span;
        span.file_label = file_label;
        span.start_line = line_no;
        span.end_line = last_line;
        span.end_col = static_cast<int>(lines[last_line - 1].size());
        if (span.end_col > 0 && lines[last_line - 1].back() == '\r') --span.end_col;

        std::optional<Requirement> req;
        try {
            req = parse_requirement_line(logical);
        } catch (const VersionError& e) {
            out.push_back(make_finding("SEC-REQUIREMENT-UNPARSEABLE", span, e.what()));
            continue;
        }
        if (!req) continue;
        const auto pin = req->pinned_version();
        if (!pin) continue;
        Version version;
        try {
            version = Version::parse(*pin);
        } catch (const VersionError&) {
            continue;  // arbitrary-equality pins outside the version grammar
        }
        const auto hits = db.matching(req->name, version);
        if (hits.empty()) continue;
        std::string ids;
        for (const Advisory* a : hits) {
            if (!ids.empty()) ids += ", ";
            ids += a->advisory_id;
            if (a->cwe_id) ids += " (" + *a->cwe_id + ")";
        }
        out.push_back(make_finding("SEC-VULNERABLE-DEPENDENCY", span,
                                   req->name + "==" + *pin + " is affected by " + ids));
    }
    return out;
}

}  // namespace codequal
