#include "codequal/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace codequal {

using nlohmann::json;

AnalyzerConfig::AnalyzerConfig() {
    for (const auto& r : rule_registry()) enabled_rules.insert(r.rule_id);
}

void AnalyzerConfig::validate() const {
    try {
        maintainability.validate();
        performance.validate();
        secrets.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    for (const auto& id : enabled_rules)
        if (!registry_contains(id)) throw ConfigError("enabled_rules: unknown rule '" + id + "'");
}

std::string AnalyzerConfig::fingerprint() const { return sha256_hex(to_json(*this).dump()); }

void RewardWeights::validate() const {
    for (double w : {format_weight, correct_weight, quality_weight})
        if (!std::isfinite(w) || w < 0) throw ConfigError("reward weights must be finite and non-negative");
    if (std::abs(format_weight + correct_weight + quality_weight - 1.0) > 1e-9)
        throw ConfigError("reward weights must sum to 1");
}

void FormatRewardTable::validate() const {
    for (double v : {single_complete, single_incomplete, multiple, none})
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("format rewards must lie in [0, 1]");
}

void TestRunnerSettings::validate() const {
    if (pool_size < 1) throw ConfigError("runner.pool_size must be at least 1");
    if (!(timeout_seconds > 0) || !std::isfinite(timeout_seconds))
        throw ConfigError("runner.timeout_seconds must be positive");
    if (memory_limit_mb < 1) throw ConfigError("runner.memory_limit_mb must be positive");
    if (!(acquire_timeout_seconds >= 0) || !std::isfinite(acquire_timeout_seconds))
        throw ConfigError("runner.acquire_timeout_seconds must be non-negative");
}

void RewardConfig::validate() const {
    weights.validate();
    format.validate();
    runner.validate();
}

void EngineConfig::validate() const {
    analyzer.validate();
    reward.validate();
    if (parallelism < 0) throw ConfigError("parallelism must be non-negative");
}

std::string EngineConfig::fingerprint() const {
    json j = {{"analyzer", to_json(analyzer)}, {"reward", to_json(reward)}};
    j["reward"].erase("runner");
    return sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const AnalyzerConfig& c) {
    const auto& w = c.severity_weights.values();
    json weights = json::object();
    for (Severity s : kAllSeverities) weights[std::string(to_string(s))] = w[static_cast<std::size_t>(s)];
    const auto& m = c.maintainability;
    const auto& p = c.performance;
    return {
        {"severity_weights", weights},
        {"maintainability",
         {{"cyclomatic_medium", m.cyclomatic_medium},
          {"cyclomatic_high", m.cyclomatic_high},
          {"max_parameters", m.max_parameters},
          {"max_instance_attributes", m.max_instance_attributes},
          {"max_file_loc", m.max_file_loc},
          {"max_branches", m.max_branches},
          {"max_returns", m.max_returns},
          {"max_nesting_depth", m.max_nesting_depth},
          {"require_module_docstring", m.require_module_docstring}}},
        {"performance",
         {{"max_class_attributes", p.max_class_attributes},
          {"max_nesting_containers", p.max_nesting_containers},
          {"max_dict_literal_entries", p.max_dict_literal_entries}}},
        {"secrets",
         {{"name_patterns", c.secrets.name_patterns},
          {"min_entropy_bits_per_char", c.secrets.min_entropy_bits_per_char},
          {"min_literal_length", c.secrets.min_literal_length}}},
        {"enabled_rules", c.enabled_rules},  // std::set serializes sorted
        {"advisory_db_path", c.advisory_db_path ? json(*c.advisory_db_path) : json(nullptr)},
    };
}

json to_json(const RewardConfig& c) {
    return {
        {"weights",
         {{"format", c.weights.format_weight}, {"correct", c.weights.correct_weight}, {"quality", c.weights.quality_weight}}},
        {"format_rewards",
         {{"single_complete", c.format.single_complete},
          {"single_incomplete", c.format.single_incomplete},
          {"multiple", c.format.multiple},
          {"none", c.format.none}}},
        {"unavailable_correctness",
         c.unavailable_correctness == UnavailableCorrectness::FailClosed ? "fail_closed" : "renormalize"},
        {"runner",
         {{"command", c.runner.command},
          {"pool_size", c.runner.pool_size},
          {"timeout_seconds", c.runner.timeout_seconds},
          {"memory_limit_mb", c.runner.memory_limit_mb},
          {"acquire_timeout_seconds", c.runner.acquire_timeout_seconds}}},
    };
}

json to_json(const EngineConfig& c) {
    return {{"analyzer", to_json(c.analyzer)}, {"reward", to_json(c.reward)}, {"parallelism", c.parallelism}};
}

namespace {

/// Object reader that rejects keys nobody asked for.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) throw ConfigError(where_ + ": expected an object");
    }
    ~Fields() noexcept(false) {
        if (std::uncaught_exceptions()) return;
        for (const auto& [key, _] : j_.items())
            if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void read(const std::string& key, int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
            out = v->get<int>();
        }
    }
    void read(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
            out = v->get<double>();
        }
    }
    void read(const std::string& key, bool& out) {
        if (const json* v = get(key)) {
            if (!v->is_boolean()) throw ConfigError(path(key) + ": expected a boolean");
            out = v->get<bool>();
        }
    }
    void read(const std::string& key, std::vector<std::string>& out) {
        if (const json* v = get(key)) {
            if (!v->is_array()) throw ConfigError(path(key) + ": expected a list of strings");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_string()) throw ConfigError(path(key) + ": expected a list of strings");
                out.push_back(e.get<std::string>());
            }
        }
    }

    std::string path(const std::string& key) const { return where_ + "." + key; }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

}  // namespace

AnalyzerConfig analyzer_config_from_json(const json& j) {
    AnalyzerConfig c;
    {
        Fields f(j, "analyzer");
        if (const json* w = f.get("severity_weights")) {
            Fields fw(*w, f.path("severity_weights"));
            auto values = c.severity_weights.values();
            for (Severity s : kAllSeverities) fw.read(std::string(to_string(s)), values[static_cast<std::size_t>(s)]);
            try {
                c.severity_weights = SeverityWeights(values);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        if (const json* m = f.get("maintainability")) {
            Fields fm(*m, f.path("maintainability"));
            auto& t = c.maintainability;
            fm.read("cyclomatic_medium", t.cyclomatic_medium);
            fm.read("cyclomatic_high", t.cyclomatic_high);
            fm.read("max_parameters", t.max_parameters);
            fm.read("max_instance_attributes", t.max_instance_attributes);
            fm.read("max_file_loc", t.max_file_loc);
            fm.read("max_branches", t.max_branches);
            fm.read("max_returns", t.max_returns);
            fm.read("max_nesting_depth", t.max_nesting_depth);
            fm.read("require_module_docstring", t.require_module_docstring);
        }
        if (const json* p = f.get("performance")) {
            Fields fp(*p, f.path("performance"));
            fp.read("max_class_attributes", c.performance.max_class_attributes);
            fp.read("max_nesting_containers", c.performance.max_nesting_containers);
            fp.read("max_dict_literal_entries", c.performance.max_dict_literal_entries);
        }
        if (const json* s = f.get("secrets")) {
            Fields fs(*s, f.path("secrets"));
            fs.read("name_patterns", c.secrets.name_patterns);
            fs.read("min_entropy_bits_per_char", c.secrets.min_entropy_bits_per_char);
            fs.read("min_literal_length", c.secrets.min_literal_length);
        }
        std::vector<std::string> rules(c.enabled_rules.begin(), c.enabled_rules.end());
        f.read("enabled_rules", rules);
        c.enabled_rules = std::set<std::string>(rules.begin(), rules.end());
        if (const json* db = f.get("advisory_db_path")) {
            if (db->is_null()) c.advisory_db_path.reset();
            else if (db->is_string()) c.advisory_db_path = db->get<std::string>();
            else throw ConfigError("analyzer.advisory_db_path: expected a string or null");
        }
    }
    c.validate();
    return c;
}

RewardConfig reward_config_from_json(const json& j) {
    RewardConfig c;
    {
        Fields f(j, "reward");
        if (const json* w = f.get("weights")) {
            Fields fw(*w, f.path("weights"));
            fw.read("format", c.weights.format_weight);
            fw.read("correct", c.weights.correct_weight);
            fw.read("quality", c.weights.quality_weight);
        }
        if (const json* t = f.get("format_rewards")) {
            Fields ft(*t, f.path("format_rewards"));
            ft.read("single_complete", c.format.single_complete);
            ft.read("single_incomplete", c.format.single_incomplete);
            ft.read("multiple", c.format.multiple);
            ft.read("none", c.format.none);
        }
        if (const json* p = f.get("unavailable_correctness")) {
            if (*p == "fail_closed") c.unavailable_correctness = UnavailableCorrectness::FailClosed;
            else if (*p == "renormalize") c.unavailable_correctness = UnavailableCorrectness::Renormalize;
            else throw ConfigError("reward.unavailable_correctness: expected \"fail_closed\" or \"renormalize\"");
        }
        if (const json* r = f.get("runner")) {
            Fields fr(*r, f.path("runner"));
            fr.read("command", c.runner.command);
            fr.read("pool_size", c.runner.pool_size);
            fr.read("timeout_seconds", c.runner.timeout_seconds);
            fr.read("memory_limit_mb", c.runner.memory_limit_mb);
            fr.read("acquire_timeout_seconds", c.runner.acquire_timeout_seconds);
        }
    }
    c.validate();
    return c;
}

EngineConfig engine_config_from_json(const json& j) {
    EngineConfig c;
    {
        Fields f(j, "config");
        if (const json* a = f.get("analyzer")) c.analyzer = analyzer_config_from_json(*a);
        if (const json* r = f.get("reward")) c.reward = reward_config_from_json(*r);
        f.read("parallelism", c.parallelism);
    }
    c.validate();
    return c;
}

EngineConfig load_engine_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    return engine_config_from_json(j);
}

EngineConfig apply_overrides(const EngineConfig& base, const json& patch) {
    if (!patch.is_object()) throw ConfigError("config overrides must be an object");
    json merged = to_json(base);
    merged.merge_patch(patch);
    return engine_config_from_json(merged);
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

}  // namespace codequal
