#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "analyzer_util.hpp"
#include "codequal/analyzers.hpp"

namespace codequal {

using namespace detail;

void SecretHeuristics::validate() const {
    if (min_literal_length < 8) throw std::invalid_argument("min_literal_length must be at least 8");
    if (!(min_entropy_bits_per_char >= 0.0) || !std::isfinite(min_entropy_bits_per_char))
        throw std::invalid_argument("min_entropy_bits_per_char must be a non-negative number");
    for (const auto& p : name_patterns)
        if (p.empty()) throw std::invalid_argument("secret name patterns must be non-empty");
}

double shannon_entropy(std::string_view text) {
    if (text.empty()) return 0.0;
    std::array<std::size_t, 256> counts{};
    for (unsigned char c : text) ++counts[c];
    double h = 0.0;
    const double n = static_cast<double>(text.size());
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

namespace {

template <typename F>
void for_each_call(const SourceUnit& unit, F&& visit) {
    py::walk(unit.syntax_root(), [&](const Node& n) {
        if (n.is(NodeKind::Call)) visit(n);
        return true;
    });
}

bool is_string_expr(const Node& e) { return e.is_string() || e.is(NodeKind::JoinedStr); }

/// True when building the value splices runtime data into a string: an
/// f-string with a field, `%` or `+` involving a string literal, or
/// str.format on a literal. Sequence arguments are checked element-wise.
bool interpolated(const Node& e) {
    switch (e.kind) {
        case NodeKind::JoinedStr:
            return std::any_of(e.children.begin(), e.children.end(),
                               [](const auto& c) { return c->is(NodeKind::FormattedValue); });
        case NodeKind::BinOp: {
            const Node& l = *e.child(0);
            const Node& r = *e.child(1);
            if (e.text == "%") return is_string_expr(l) && !py::is_literal(r);
            if (e.text == "+") {
                if (interpolated(l) || interpolated(r)) return true;
                return (is_string_expr(l) && !r.is(NodeKind::Constant)) ||
                       (is_string_expr(r) && !l.is(NodeKind::Constant));
            }
            return false;
        }
        case NodeKind::Call: {
            const Node& f = *e.child(0);
            return f.is(NodeKind::Attribute) && f.text == "format" && is_string_expr(*f.child(0)) && e.size() > 1;
        }
        case NodeKind::List:
        case NodeKind::Tuple:
            return std::any_of(e.children.begin(), e.children.end(), [](const auto& c) { return interpolated(*c); });
        default:
            return false;
    }
}

/// The command argument: first positional, else the named keyword.
const Node* command_argument(const Node& call, std::initializer_list<std::string_view> keywords) {
    auto pos = py::positional_arguments(call);
    if (!pos.empty()) return pos.front();
    for (auto kw : keywords)
        if (const Node* v = py::keyword_argument(call, kw)) return v;
    return nullptr;
}

bool literal_falsy(const Node& e) {
    if (!e.is(NodeKind::Constant)) return false;
    switch (e.const_kind) {
        case py::ConstKind::False:
        case py::ConstKind::None: return true;
        case py::ConstKind::Int: return e.text == "0";
        case py::ConstKind::Str: return e.text.empty();
        default: return false;
    }
}

const std::set<std::string> kShellCalls{"os.system",      "os.popen",      "os.popen2",       "os.popen3",
                                        "os.popen4",      "popen2.popen2", "popen2.popen3",   "popen2.popen4",
                                        "commands.getoutput", "commands.getstatusoutput"};
const std::set<std::string> kSubprocessCalls{"subprocess.run", "subprocess.call", "subprocess.check_call",
                                             "subprocess.check_output", "subprocess.Popen"};
const std::set<std::string> kSubprocessShellAlways{"subprocess.getoutput", "subprocess.getstatusoutput"};

Finding maybe_escalated(std::string_view rule, const SourceUnit& unit, const Node& call, const Node* arg,
                        const std::string& what) {
    if (arg && interpolated(*arg))
        return make_escalated_finding(rule, unit.span_of(call), what + " with an interpolated command string");
    return make_finding(rule, unit.span_of(call), what);
}

}  // namespace

std::vector<Finding> detect_injection(const SourceUnit& unit) {
    std::vector<Finding> out;
    const py::ImportBindings imports(unit.syntax_root());
    for_each_call(unit, [&](const Node& call) {
        const std::string callee = imports.resolve(*call.child(0));
        if (callee.empty()) return;
        if (kShellCalls.count(callee)) {
            out.push_back(maybe_escalated("SEC-SHELL-INJECTION", unit, call, command_argument(call, {"command", "cmd"}),
                                          "shell command executed through " + callee + "()"));
        } else if (kSubprocessCalls.count(callee)) {
            const Node* shell = py::keyword_argument(call, "shell");
            if (shell && !literal_falsy(*shell))
                out.push_back(maybe_escalated("SEC-SUBPROCESS-SHELL", unit, call, command_argument(call, {"args"}),
                                              callee + "() called with shell enabled"));
        } else if (kSubprocessShellAlways.count(callee)) {
            out.push_back(maybe_escalated("SEC-SUBPROCESS-SHELL", unit, call, command_argument(call, {"cmd"}),
                                          callee + "() always runs its command through the shell"));
        } else if (callee == "eval" || callee == "exec" || callee == "builtins.eval" || callee == "builtins.exec") {
            const Node* arg = command_argument(call, {"source"});
            if (arg && !arg->is_string())
                out.push_back(maybe_escalated("SEC-EVAL-EXEC", unit, call, arg,
                                              callee + "() evaluates non-literal input"));
        }
    });
    return out;
}

namespace {

const std::set<std::string> kPickleCalls{
    "pickle.load",    "pickle.loads",    "pickle.Unpickler",  "cPickle.load",   "cPickle.loads",
    "cPickle.Unpickler", "_pickle.load", "_pickle.loads",     "_pickle.Unpickler", "dill.load",
    "dill.loads",     "shelve.open",     "marshal.load",      "marshal.loads",  "pandas.read_pickle",
    "jsonpickle.decode"};
const std::set<std::string> kSafeYamlLoaders{"SafeLoader", "CSafeLoader", "BaseLoader", "CBaseLoader"};
const std::set<std::string> kXmlCalls{
    "xml.etree.ElementTree.parse",      "xml.etree.ElementTree.fromstring",  "xml.etree.ElementTree.iterparse",
    "xml.etree.ElementTree.XMLParser",  "xml.etree.ElementTree.fromstringlist", "xml.etree.ElementTree.XML",
    "xml.etree.cElementTree.parse",     "xml.etree.cElementTree.fromstring", "xml.etree.cElementTree.iterparse",
    "xml.etree.cElementTree.XMLParser", "xml.etree.cElementTree.XML",        "xml.dom.minidom.parse",
    "xml.dom.minidom.parseString",      "xml.dom.pulldom.parse",             "xml.dom.pulldom.parseString",
    "xml.sax.parse",                    "xml.sax.parseString",               "xml.sax.make_parser",
    "lxml.etree.parse",                 "lxml.etree.fromstring",             "lxml.etree.XML"};

std::string last_component(const std::string& dotted) {
    const auto dot = dotted.rfind('.');
    return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

}  // namespace

std::vector<Finding> detect_unsafe_deserialization(const SourceUnit& unit) {
    std::vector<Finding> out;
    const py::ImportBindings imports(unit.syntax_root());
    for_each_call(unit, [&](const Node& call) {
        const std::string callee = imports.resolve(*call.child(0));
        if (callee.empty()) return;
        if (kPickleCalls.count(callee)) {
            out.push_back(make_finding("SEC-PICKLE", unit.span_of(call),
                                       callee + "() deserializes arbitrary objects"));
        } else if (callee == "yaml.load" || callee == "yaml.load_all") {
            const Node* loader = py::keyword_argument(call, "Loader");
            if (!loader) {
                auto pos = py::positional_arguments(call);
                if (pos.size() >= 2) loader = pos[1];
            }
            const bool safe = loader && kSafeYamlLoaders.count(last_component(py::dotted_name(*loader)));
            if (!safe)
                out.push_back(make_finding("SEC-YAML-LOAD", unit.span_of(call),
                                           callee + "() without a safe Loader can construct arbitrary objects"));
        } else if (callee == "yaml.unsafe_load" || callee == "yaml.unsafe_load_all") {
            out.push_back(make_finding("SEC-YAML-LOAD", unit.span_of(call),
                                       callee + "() constructs arbitrary objects"));
        } else if (kXmlCalls.count(callee)) {
            out.push_back(make_finding("SEC-XML-PARSE", unit.span_of(call),
                                       callee + "() parses XML without entity-expansion protection"));
        }
    });
    return out;
}

namespace {

const std::set<std::string> kWeakHashCalls{
    "hashlib.md5",
    "hashlib.sha1",
    "Crypto.Hash.MD5.new",
    "Crypto.Hash.SHA1.new",
    "Cryptodome.Hash.MD5.new",
    "Cryptodome.Hash.SHA1.new",
    "cryptography.hazmat.primitives.hashes.MD5",
    "cryptography.hazmat.primitives.hashes.SHA1"};
const std::set<std::string> kWeakHashNames{"md5", "sha1", "md4", "md5-sha1"};
const std::set<std::string> kRandomFunctions{"random",  "randint", "randrange", "choice",      "choices",
                                             "sample",  "getrandbits", "uniform", "randbytes", "shuffle",
                                             "rand",    "randn",   "bytes"};

bool is_insecure_random(const std::string& callee) {
    for (std::string_view prefix : {"random.", "numpy.random."}) {
        if (starts_with(callee, prefix)) {
            const std::string rest = callee.substr(prefix.size());
            return rest.find('.') == std::string::npos && kRandomFunctions.count(rest);
        }
    }
    return false;
}

/// Name a value is stored under: a variable, an attribute, or a
/// string-keyed subscript.
std::string target_label(const Node& target) {
    if (target.is(NodeKind::Name)) return target.text;
    if (target.is(NodeKind::Attribute)) return target.text;
    if (target.is(NodeKind::Subscript))
        if (auto key = py::string_literal(*target.child(1))) return *key;
    return {};
}

}  // namespace

std::vector<Finding> detect_weak_crypto(const SourceUnit& unit, const SecretHeuristics& h) {
    std::vector<Finding> out;
    const py::ImportBindings imports(unit.syntax_root());

    for_each_call(unit, [&](const Node& call) {
        const std::string callee = imports.resolve(*call.child(0));
        if (callee.empty()) return;
        bool weak = kWeakHashCalls.count(callee) > 0;
        if (callee == "hashlib.new") {
            const Node* name = command_argument(call, {"name"});
            weak = name && name->is_string() && kWeakHashNames.count(lowercase(name->text));
        }
        if (!weak) return;
        if (const Node* flag = py::keyword_argument(call, "usedforsecurity"); flag && literal_falsy(*flag)) return;
        out.push_back(make_finding("SEC-WEAK-HASH", unit.span_of(call), callee + "() uses a broken hash algorithm"));
    });

    std::set<const Node*> reported;
    auto flag_randoms = [&](const Node& value, const std::string& context) {
        py::walk(value, [&](const Node& n) {
            if (py::opens_scope(n) && !n.is(NodeKind::Lambda)) return false;
            if (n.is(NodeKind::Call) && is_insecure_random(imports.resolve(*n.child(0))) && reported.insert(&n).second)
                out.push_back(make_finding("SEC-INSECURE-RANDOM", unit.span_of(n),
                                           imports.resolve(*n.child(0)) +
                                               "() is not cryptographically secure but produces " + context));
            return true;
        });
    };

    py::walk(unit.syntax_root(), [&](const Node& n) {
        if (n.is(NodeKind::Assign) || n.is(NodeKind::AnnAssign) || n.is(NodeKind::AugAssign)) {
            const Node* value = n.is(NodeKind::AnnAssign) ? n.child(2) : n.children.back().get();
            const std::size_t targets = n.is(NodeKind::Assign) ? n.size() - 1 : 1;
            for (std::size_t i = 0; value && i < targets; ++i) {
                const std::string label = target_label(*n.child(i));
                if (!label.empty() && matches_any_pattern(label, h.name_patterns)) flag_randoms(*value, "'" + label + "'");
            }
        } else if (n.is(NodeKind::Keyword) && !n.text.empty() && matches_any_pattern(n.text, h.name_patterns)) {
            flag_randoms(*n.child(0), "argument '" + n.text + "'");
        } else if (n.is(NodeKind::FunctionDef) && matches_any_pattern(n.text, h.name_patterns)) {
            py::walk_scope(py::function_body(n), [&](const Node& r) {
                if (r.is(NodeKind::Return) && r.child(0)) flag_randoms(*r.child(0), "the result of '" + n.text + "'");
            });
        }
        return true;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Hard-coded secrets

namespace {

// Names that mention a secret but hold metadata about it.
const std::vector<std::string> kNonSecretSuffixes{"url", "uri", "endpoint", "path", "file", "dir", "name",
                                                  "type", "header", "field", "prefix", "env", "var",
                                                  "pattern", "format", "length", "len", "size"};

bool secret_name(std::string_view name, const SecretHeuristics& h) {
    if (!matches_any_pattern(name, h.name_patterns)) return false;
    const std::string lower = lowercase(name);
    for (const auto& suffix : kNonSecretSuffixes) {
        if (lower.size() > suffix.size() && lower.compare(lower.size() - suffix.size(), suffix.size(), suffix) == 0) {
            const char before = lower[lower.size() - suffix.size() - 1];
            if (before == '_' || before == '-' || before == '.') return false;
        }
    }
    return true;
}

bool placeholder(std::string_view value) {
    const std::string lower = lowercase(value);
    const auto first = lower.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return true;
    const std::string v = lower.substr(first, lower.find_last_not_of(" \t\r\n") - first + 1);
    if (v.size() >= 2 && v.front() == '<' && v.back() == '>') return true;
    if (starts_with(v, "${") || starts_with(v, "{{") || starts_with(v, "%(")) return true;
    if (std::all_of(v.begin(), v.end(), [&](char c) { return c == v[0]; }) && (v[0] == '*' || v[0] == 'x' || v[0] == '.'))
        return true;
    static const std::vector<std::string> kWords{"changeme", "change_me", "change-me", "placeholder", "dummy",
                                                 "example", "your_", "your-", "todo", "fixme", "redacted",
                                                 "none", "null"};
    return std::any_of(kWords.begin(), kWords.end(), [&](const std::string& w) {
        return w == "none" || w == "null" ? v == w : v.find(w) != std::string::npos;
    });
}

bool token_like(std::string_view s) {
    bool digit = false, alpha = false;
    for (unsigned char c : s) {
        if (std::isdigit(c)) digit = true;
        else if (std::isalpha(c)) alpha = true;
        else if (c != '+' && c != '/' && c != '=' && c != '_' && c != '-') return false;
    }
    return digit && alpha;
}

bool all_hex(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isxdigit(c); });
}

/// Docstrings and bare string statements: prose, never credentials.
std::set<const Node*> statement_strings(const Node& module) {
    std::set<const Node*> out;
    py::walk(module, [&](const Node& n) {
        if (n.is(NodeKind::ExprStmt) && n.child(0)->is_string()) out.insert(n.child(0));
        return true;
    });
    return out;
}

}  // namespace

std::vector<Finding> detect_hardcoded_secrets(const SourceUnit& unit, const SecretHeuristics& h) {
    std::vector<Finding> out;
    std::set<const Node*> reported;
    auto report = [&](const Node& literal, const std::string& why) {
        if (reported.insert(&literal).second)
            out.push_back(make_finding("SEC-HARDCODED-SECRET", unit.span_of(literal), why));
    };
    auto named = [&](const std::string& name, const Node* value) {
        if (value && value->is_string() && !placeholder(value->text) && secret_name(name, h))
            report(*value, "string literal assigned to secret-like name '" + name + "'");
    };

    py::walk(unit.syntax_root(), [&](const Node& n) {
        switch (n.kind) {
            case NodeKind::Assign:
                for (std::size_t i = 0; i + 1 < n.size(); ++i) named(target_label(*n.child(i)), n.children.back().get());
                break;
            case NodeKind::AnnAssign: named(target_label(*n.child(0)), n.child(2)); break;
            case NodeKind::Keyword: named(n.text, n.child(0)); break;
            case NodeKind::DictEntry:
                if (n.child(0))
                    if (auto key = py::string_literal(*n.child(0))) named(*key, n.child(1));
                break;
            case NodeKind::Param: named(n.text, n.child(1)); break;
            case NodeKind::Compare:
                if (n.size() == 2 && (n.text == "==" || n.text == "!=")) {
                    named(target_label(*n.child(0)), n.child(1));
                    named(target_label(*n.child(1)), n.child(0));
                }
                break;
            default: break;
        }
        return true;
    });

    // Entropy path: credential-shaped literals only. A pure-hex literal
    // carries at most 4 bits per character, so its bound is scaled from the
    // base64-sized default (6 bits) by 4/6.
    const std::set<const Node*> prose = statement_strings(unit.syntax_root());
    py::walk(unit.syntax_root(), [&](const Node& n) {
        if (n.is(NodeKind::JoinedStr)) return false;
        if (!n.is_string() || prose.count(&n)) return true;
        const std::string& s = n.text;
        if (static_cast<int>(s.size()) < h.min_literal_length || !token_like(s) || placeholder(s)) return true;
        const double bound = all_hex(s) ? h.min_entropy_bits_per_char * 4.0 / 6.0 : h.min_entropy_bits_per_char;
        const double bits = shannon_entropy(s);
        if (bits >= bound) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", bits);
            report(n, std::string("high-entropy string literal (") + buf + " bits per character)");
        }
        return true;
    });
    return out;
}

}  // namespace codequal
