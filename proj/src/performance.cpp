#include <map>
#include <set>
#include <stdexcept>

#include "analyzer_util.hpp"
#include "codequal/analyzers.hpp"

namespace codequal {

using namespace detail;

void PerformanceThresholds::validate() const {
    for (int v : {max_class_attributes, max_nesting_containers, max_dict_literal_entries})
        if (v <= 0) throw std::invalid_argument("performance thresholds must be positive");
}

namespace {

bool is_call_to(const Node& e, std::string_view name) {
    return e.is(NodeKind::Call) && e.child(0)->is(NodeKind::Name) && e.child(0)->text == name;
}

/// Names a scope initializes from a string literal, an f-string or str(...).
std::set<std::string> string_typed_names(const Node& body) {
    std::set<std::string> out;
    py::walk_scope(body, [&](const Node& n) {
        const Node* value = nullptr;
        std::vector<const Node*> targets;
        if (n.is(NodeKind::Assign)) {
            value = n.children.back().get();
            for (std::size_t i = 0; i + 1 < n.size(); ++i) targets.push_back(n.child(i));
        } else if (n.is(NodeKind::AnnAssign) && n.child(2)) {
            value = n.child(2);
            targets.push_back(n.child(0));
        }
        if (!value || !(value->is_string() || value->is(NodeKind::JoinedStr) || is_call_to(*value, "str"))) return;
        for (const Node* t : targets)
            if (t->is(NodeKind::Name)) out.insert(t->text);
    });
    return out;
}

/// Names a scope initializes from a list display, list comprehension or list(...).
std::set<std::string> list_typed_names(const Node& body) {
    std::set<std::string> out;
    py::walk_scope(body, [&](const Node& n) {
        if (!n.is(NodeKind::Assign)) return;
        const Node& value = *n.children.back();
        if (!(value.is(NodeKind::List) || value.is(NodeKind::ListComp) || is_call_to(value, "list"))) return;
        for (std::size_t i = 0; i + 1 < n.size(); ++i)
            if (n.child(i)->is(NodeKind::Name)) out.insert(n.child(i)->text);
    });
    return out;
}

/// The accumulated name of `name += e` or `name = name + e`, else empty.
const Node* accumulation_target(const Node& stmt) {
    if (stmt.is(NodeKind::AugAssign) && stmt.text == "+=" && stmt.child(0)->is(NodeKind::Name)) return stmt.child(0);
    if (stmt.is(NodeKind::Assign) && stmt.size() == 2 && stmt.child(0)->is(NodeKind::Name)) {
        const Node& v = *stmt.child(1);
        if (v.is(NodeKind::BinOp) && v.text == "+" && v.child(0)->is(NodeKind::Name) &&
            v.child(0)->text == stmt.child(0)->text)
            return stmt.child(0);
    }
    return nullptr;
}

bool is_list_operand(const Node& e, const std::set<std::string>& lists) {
    return e.is(NodeKind::List) || e.is(NodeKind::ListComp) || is_call_to(e, "list") ||
           (e.is(NodeKind::Name) && lists.count(e.text));
}

}  // namespace

std::vector<Finding> detect_string_concat_in_loops(const SourceUnit& unit) {
    std::vector<Finding> out;
    for (const Scope& scope : code_scopes(unit)) {
        const std::set<std::string> strings = string_typed_names(*scope.body);
        if (strings.empty()) continue;
        for (const Node* loop : loops_in_scope(*scope.body)) {
            std::set<std::string> flagged;
            walk_loop_body(*loop, [&](const Node& n) {
                const Node* target = accumulation_target(n);
                if (!target || !strings.count(target->text) || !flagged.insert(target->text).second) return;
                out.push_back(make_finding("PERF-STRING-CONCAT-LOOP", unit.span_of(n),
                                           "string '" + target->text +
                                               "' is rebuilt by concatenation on every iteration; collect parts and "
                                               "join once"));
            });
        }
    }
    return out;
}

namespace {

const std::set<std::string> kOpenCalls{"open",      "io.open",   "codecs.open", "os.open", "os.fdopen",
                                       "gzip.open", "bz2.open",  "lzma.open",   "tarfile.open", "zipfile.ZipFile",
                                       "sqlite3.connect"};
// Final call-name components that establish a network connection or send a request.
const std::set<std::string> kNetworkCallNames{"urlopen", "urlretrieve", "create_connection", "connect",
                                              "HTTPConnection", "HTTPSConnection", "getaddrinfo"};
const std::set<std::string> kNetworkModules{"requests", "httpx", "urllib3", "aiohttp", "socket", "ftplib",
                                            "smtplib", "telnetlib", "paramiko"};
const std::set<std::string> kRequestVerbs{"get", "post", "put", "patch", "delete", "head", "options", "request",
                                          "socket", "FTP", "SMTP", "SMTP_SSL", "Telnet", "PoolManager",
                                          "SSHClient", "ClientSession"};

std::string tail(const std::string& dotted) {
    const auto dot = dotted.rfind('.');
    return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

std::string head(const std::string& dotted) { return dotted.substr(0, dotted.find('.')); }

/// Describes an I/O call, or returns empty for anything else.
std::string io_kind(const std::string& callee, const Node& func) {
    if (kOpenCalls.count(callee)) return "file open";
    if (func.is(NodeKind::Attribute) && func.text == "open" && func.child(0)->is(NodeKind::Call) &&
        py::dotted_name(*func.child(0)->child(0)).ends_with("Path"))
        return "file open";
    if (callee.empty()) return {};
    if (kNetworkCallNames.count(tail(callee))) return "network call";
    if (kNetworkModules.count(head(callee)) && kRequestVerbs.count(tail(callee))) return "network call";
    return {};
}

/// Names a loop body may rebind or mutate.
std::set<std::string> loop_modified(const Node& loop) {
    std::set<std::string> out = possibly_modified_names(*loop_body(loop));
    if (loop.is(NodeKind::For)) {
        std::vector<const Node*> names;
        collect_target_names(*loop.child(0), names);
        for (const Node* n : names) out.insert(n->text);
    }
    return out;
}

/// Names a call reads: argument names and the receiver of a method callee.
std::set<std::string> call_inputs(const Node& call) {
    std::set<std::string> out;
    const Node& func = *call.child(0);
    if (func.is(NodeKind::Attribute)) {
        const std::string base = py::base_name(func);
        if (!base.empty()) out.insert(base);
    }
    for (std::size_t i = 1; i < call.size(); ++i)
        py::walk(*call.child(i), [&](const Node& n) {
            if (n.is(NodeKind::Call) && n.child(0)->is(NodeKind::Name)) {
                for (std::size_t j = 1; j < n.size(); ++j)
                    py::walk(*n.child(j), [&](const Node& m) {
                        if (m.is(NodeKind::Name)) out.insert(m.text);
                        return !py::opens_scope(m);
                    });
                return false;
            }
            if (n.is(NodeKind::Name)) out.insert(n.text);
            return !py::opens_scope(n);
        });
    return out;
}

bool has_positional_or_keyword_args(const Node& call) { return call.size() > 1; }

}  // namespace

std::vector<Finding> detect_loop_resource_issues(const SourceUnit& unit) {
    std::vector<Finding> out;
    const py::ImportBindings imports(unit.syntax_root());
    for (const Scope& scope : code_scopes(unit)) {
        const std::set<std::string> lists = list_typed_names(*scope.body);
        for (const Node* loop : loops_in_scope(*scope.body)) {
            std::set<std::string> grown;
            walk_loop_body(*loop, [&](const Node& n) {
                if (n.is(NodeKind::Call)) {
                    const std::string kind = io_kind(imports.resolve(*n.child(0)), *n.child(0));
                    if (!kind.empty())
                        out.push_back(make_finding("PERF-IO-IN-LOOP", unit.span_of(n),
                                                   kind + " inside a loop body; hoist it or batch the work"));
                }
                if (n.is(NodeKind::Assign) && n.size() == 2 && n.child(0)->is(NodeKind::Name)) {
                    const std::string& name = n.child(0)->text;
                    const Node& v = *n.child(1);
                    if (v.is(NodeKind::BinOp) && v.text == "+") {
                        const Node& l = *v.child(0);
                        const Node& r = *v.child(1);
                        const bool self_left = l.is(NodeKind::Name) && l.text == name;
                        const bool self_right = r.is(NodeKind::Name) && r.text == name;
                        const bool list_growth = (self_left && (is_list_operand(r, lists) || lists.count(name))) ||
                                                 (self_right && is_list_operand(l, lists));
                        if (list_growth && grown.insert(name).second)
                            out.push_back(make_finding("PERF-LIST-CONCAT-LOOP", unit.span_of(n),
                                                       "list '" + name +
                                                           "' is copied by concatenation on every iteration; use "
                                                           "append or extend"));
                    }
                }
            });

            if (!loop->is(NodeKind::While)) continue;
            const std::set<std::string> modified = loop_modified(*loop);
            const Node* invariant = nullptr;
            py::walk(*loop->child(0), [&](const Node& n) {
                if (invariant || py::opens_scope(n)) return false;
                if (n.is(NodeKind::Call) && has_positional_or_keyword_args(n)) {
                    const std::set<std::string> inputs = call_inputs(n);
                    const bool stable = !inputs.empty() && std::none_of(inputs.begin(), inputs.end(), [&](const auto& x) {
                        return modified.count(x) > 0;
                    });
                    if (stable) {
                        invariant = &n;
                        return false;
                    }
                }
                return true;
            });
            if (invariant)
                out.push_back(make_finding("PERF-LOOP-INVARIANT-CALL", unit.span_of(*invariant),
                                           "loop condition recomputes a call whose inputs never change in the loop"));
        }
    }
    return out;
}

namespace {

bool is_container_literal(const Node& n) {
    return n.is(NodeKind::List) || n.is(NodeKind::Tuple) || n.is(NodeKind::Set) || n.is(NodeKind::Dict);
}

int literal_depth(const Node& n) {
    if (!is_container_literal(n)) return 0;
    int deepest = 0;
    for (const auto& c : n.children) {
        if (!c) continue;
        if (c->is(NodeKind::DictEntry)) {
            for (const auto& kv : c->children)
                if (kv) deepest = std::max(deepest, literal_depth(*kv));
        } else {
            deepest = std::max(deepest, literal_depth(*c));
        }
    }
    return deepest + 1;
}

bool is_store_target(const Node& n) { return n.ctx != py::ExprContext::Load; }

}  // namespace

std::vector<Finding> detect_data_structure_issues(const SourceUnit& unit, const PerformanceThresholds& th) {
    std::vector<Finding> out;

    for (const auto& cls : unit.class_index()) {
        std::set<std::string> attrs;
        for (const auto& stmt : py::class_body(*cls.node).children) {
            std::vector<const Node*> names;
            if (stmt->is(NodeKind::Assign))
                for (std::size_t i = 0; i + 1 < stmt->size(); ++i) collect_target_names(*stmt->child(i), names);
            else if (stmt->is(NodeKind::AnnAssign))
                collect_target_names(*stmt->child(0), names);
            for (const Node* n : names)
                if (!is_dunder(n->text)) attrs.insert(n->text);
        }
        py::walk_scope(py::class_body(*cls.node), [&](const Node& m) {
            if (!m.is(NodeKind::FunctionDef) || py::function_args(m).children.empty()) return;
            const std::string& self = py::function_args(m).child(0)->text;
            py::walk_scope(py::function_body(m), [&](const Node& n) {
                if (n.is(NodeKind::Attribute) && is_store_target(n) && n.child(0)->is(NodeKind::Name) &&
                    n.child(0)->text == self)
                    attrs.insert(n.text);
            });
        });
        if (static_cast<int>(attrs.size()) > th.max_class_attributes)
            out.push_back(make_finding("PERF-TOO-MANY-CLASS-ATTRS", cls.span,
                                       "class '" + cls.qualified_name + "' defines " + std::to_string(attrs.size()) +
                                           " attributes (limit " + std::to_string(th.max_class_attributes) + ")"));
    }

    py::walk(unit.syntax_root(), [&](const Node& n) {
        if (!is_container_literal(n)) return true;
        if (n.is(NodeKind::Dict) && static_cast<int>(n.size()) > th.max_dict_literal_entries)
            out.push_back(make_finding("PERF-LARGE-DICT", unit.span_of(n),
                                       "dictionary literal has " + std::to_string(n.size()) + " entries (limit " +
                                           std::to_string(th.max_dict_literal_entries) + ")"));
        const int depth = literal_depth(n);
        if (depth > th.max_nesting_containers) {
            out.push_back(make_finding("PERF-DEEP-NESTED-LITERAL", unit.span_of(n),
                                       "container literal nests " + std::to_string(depth) + " levels (limit " +
                                           std::to_string(th.max_nesting_containers) + ")"));
            // Only the outermost literal of a deep structure is reported,
            // but large dictionaries inside it still are.
            py::walk(n, [&](const Node& inner) {
                if (&inner != &n && inner.is(NodeKind::Dict) &&
                    static_cast<int>(inner.size()) > th.max_dict_literal_entries)
                    out.push_back(make_finding("PERF-LARGE-DICT", unit.span_of(inner),
                                               "dictionary literal has " + std::to_string(inner.size()) +
                                                   " entries (limit " + std::to_string(th.max_dict_literal_entries) +
                                                   ")"));
                return true;
            });
            return false;
        }
        return true;
    });
    return out;
}

}  // namespace codequal
