#include <map>
#include <regex>
#include <set>
#include <stdexcept>

#include "analyzer_util.hpp"
#include "codequal/analyzers.hpp"

namespace codequal {

using namespace detail;

void MaintainabilityThresholds::validate() const {
    for (int v : {cyclomatic_medium, cyclomatic_high, max_parameters, max_instance_attributes, max_file_loc,
                  max_branches, max_returns, max_nesting_depth})
        if (v <= 0) throw std::invalid_argument("maintainability thresholds must be positive");
    if (cyclomatic_medium >= cyclomatic_high)
        throw std::invalid_argument("cyclomatic_medium must be below cyclomatic_high");
}

namespace {

int decision_points(const Node& n) {
    switch (n.kind) {
        case NodeKind::FunctionDef:
        case NodeKind::ClassDef:
            return 0;
        default:
            break;
    }
    int count = 0;
    switch (n.kind) {
        case NodeKind::If:
        case NodeKind::For:
        case NodeKind::While:
        case NodeKind::IfExp:
        case NodeKind::ExceptHandler:
        case NodeKind::MatchCase:
            count = 1;
            break;
        case NodeKind::BoolOp: count = static_cast<int>(n.size()) - 1; break;
        case NodeKind::Comprehension: count = static_cast<int>(n.size()) - 2; break;
        default: break;
    }
    for (const auto& c : n.children)
        if (c) count += decision_points(*c);
    return count;
}

Span whole_file_span(const SourceUnit& unit) {
    Span s;
    s.file_label = unit.file_label();
    s.start_line = 1;
    s.start_col = 0;
    s.end_line = std::max(1, unit.line_count());
    s.end_col = static_cast<int>(unit.line_text(s.end_line).size());
    return s;
}

std::vector<const Node*> methods_of(const Node& cls) {
    std::vector<const Node*> out;
    py::walk_scope(py::class_body(cls), [&](const Node& n) {
        if (n.is(NodeKind::FunctionDef)) out.push_back(&n);
    });
    return out;
}

}  // namespace

int cyclomatic_complexity(const py::Node& function_def) {
    return 1 + decision_points(py::function_body(function_def));
}

int cyclomatic_complexity(const FunctionInfo& fn) { return cyclomatic_complexity(*fn.node); }

std::vector<Finding> detect_complexity_issues(const SourceUnit& unit, const MaintainabilityThresholds& th) {
    std::vector<Finding> out;
    for (const auto& fn : unit.function_index()) {
        const int cc = cyclomatic_complexity(fn);
        const std::string msg = "function '" + fn.qualified_name + "' has cyclomatic complexity " + std::to_string(cc);
        if (cc > th.cyclomatic_high)
            out.push_back(make_escalated_finding("MAINT-CYCLOMATIC", fn.span, msg + " (limit " +
                                                     std::to_string(th.cyclomatic_high) + ")"));
        else if (cc > th.cyclomatic_medium)
            out.push_back(make_finding("MAINT-CYCLOMATIC", fn.span, msg + " (limit " +
                                           std::to_string(th.cyclomatic_medium) + ")"));
    }
    for (const auto& cls : unit.class_index()) {
        int worst = 0;
        std::string worst_name;
        for (const Node* m : methods_of(*cls.node)) {
            const int cc = cyclomatic_complexity(*m);
            if (cc > worst) worst = cc, worst_name = m->text;
        }
        if (worst > th.cyclomatic_high)
            out.push_back(make_finding("MAINT-CLASS-COMPLEXITY", cls.span,
                                       "class '" + cls.qualified_name + "' has method '" + worst_name +
                                           "' with cyclomatic complexity " + std::to_string(worst)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dead code

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

/// Names of the `__all__` export list, when it is a literal sequence.
std::set<std::string> export_list(const Node& module) {
    std::set<std::string> out;
    for (const auto& stmt : module.children) {
        const Node* value = nullptr;
        if (stmt->is(NodeKind::Assign) || stmt->is(NodeKind::AugAssign) || stmt->is(NodeKind::AnnAssign)) {
            const Node* target = stmt->child(0);
            if (target->is(NodeKind::Name) && target->text == "__all__")
                value = stmt->is(NodeKind::AnnAssign) ? stmt->child(2) : stmt->children.back().get();
        }
        if (value && (value->is(NodeKind::List) || value->is(NodeKind::Tuple)))
            for (const auto& e : value->children)
                if (auto s = py::string_literal(*e)) out.insert(*s);
    }
    return out;
}

/// Every name the subtree reads: loads, del targets, augmented targets,
/// attribute names and identifier-shaped string constants (forward references).
std::set<std::string> referenced_names(const Node& root) {
    std::set<std::string> out;
    py::walk(root, [&](const Node& n) {
        if (n.is(NodeKind::Name) && n.ctx != py::ExprContext::Store) out.insert(n.text);
        if (n.is(NodeKind::AugAssign) && n.child(0)->is(NodeKind::Name)) out.insert(n.child(0)->text);
        if (n.is(NodeKind::Attribute)) out.insert(n.text);
        if (n.is_string() && n.text.size() <= 200) {
            std::string_view s = n.text;
            std::size_t start = 0;
            while (start <= s.size()) {
                const std::size_t dot = s.find('.', start);
                const std::string_view part = s.substr(start, dot == std::string_view::npos ? s.npos : dot - start);
                if (is_identifier(part)) out.insert(std::string(part));
                else break;
                if (dot == std::string_view::npos) break;
                start = dot + 1;
            }
        }
        return true;
    });
    return out;
}

bool dynamic_locals(const Node& body) {
    bool found = false;
    py::walk(body, [&](const Node& n) {
        if (n.is(NodeKind::Call) && n.child(0)->is(NodeKind::Name)) {
            const std::string& f = n.child(0)->text;
            if (f == "locals" || f == "vars" || f == "eval" || f == "exec") found = true;
        }
        return !found;
    });
    return found;
}

/// Simple-name targets of Assign and valued AnnAssign statements of one scope.
std::vector<const Node*> assigned_names(const Node& body) {
    std::vector<const Node*> out;
    py::walk_scope(body, [&](const Node& n) {
        if (n.is(NodeKind::Assign)) {
            for (std::size_t i = 0; i + 1 < n.size(); ++i)
                if (n.child(i)->is(NodeKind::Name)) out.push_back(n.child(i));
        } else if (n.is(NodeKind::AnnAssign) && n.child(2) && n.child(0)->is(NodeKind::Name)) {
            out.push_back(n.child(0));
        }
    });
    return out;
}

std::set<std::string> declared_nonlocal(const Node& body) {
    std::set<std::string> out;
    py::walk(body, [&](const Node& n) {
        if (n.is(NodeKind::Global) || n.is(NodeKind::Nonlocal))
            for (const auto& c : n.children) out.insert(c->text);
        return true;
    });
    return out;
}

bool exempt_name(std::string_view name) { return name.empty() || name[0] == '_'; }

}  // namespace

std::vector<Finding> detect_dead_code(const SourceUnit& unit) {
    std::vector<Finding> out;
    const Node& module = unit.syntax_root();
    const std::set<std::string> refs = referenced_names(module);
    const std::set<std::string> exported = export_list(module);
    const bool package_init = unit.file_label().size() >= 11 &&
                              unit.file_label().substr(unit.file_label().size() - 11) == "__init__.py";
    auto used = [&](const std::string& name) { return refs.count(name) || exported.count(name); };

    py::walk(module, [&](const Node& n) {
        if (n.is(NodeKind::Import) || n.is(NodeKind::ImportFrom)) {
            if (package_init || (n.is(NodeKind::ImportFrom) && n.text == "__future__")) return false;
            for (const auto& alias : n.children) {
                if (alias->text == "*") continue;
                std::string local = alias->text2;
                if (local.empty())
                    local = n.is(NodeKind::Import) ? alias->text.substr(0, alias->text.find('.')) : alias->text;
                if (exempt_name(local) || used(local)) continue;
                out.push_back(make_finding("MAINT-UNUSED-IMPORT", unit.span_of(*alias),
                                           "'" + local + "' is imported but never used"));
            }
        }
        return true;
    });

    for (const auto& fn : unit.function_index()) {
        if (fn.is_method || fn.is_decorated || exempt_name(fn.name) || used(fn.name)) continue;
        out.push_back(make_finding("MAINT-UNUSED-FUNCTION", fn.span,
                                   "function '" + fn.qualified_name + "' is never referenced"));
    }
    for (const auto& cls : unit.class_index()) {
        if (cls.is_decorated || exempt_name(cls.name) || used(cls.name)) continue;
        out.push_back(make_finding("MAINT-UNUSED-CLASS", cls.span,
                                   "class '" + cls.qualified_name + "' is never referenced"));
    }

    std::set<std::string> reported;
    for (const Node* target : assigned_names(module)) {
        const std::string& name = target->text;
        if (exempt_name(name) || used(name) || !reported.insert(name).second) continue;
        out.push_back(make_finding("MAINT-UNUSED-VARIABLE", unit.span_of(*target),
                                   "module variable '" + name + "' is assigned but never read"));
    }

    for (const auto& fn : unit.function_index()) {
        const Node& body = py::function_body(*fn.node);
        if (dynamic_locals(body)) continue;
        const std::set<std::string> local_refs = referenced_names(body);
        const std::set<std::string> declared = declared_nonlocal(body);
        std::set<std::string> seen;
        for (const Node* target : assigned_names(body)) {
            const std::string& name = target->text;
            if (exempt_name(name) || local_refs.count(name) || declared.count(name) || !seen.insert(name).second)
                continue;
            out.push_back(make_finding("MAINT-UNUSED-VARIABLE", unit.span_of(*target),
                                       "local variable '" + name + "' in '" + fn.qualified_name +
                                           "' is assigned but never read"));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Structure

namespace {

bool is_receiver_name(std::string_view name) {
    return name == "self" || name == "cls" || name == "mcs" || name == "metacls";
}

int named_parameter_count(const FunctionInfo& fn) {
    int count = 0;
    bool first = true;
    for (const auto& p : py::function_args(*fn.node).children) {
        const bool variadic = p->param_kind == py::ParamKind::VarArgs || p->param_kind == py::ParamKind::VarKeywords;
        if (first && fn.is_method && !variadic && is_receiver_name(p->text)) {
            first = false;
            continue;
        }
        first = false;
        if (!variadic) ++count;
    }
    return count;
}

int branch_count(const Node& body) {
    int branches = 0;
    py::walk_scope(body, [&](const Node& n) {
        switch (n.kind) {
            case NodeKind::If: {
                ++branches;
                const Node* orelse = n.child(2);
                const bool elif = orelse && orelse->size() == 1 && orelse->child(0)->is(NodeKind::If) &&
                                  orelse->child(0)->flag;
                if (orelse && !elif) ++branches;
                break;
            }
            case NodeKind::For:
            case NodeKind::While:
                ++branches;
                if (n.child(n.is(NodeKind::For) ? 3 : 2)) ++branches;
                break;
            case NodeKind::Try:
                branches += static_cast<int>(n.child(1)->size());
                if (n.child(2)) ++branches;
                break;
            case NodeKind::MatchCase: ++branches; break;
            default: break;
        }
    });
    return branches;
}

int return_count(const Node& body) {
    int returns = 0;
    py::walk_scope(body, [&](const Node& n) {
        if (n.is(NodeKind::Return)) ++returns;
    });
    return returns;
}

/// Deepest block nesting of a statement list and the statement that first
/// reaches it. An elif continues its if rather than nesting inside it.
struct Depth {
    int depth = 0;
    const Node* at = nullptr;
};

void block_depth(const Node* block, int depth, Depth& best);

void statement_depth(const Node& stmt, int depth, Depth& best) {
    auto nest = [&](const Node* block) { block_depth(block, depth + 1, best); };
    auto reach = [&] {
        if (depth + 1 > best.depth) best = {depth + 1, &stmt};
    };
    switch (stmt.kind) {
        case NodeKind::If: {
            reach();
            nest(stmt.child(1));
            const Node* orelse = stmt.child(2);
            if (orelse && orelse->size() == 1 && orelse->child(0)->is(NodeKind::If) && orelse->child(0)->flag)
                statement_depth(*orelse->child(0), depth, best);
            else
                nest(orelse);
            break;
        }
        case NodeKind::For:
        case NodeKind::While:
        case NodeKind::With:
        case NodeKind::Try:
            reach();
            for (const auto& c : stmt.children) {
                if (!c) continue;
                if (c->is(NodeKind::Block)) {
                    // Try handlers arrive as a Block of ExceptHandler nodes.
                    if (!c->children.empty() && c->child(0)->is(NodeKind::ExceptHandler))
                        for (const auto& h : c->children) nest(h->child(1));
                    else
                        nest(c.get());
                }
            }
            break;
        case NodeKind::Match:
            reach();
            for (std::size_t i = 1; i < stmt.size(); ++i) nest(stmt.child(i)->child(2));
            break;
        default:
            break;
    }
}

void block_depth(const Node* block, int depth, Depth& best) {
    if (!block) return;
    for (const auto& s : block->children) statement_depth(*s, depth, best);
}

}  // namespace

std::vector<Finding> detect_structure_issues(const SourceUnit& unit, const MaintainabilityThresholds& th) {
    std::vector<Finding> out;
    for (const auto& fn : unit.function_index()) {
        const int params = named_parameter_count(fn);
        if (params > th.max_parameters)
            out.push_back(make_finding("MAINT-TOO-MANY-PARAMS", fn.span,
                                       "function '" + fn.qualified_name + "' takes " + std::to_string(params) +
                                           " parameters (limit " + std::to_string(th.max_parameters) + ")"));
        const Node& body = py::function_body(*fn.node);
        const int branches = branch_count(body);
        if (branches > th.max_branches)
            out.push_back(make_finding("MAINT-TOO-MANY-BRANCHES", fn.span,
                                       "function '" + fn.qualified_name + "' has " + std::to_string(branches) +
                                           " branches (limit " + std::to_string(th.max_branches) + ")"));
        const int returns = return_count(body);
        if (returns > th.max_returns)
            out.push_back(make_finding("MAINT-TOO-MANY-RETURNS", fn.span,
                                       "function '" + fn.qualified_name + "' has " + std::to_string(returns) +
                                           " return statements (limit " + std::to_string(th.max_returns) + ")"));
    }

    for (const Scope& scope : code_scopes(unit)) {
        Depth best;
        block_depth(scope.body, 0, best);
        if (best.depth > th.max_nesting_depth) {
            const std::string where = scope.owner ? "function '" + scope.owner->text + "'" : "module scope";
            out.push_back(make_finding("MAINT-DEEP-NESTING", unit.span_of(*best.at),
                                       where + " nests blocks " + std::to_string(best.depth) + " deep (limit " +
                                           std::to_string(th.max_nesting_depth) + ")"));
        }
    }

    for (const auto& cls : unit.class_index()) {
        std::set<std::string> attrs;
        for (const Node* m : methods_of(*cls.node)) {
            const Node& args = py::function_args(*m);
            if (args.children.empty()) continue;
            const Node& first = *args.child(0);
            if (first.param_kind != py::ParamKind::PositionalOnly && first.param_kind != py::ParamKind::Normal)
                continue;
            py::walk_scope(py::function_body(*m), [&](const Node& n) {
                if (n.is(NodeKind::Attribute) && n.ctx == py::ExprContext::Store && n.child(0)->is(NodeKind::Name) &&
                    n.child(0)->text == first.text)
                    attrs.insert(n.text);
            });
        }
        if (static_cast<int>(attrs.size()) > th.max_instance_attributes)
            out.push_back(make_finding("MAINT-TOO-MANY-INSTANCE-ATTRS", cls.span,
                                       "class '" + cls.qualified_name + "' assigns " + std::to_string(attrs.size()) +
                                           " instance attributes (limit " +
                                           std::to_string(th.max_instance_attributes) + ")"));
    }

    if (unit.line_count() > th.max_file_loc)
        out.push_back(make_finding("MAINT-LARGE-FILE", whole_file_span(unit),
                                   "file has " + std::to_string(unit.line_count()) + " lines (limit " +
                                       std::to_string(th.max_file_loc) + ")"));
    return out;
}

// ---------------------------------------------------------------------------
// Style

namespace {

const std::regex kSnake{"_*[a-z][a-z0-9_]*"};
const std::regex kUpper{"_*[A-Z][A-Z0-9_]*"};
const std::regex kCapWords{"_*[A-Z][A-Za-z0-9]*"};

// Framework hooks whose camelCase names are imposed from outside.
const std::set<std::string> kHookNames{"setUp", "tearDown", "setUpClass", "tearDownClass", "setUpModule",
                                       "tearDownModule", "asyncSetUp", "asyncTearDown", "addCleanup"};

bool snake(const std::string& s) { return std::regex_match(s, kSnake); }

bool function_name_ok(const std::string& name) {
    return is_dunder(name) || snake(name) || kHookNames.count(name) || starts_with(name, "visit_") ||
           starts_with(name, "depart_");
}

struct NameBinding {
    const Node* node;
    bool loop_target;
};

/// Names bound in one scope by assignment, for-loop and with-item targets.
std::vector<NameBinding> scope_bindings(const Node& body) {
    std::vector<NameBinding> out;
    py::walk_scope(body, [&](const Node& n) {
        std::vector<const Node*> names;
        bool loop = false;
        if (n.is(NodeKind::Assign)) {
            for (std::size_t i = 0; i + 1 < n.size(); ++i) collect_target_names(*n.child(i), names);
        } else if (n.is(NodeKind::AnnAssign)) {
            collect_target_names(*n.child(0), names);
        } else if (n.is(NodeKind::For) || n.is(NodeKind::Comprehension)) {
            collect_target_names(*n.child(0), names);
            loop = true;
        } else if (n.is(NodeKind::WithItem) && n.child(1)) {
            collect_target_names(*n.child(1), names);
        }
        for (const Node* name : names) out.push_back({name, loop});
    });
    return out;
}

}  // namespace

std::vector<Finding> detect_style_issues(const SourceUnit& unit, const MaintainabilityThresholds& th) {
    std::vector<Finding> out;
    const Node& module = unit.syntax_root();

    if (th.require_module_docstring && unit.line_count() > 0) {
        const bool documented = !module.children.empty() && module.child(0)->is(NodeKind::ExprStmt) &&
                                module.child(0)->child(0)->is_string();
        if (!documented) {
            Span s;
            s.file_label = unit.file_label();
            s.end_col = static_cast<int>(unit.line_text(1).size());
            out.push_back(make_finding("MAINT-MISSING-MODULE-DOCSTRING", s, "module has no docstring"));
        }
    }

    for (const auto& fn : unit.function_index()) {
        if (!fn.is_nested && !fn.has_docstring && !fn.name.starts_with('_'))
            out.push_back(make_finding("MAINT-MISSING-DOCSTRING", fn.span,
                                       "public function '" + fn.qualified_name + "' has no docstring"));
        if (!function_name_ok(fn.name))
            out.push_back(make_finding("MAINT-NAMING", fn.span,
                                       "function name '" + fn.name + "' is not lower_snake_case"));
    }
    for (const auto& cls : unit.class_index()) {
        if (!cls.is_nested && !cls.has_docstring && !cls.name.starts_with('_'))
            out.push_back(make_finding("MAINT-MISSING-DOCSTRING", cls.span,
                                       "public class '" + cls.qualified_name + "' has no docstring"));
        if (!std::regex_match(cls.name, kCapWords))
            out.push_back(make_finding("MAINT-NAMING", cls.span, "class name '" + cls.name + "' is not CapWords"));
    }

    auto check_scope = [&](const Node& body, bool module_level) {
        std::set<std::string> seen;
        for (const auto& [node, loop_target] : scope_bindings(body)) {
            const std::string& name = node->text;
            if (!seen.insert(name).second) continue;
            if (is_dunder(name) || (loop_target && name.size() == 1)) continue;
            const bool ok = snake(name) || (module_level && (std::regex_match(name, kUpper) ||
                                                             std::regex_match(name, kCapWords)));
            if (!ok)
                out.push_back(make_finding("MAINT-NAMING", unit.span_of(*node),
                                           "variable name '" + name + "' does not follow naming conventions"));
        }
    };
    check_scope(module, true);
    for (const auto& cls : unit.class_index()) check_scope(py::class_body(*cls.node), true);
    for (const auto& fn : unit.function_index()) check_scope(py::function_body(*fn.node), false);
    return out;
}

}  // namespace codequal
