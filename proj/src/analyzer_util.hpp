#pragma once

// Helpers shared by the analyzer families. Internal to the library.

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "codequal/ast_query.hpp"
#include "codequal/source.hpp"

namespace codequal::detail {

using py::Node;
using py::NodeKind;

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

inline bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

inline bool is_dunder(std::string_view name) {
    return name.size() > 4 && starts_with(name, "__") && name.substr(name.size() - 2) == "__";
}

/// A scope body paired with the node that owns it (nullptr for the module).
struct Scope {
    const Node* owner;
    const Node* body;
};

/// The module scope followed by every function body, in index order.
inline std::vector<Scope> code_scopes(const SourceUnit& unit) {
    std::vector<Scope> out{{nullptr, &unit.syntax_root()}};
    for (const auto& fn : unit.function_index()) out.push_back({fn.node, &py::function_body(*fn.node)});
    return out;
}

/// Names bound by an assignment target: plain names and names inside tuple or
/// list unpacking, including starred ones.
inline void collect_target_names(const Node& target, std::vector<const Node*>& out) {
    switch (target.kind) {
        case NodeKind::Name: out.push_back(&target); break;
        case NodeKind::Tuple:
        case NodeKind::List:
            for (const auto& c : target.children) collect_target_names(*c, out);
            break;
        case NodeKind::Starred: collect_target_names(*target.child(0), out); break;
        default: break;
    }
}

/// Loop bodies and for-else clauses belong to their loop; a While or For node
/// found by this walk is the innermost loop of every statement inside it
/// until the next nested loop.
inline const Node* loop_body(const Node& loop) {
    return loop.is(NodeKind::For) ? loop.child(2) : loop.child(1);
}

/// Visits every statement-or-expression in `loop`'s body whose innermost
/// enclosing loop is `loop`. Nested scopes are not entered.
template <typename F>
void walk_loop_body(const Node& loop, F&& visit) {
    const Node* body = loop_body(loop);
    if (!body) return;
    for (const auto& stmt : body->children) {
        py::walk(*stmt, [&](const Node& n) {
            if (py::opens_scope(n)) return false;
            visit(n);
            return !(n.is(NodeKind::For) || n.is(NodeKind::While));
        });
    }
}

/// Every For and While node of a scope (nested scopes not entered).
inline std::vector<const Node*> loops_in_scope(const Node& body) {
    std::vector<const Node*> out;
    py::walk_scope(body, [&](const Node& n) {
        if (n.is(NodeKind::For) || n.is(NodeKind::While)) out.push_back(&n);
    });
    return out;
}

/// Case-insensitive substring match against any pattern.
inline bool matches_any_pattern(std::string_view name, const std::vector<std::string>& patterns) {
    const std::string lower = lowercase(name);
    return std::any_of(patterns.begin(), patterns.end(),
                       [&](const std::string& p) { return !p.empty() && lower.find(lowercase(p)) != std::string::npos; });
}

/// Names whose value a statement list may change: plain stores, method-call
/// receivers, attribute/subscript stores and del targets, plus names passed
/// to any call as an argument.
inline std::set<std::string> possibly_modified_names(const Node& body) {
    std::set<std::string> out;
    py::walk(body, [&](const Node& n) {
        if (n.is(NodeKind::Name) && n.ctx != py::ExprContext::Load) out.insert(n.text);
        if ((n.is(NodeKind::Attribute) || n.is(NodeKind::Subscript)) && n.ctx != py::ExprContext::Load) {
            const std::string base = py::base_name(n);
            if (!base.empty()) out.insert(base);
        }
        if (n.is(NodeKind::Call)) {
            const Node& func = *n.child(0);
            if (func.is(NodeKind::Attribute)) {
                const std::string base = py::base_name(func);
                if (!base.empty()) out.insert(base);
            }
            for (std::size_t i = 1; i < n.size(); ++i) {
                const Node* arg = n.child(i);
                const Node* value = arg->is(NodeKind::Keyword) || arg->is(NodeKind::Starred) ? arg->child(0) : arg;
                if (value->is(NodeKind::Name)) out.insert(value->text);
            }
        }
        if (n.is(NodeKind::Global) || n.is(NodeKind::Nonlocal))
            for (const auto& c : n.children) out.insert(c->text);
        return true;
    });
    return out;
}

}  // namespace codequal::detail
