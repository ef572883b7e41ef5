#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codequal/ast.hpp"

namespace codequal::py {

/// Pre-order visit of every node below and including `root`. The callback
/// returns false to skip the children of the node it was given.
template <typename F>
void walk(const Node& root, F&& visit) {
    if (!visit(root)) return;
    for (const auto& c : root.children)
        if (c) walk(*c, visit);
}

inline bool opens_scope(const Node& n) {
    return n.is(NodeKind::FunctionDef) || n.is(NodeKind::ClassDef) || n.is(NodeKind::Lambda);
}

/// Visits the nodes of one scope: nested function, class and lambda nodes
/// are visited but not entered.
template <typename F>
void walk_scope(const Node& scope_body, F&& visit) {
    for (const auto& c : scope_body.children) {
        if (!c) continue;
        walk(*c, [&](const Node& n) {
            visit(n);
            return !opens_scope(n);
        });
    }
}

/// "a.b.c" for a Name/Attribute chain, empty otherwise.
std::string dotted_name(const Node& expr);

/// Name of the root of an Attribute/Subscript/Call chain ("self" in
/// self.items[0].x), empty when the chain starts elsewhere.
std::string base_name(const Node& expr);

std::optional<std::string> string_literal(const Node& expr);
bool is_literal(const Node& expr);

/// The keyword argument `name` of a call, or nullptr.
const Node* keyword_argument(const Node& call, std::string_view name);
/// Positional (non-keyword, non-starred) arguments of a call.
std::vector<const Node*> positional_arguments(const Node& call);

/// Local name -> fully qualified import path, from every import in the file.
/// `import a.b` binds "a" to "a"; `import a.b as c` binds "c" to "a.b";
/// `from a import b as c` binds "c" to "a.b".
class ImportBindings {
public:
    explicit ImportBindings(const Node& module);

    /// Canonical dotted path of a callee expression with its first component
    /// rewritten through the bindings; builtins resolve to their bare name.
    std::string resolve(const Node& expr) const;

    const std::map<std::string, std::string>& bindings() const { return bindings_; }

private:
    std::map<std::string, std::string> bindings_;
};

/// True if a loop body can leave its loop: a break that belongs to this loop,
/// return, raise, yield, or a call to sys.exit/exit/quit/os._exit. Nested
/// function bodies are not entered.
bool contains_loop_exit(const Node& loop_body, const ImportBindings& imports);

}  // namespace codequal::py
