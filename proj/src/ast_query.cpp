#include "codequal/ast_query.hpp"

#include <array>
#include <algorithm>

namespace codequal::py {

std::string dotted_name(const Node& expr) {
    if (expr.is(NodeKind::Name)) return expr.text;
    if (expr.is(NodeKind::Attribute)) {
        std::string base = dotted_name(*expr.child(0));
        return base.empty() ? std::string() : base + "." + expr.text;
    }
    return {};
}

std::string base_name(const Node& expr) {
    const Node* n = &expr;
    while (n->is(NodeKind::Attribute) || n->is(NodeKind::Subscript) || n->is(NodeKind::Call))
        n = n->child(0);
    return n->is(NodeKind::Name) ? n->text : std::string();
}

std::optional<std::string> string_literal(const Node& expr) {
    if (expr.is_string()) return expr.text;
    return std::nullopt;
}

bool is_literal(const Node& expr) {
    switch (expr.kind) {
        case NodeKind::Constant: return true;
        case NodeKind::UnaryOp: return expr.text != "not" && is_literal(*expr.child(0));
        case NodeKind::Tuple:
        case NodeKind::List:
        case NodeKind::Set:
            return std::all_of(expr.children.begin(), expr.children.end(),
                               [](const auto& c) { return is_literal(*c); });
        case NodeKind::Dict:
            return std::all_of(expr.children.begin(), expr.children.end(), [](const auto& entry) {
                return entry->child(0) && is_literal(*entry->child(0)) && is_literal(*entry->child(1));
            });
        default: return false;
    }
}

const Node* keyword_argument(const Node& call, std::string_view name) {
    for (std::size_t i = 1; i < call.size(); ++i) {
        const Node* arg = call.child(i);
        if (arg->is(NodeKind::Keyword) && arg->text == name) return arg->child(0);
    }
    return nullptr;
}

std::vector<const Node*> positional_arguments(const Node& call) {
    std::vector<const Node*> out;
    for (std::size_t i = 1; i < call.size(); ++i) {
        const Node* arg = call.child(i);
        if (!arg->is(NodeKind::Keyword) && !arg->is(NodeKind::Starred)) out.push_back(arg);
    }
    return out;
}

ImportBindings::ImportBindings(const Node& module) {
    walk(module, [&](const Node& n) {
        if (n.is(NodeKind::Import)) {
            for (const auto& alias : n.children) {
                if (!alias->text2.empty()) {
                    bindings_[alias->text2] = alias->text;
                } else {
                    const std::string head = alias->text.substr(0, alias->text.find('.'));
                    bindings_[head] = head;
                }
            }
        } else if (n.is(NodeKind::ImportFrom)) {
            std::string module_name = n.text;
            module_name.erase(0, module_name.find_first_not_of('.'));
            for (const auto& alias : n.children) {
                if (alias->text == "*") continue;
                const std::string local = alias->text2.empty() ? alias->text : alias->text2;
                bindings_[local] = module_name.empty() ? alias->text : module_name + "." + alias->text;
            }
        }
        return true;
    });
}

std::string ImportBindings::resolve(const Node& expr) const {
    const std::string name = dotted_name(expr);
    if (name.empty()) return name;
    const std::size_t dot = name.find('.');
    const std::string head = name.substr(0, dot);
    auto it = bindings_.find(head);
    if (it == bindings_.end()) return name;
    return dot == std::string::npos ? it->second : it->second + name.substr(dot);
}

namespace {

bool is_exit_call(const Node& call, const ImportBindings& imports) {
    static constexpr std::array<std::string_view, 5> kExits = {"sys.exit", "exit", "quit", "os._exit",
                                                               "os.abort"};
    const std::string callee = imports.resolve(*call.child(0));
    return std::find(kExits.begin(), kExits.end(), callee) != kExits.end();
}

bool exits(const Node& n, const ImportBindings& imports, bool inner_loop) {
    switch (n.kind) {
        case NodeKind::FunctionDef:
        case NodeKind::ClassDef:
        case NodeKind::Lambda:
            return false;
        case NodeKind::Break:
            return !inner_loop;
        case NodeKind::Return:
        case NodeKind::Raise:
        case NodeKind::Yield:
        case NodeKind::YieldFrom:
            return true;
        case NodeKind::Call:
            if (is_exit_call(n, imports)) return true;
            break;
        default:
            break;
    }
    // Only a nested loop's own body hides its breaks; its else clause does not.
    const std::size_t nested_body = n.is(NodeKind::For) ? 2 : n.is(NodeKind::While) ? 1 : n.size();
    for (std::size_t i = 0; i < n.size(); ++i) {
        const Node* c = n.child(i);
        if (c && exits(*c, imports, inner_loop || i == nested_body)) return true;
    }
    return false;
}

}  // namespace

bool contains_loop_exit(const Node& loop_body, const ImportBindings& imports) {
    return exits(loop_body, imports, false);
}

}  // namespace codequal::py
