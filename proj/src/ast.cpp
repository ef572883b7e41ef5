#include "codequal/ast.hpp"

#include <array>

namespace codequal::py {

std::string_view kind_name(NodeKind kind) {
    static constexpr std::array<std::string_view, 64> kNames = {
        "Module", "Block", "FunctionDef", "ClassDef", "Return", "Delete", "Assign", "AugAssign",
        "AnnAssign", "For", "While", "If", "With", "WithItem", "Match", "MatchCase", "Raise",
        "Try", "ExceptHandler", "Assert", "Import", "ImportFrom", "Alias", "Global", "Nonlocal",
        "ExprStmt", "Pass", "Break", "Continue", "TypeAlias", "Decorators", "Bases", "Arguments",
        "Param", "BoolOp", "NamedExpr", "BinOp", "UnaryOp", "Lambda", "IfExp", "Dict", "DictEntry",
        "Set", "ListComp", "SetComp", "DictComp", "GeneratorExp", "Comprehension", "Await",
        "Yield", "YieldFrom", "Compare", "Call", "Keyword", "JoinedStr", "FormattedValue",
        "Constant", "Attribute", "Subscript", "Starred", "Name", "List", "Tuple", "Slice",
    };
    const auto i = static_cast<std::size_t>(kind);
    return i < kNames.size() ? kNames[i] : "?";
}

}  // namespace codequal::py
