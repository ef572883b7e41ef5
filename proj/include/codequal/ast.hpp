#pragma once

// Syntax tree for Python source. One generic node type; each kind uses a
// fixed child-slot layout (optional slots hold nullptr):
//
//   Module, Block          stmts...
//   FunctionDef            [Decorators, Arguments, returns?, Block]   text=name, flag=async
//   ClassDef               [Decorators, Bases, Block]                 text=name
//   Return                 [value?]
//   Delete                 targets...
//   Assign                 targets..., value
//   AugAssign              [target, value]                            text=op ("+=")
//   AnnAssign              [target, annotation, value?]
//   For                    [target, iter, Block, orelse Block?]        flag=async
//   While                  [test, Block, orelse Block?]
//   If                     [test, Block, orelse Block?]                flag=is elif
//   With                   [WithItem..., Block]                        flag=async
//   WithItem               [context_expr, optional_vars?]
//   Match                  [subject, MatchCase...]
//   MatchCase              [pattern, guard?, Block]
//   Raise                  [exc?, cause?]
//   Try                    [Block, handlers Block, orelse Block?, finally Block?]  flag=except*
//   ExceptHandler          [type?, Block]                              text=bound name
//   Assert                 [test, msg?]
//   Import                 Alias...
//   ImportFrom             Alias...                                    text=module (leading dots kept)
//   Alias                  -                                           text=name, text2=asname
//   Global, Nonlocal       Name...
//   ExprStmt               [value]
//   TypeAlias              [name, value]
//   Decorators, Bases      exprs / Keyword / Starred
//   Arguments              Param...
//   Param                  [annotation?, default?]                    text=name, param_kind
//   BoolOp                 operands...                                 text="and"/"or"
//   NamedExpr              [target, value]
//   BinOp                  [left, right]                               text=op
//   UnaryOp                [operand]                                   text=op
//   Lambda                 [Arguments, body]
//   IfExp                  [test, body, orelse]
//   Dict                   DictEntry...
//   DictEntry              [key? (null for **), value]
//   Set, List, Tuple       elts...
//   ListComp, SetComp, GeneratorExp   [elt, Comprehension...]
//   DictComp               [key, value, Comprehension...]
//   Comprehension          [target, iter, ifs...]                      flag=async
//   Await, Yield, YieldFrom  [value?]
//   Compare                [left, comparators...]                      text=ops joined by ','
//   Call                   [func, args...] (expr, Starred, Keyword)
//   Keyword                [value]                                     text=name ("" for **)
//   JoinedStr              Constant / FormattedValue pieces
//   FormattedValue         [value, format-spec exprs...]
//   Constant               -                                           text=value, const_kind
//   Attribute              [value]                                     text=attr
//   Subscript              [value, slice]
//   Starred                [value]
//   Name                   -                                           text=id
//   Slice                  [lower?, upper?, step?]

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace codequal::py {

enum class NodeKind : std::uint8_t {
    Module, Block, FunctionDef, ClassDef, Return, Delete, Assign, AugAssign, AnnAssign,
    For, While, If, With, WithItem, Match, MatchCase, Raise, Try, ExceptHandler, Assert,
    Import, ImportFrom, Alias, Global, Nonlocal, ExprStmt, Pass, Break, Continue, TypeAlias,
    Decorators, Bases, Arguments, Param,
    BoolOp, NamedExpr, BinOp, UnaryOp, Lambda, IfExp, Dict, DictEntry, Set, ListComp, SetComp,
    DictComp, GeneratorExp, Comprehension, Await, Yield, YieldFrom, Compare, Call, Keyword,
    JoinedStr, FormattedValue, Constant, Attribute, Subscript, Starred, Name, List, Tuple, Slice,
};

enum class ExprContext : std::uint8_t { Load, Store, Del };

enum class ConstKind : std::uint8_t { None, Str, Bytes, Int, Float, Complex, True, False, Ellipsis };

enum class ParamKind : std::uint8_t { PositionalOnly, Normal, VarArgs, KeywordOnly, VarKeywords };

std::string_view kind_name(NodeKind kind);

struct Node {
    NodeKind kind = NodeKind::Module;
    ExprContext ctx = ExprContext::Load;
    ConstKind const_kind = ConstKind::None;
    ParamKind param_kind = ParamKind::Normal;
    bool flag = false;
    int line = 1;
    int col = 0;
    int end_line = 1;
    int end_col = 0;
    std::string text;
    std::string text2;
    std::vector<std::unique_ptr<Node>> children;

    Node() = default;
    explicit Node(NodeKind k) : kind(k) {}

    const Node* child(std::size_t i) const {
        return i < children.size() ? children[i].get() : nullptr;
    }
    Node* child(std::size_t i) { return i < children.size() ? children[i].get() : nullptr; }
    std::size_t size() const { return children.size(); }

    bool is(NodeKind k) const { return kind == k; }
    bool is_string() const { return kind == NodeKind::Constant && const_kind == ConstKind::Str; }
};

using NodePtr = std::unique_ptr<Node>;

// Slot accessors for the kinds analyzers touch most.
inline const Node& function_decorators(const Node& fn) { return *fn.child(0); }
inline const Node& function_args(const Node& fn) { return *fn.child(1); }
inline const Node* function_returns(const Node& fn) { return fn.child(2); }
inline const Node& function_body(const Node& fn) { return *fn.child(3); }
inline const Node& class_decorators(const Node& cls) { return *cls.child(0); }
inline const Node& class_bases(const Node& cls) { return *cls.child(1); }
inline const Node& class_body(const Node& cls) { return *cls.child(2); }

}  // namespace codequal::py
