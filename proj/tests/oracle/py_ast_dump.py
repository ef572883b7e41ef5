"""Render a Python module with the reference `ast` parser in the canonical
one-line form produced by tests/unit/ast_dump.cpp.

usage: py_ast_dump.py FILE  (prints the dump, or "SYNTAX-ERROR line:col")
"""

import ast
import json
import re
import sys

CMP = {
    ast.Eq: "==", ast.NotEq: "!=", ast.Lt: "<", ast.LtE: "<=", ast.Gt: ">", ast.GtE: ">=",
    ast.Is: "is", ast.IsNot: "is not", ast.In: "in", ast.NotIn: "not in",
}
BIN = {
    ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.MatMult: "@", ast.Div: "/", ast.Mod: "%",
    ast.Pow: "**", ast.LShift: "<<", ast.RShift: ">>", ast.BitOr: "|", ast.BitXor: "^",
    ast.BitAnd: "&", ast.FloorDiv: "//",
}
UNARY = {ast.Invert: "~", ast.Not: "not", ast.UAdd: "+", ast.USub: "-"}
CTX = {ast.Load: "L", ast.Store: "S", ast.Del: "D"}


class Dumper:
    def __init__(self, source=b""):
        self.positions = True
        self.lines = source.split(b"\n")

    def pos(self, n):
        if not self.positions:
            return ""
        return f"@{n.lineno}:{n.col_offset}-{n.end_lineno}:{n.end_col_offset}"

    def span(self, l1, c1, l2, c2):
        return f"@{l1}:{c1}-{l2}:{c2}" if self.positions else ""

    def name_ending_at(self, name, line, end):
        return f"Name[S,{name}]" + self.span(line, end - len(name.encode()), line, end)

    def find_after(self, pattern, line, col):
        """Position of the first regex match group 1 at or after (line, col)."""
        while line <= len(self.lines):
            m = re.compile(pattern.encode()).search(self.lines[line - 1], col)
            if m:
                return line, m.start(1), m.end(1)
            line, col = line + 1, 0
        raise ValueError(pattern)

    def node(self, kind, attrs, n, children, positional=True):
        out = kind
        if attrs:
            out += "[" + attrs + "]"
        if positional and n is not None:
            out += self.pos(n)
        if children:
            out += "{" + ",".join(children) + "}"
        return out

    def opt(self, n):
        return "_" if n is None else self.expr(n)

    def block(self, stmts):
        return self.node("Block", "", None, [self.stmt(s) for s in stmts], False)

    def opt_block(self, stmts):
        return self.block(stmts) if stmts else "_"

    def module(self, m):
        return self.node("Module", "", None, [self.stmt(s) for s in m.body], False)

    def arguments(self, a):
        params = []
        positional = a.posonlyargs + a.args
        defaults = [None] * (len(positional) - len(a.defaults)) + list(a.defaults)
        for i, arg in enumerate(positional):
            kind = "posonly" if i < len(a.posonlyargs) else "normal"
            params.append(self.param(arg, kind, defaults[i]))
        if a.vararg:
            params.append(self.param(a.vararg, "varargs", None))
        for arg, d in zip(a.kwonlyargs, a.kw_defaults):
            params.append(self.param(arg, "kwonly", d))
        if a.kwarg:
            params.append(self.param(a.kwarg, "varkw", None))
        return self.node("Arguments", "", None, params, False)

    def param(self, arg, kind, default):
        return self.node("Param", f"{arg.arg},{kind}", arg, [self.opt(arg.annotation), self.opt(default)])

    def call_args(self, args, keywords):
        out = [self.expr(a) for a in args]
        for k in keywords:
            out.append(self.node("Keyword", k.arg or "", k, [self.expr(k.value)]))
        return out

    def stmt(self, s):
        t = type(s)
        if t in (ast.FunctionDef, ast.AsyncFunctionDef):
            attrs = s.name + (",async" if t is ast.AsyncFunctionDef else "")
            return self.node("FunctionDef", attrs, s, [
                self.node("Decorators", "", None, [self.expr(d) for d in s.decorator_list], False),
                self.arguments(s.args), self.opt(s.returns), self.block(s.body)])
        if t is ast.ClassDef:
            return self.node("ClassDef", s.name, s, [
                self.node("Decorators", "", None, [self.expr(d) for d in s.decorator_list], False),
                self.node("Bases", "", None, self.call_args(s.bases, s.keywords), False),
                self.block(s.body)])
        if t is ast.Return:
            return self.node("Return", "", s, [self.opt(s.value)])
        if t is ast.Delete:
            return self.node("Delete", "", s, [self.expr(x) for x in s.targets])
        if t is ast.Assign:
            return self.node("Assign", "", s, [self.expr(x) for x in s.targets] + [self.expr(s.value)])
        if t is ast.AugAssign:
            return self.node("AugAssign", BIN[type(s.op)] + "=", s, [self.expr(s.target), self.expr(s.value)])
        if t is ast.AnnAssign:
            return self.node("AnnAssign", "", s, [self.expr(s.target), self.expr(s.annotation), self.opt(s.value)])
        if t in (ast.For, ast.AsyncFor):
            return self.node("For", "async" if t is ast.AsyncFor else "", s, [
                self.expr(s.target), self.expr(s.iter), self.block(s.body), self.opt_block(s.orelse)])
        if t is ast.While:
            return self.node("While", "", s, [self.expr(s.test), self.block(s.body), self.opt_block(s.orelse)])
        if t is ast.If:
            return self.node("If", "", s, [self.expr(s.test), self.block(s.body), self.opt_block(s.orelse)])
        if t in (ast.With, ast.AsyncWith):
            items = [self.node("WithItem", "", None, [self.expr(i.context_expr), self.opt(i.optional_vars)], False)
                     for i in s.items]
            return self.node("With", "async" if t is ast.AsyncWith else "", s, items + [self.block(s.body)])
        if t is ast.Raise:
            return self.node("Raise", "", s, [self.opt(s.exc), self.opt(s.cause)])
        if t is ast.Try:
            handlers = [self.node("ExceptHandler", h.name or "", h, [self.opt(h.type), self.block(h.body)])
                        for h in s.handlers]
            return self.node("Try", "", s, [
                self.block(s.body), self.node("Block", "", None, handlers, False),
                self.opt_block(s.orelse), self.opt_block(s.finalbody)])
        if t is ast.Assert:
            return self.node("Assert", "", s, [self.expr(s.test), self.opt(s.msg)])
        if t is ast.Import:
            return self.node("Import", "", s, [self.alias(a) for a in s.names])
        if t is ast.ImportFrom:
            return self.node("ImportFrom", "." * s.level + (s.module or ""), s, [self.alias(a) for a in s.names])
        if t in (ast.Global, ast.Nonlocal):
            return self.node(t.__name__, "", s, [f"Name[L,{n}]" for n in s.names])
        if t is ast.Expr:
            return self.node("ExprStmt", "", s, [self.expr(s.value)])
        if t in (ast.Pass, ast.Break, ast.Continue):
            return self.node(t.__name__, "", s, [])
        if t is ast.Match:
            cases = [self.node("MatchCase", "", None, [self.pattern(c.pattern), self.opt(c.guard), self.block(c.body)],
                               False) for c in s.cases]
            return self.node("Match", "", s, [self.expr(s.subject)] + cases)
        raise NotImplementedError(t.__name__)

    # Patterns are rendered in the expression vocabulary: captures are Store
    # names, `p as x` is NamedExpr{x, p}, alternatives are left-nested BinOp[|]
    # and class patterns are calls.
    def pattern(self, p):
        t = type(p)
        if t is ast.MatchValue:
            return self.expr(p.value)
        if t is ast.MatchSingleton:
            return self.node("Constant", {None: "None", True: "True", False: "False"}[p.value], p, [])
        if t is ast.MatchAs:
            if p.pattern is None:
                return self.name_ending_at(p.name or "_", p.end_lineno, p.end_col_offset)
            return self.node("NamedExpr", "", p, [self.name_ending_at(p.name, p.end_lineno, p.end_col_offset),
                                                  self.pattern(p.pattern)])
        if t is ast.MatchStar:
            return self.node("Starred", "L", p, [self.name_ending_at(p.name or "_", p.end_lineno, p.end_col_offset)])
        if t is ast.MatchOr:
            out = self.pattern(p.patterns[0])
            first = p.patterns[0]
            for alt in p.patterns[1:]:
                out = "BinOp[|]" + self.span(first.lineno, first.col_offset, alt.end_lineno, alt.end_col_offset) + \
                      "{" + out + "," + self.pattern(alt) + "}"
            return out
        if t is ast.MatchSequence:
            opener = self.lines[p.lineno - 1][p.col_offset:p.col_offset + 1]
            kind = "List" if opener == b"[" else "Tuple"
            return self.node(kind, "L", p, [self.pattern(x) for x in p.patterns])
        if t is ast.MatchMapping:
            entries = [self.node("DictEntry", "", None, [self.expr(k), self.pattern(v)], False)
                       for k, v in zip(p.keys, p.patterns)]
            if p.rest is not None:
                line, start, end = self.find_after(r"\*\*\s*(" + re.escape(p.rest) + r")\b",
                                                   *(self.after_last(p) or (p.lineno, p.col_offset)))
                entries.append(self.node("DictEntry", "", None, ["_", self.name_ending_at(p.rest, line, end)], False))
            return self.node("Dict", "", p, entries)
        if t is ast.MatchClass:
            args = [self.pattern(x) for x in p.patterns]
            for attr, sub in zip(p.kwd_attrs, p.kwd_patterns):
                line, start, _ = self.find_kw(attr, sub)
                args.append("Keyword[" + attr + "]" + self.span(line, start, sub.end_lineno, sub.end_col_offset) +
                            "{" + self.pattern(sub) + "}")
            return self.node("Call", "", p, [self.expr(p.cls)] + args)
        raise NotImplementedError(t.__name__)

    def after_last(self, mapping):
        if not mapping.patterns:
            return None
        last = mapping.patterns[-1]
        return last.end_lineno, last.end_col_offset

    def find_kw(self, attr, sub):
        """Start of `attr =` preceding the keyword pattern `sub`."""
        line = sub.lineno
        text = self.lines[line - 1][:sub.col_offset]
        m = re.search(re.escape(attr.encode()) + rb"\s*=\s*$", text)
        if m is None:
            raise ValueError(attr)
        return line, m.start(), m.end()

    def alias(self, a):
        attrs = a.name + ("," + a.asname if a.asname else "")
        return self.node("Alias", attrs, a, [])

    def comprehensions(self, gens):
        return [self.node("Comprehension", "async" if g.is_async else "", None,
                          [self.expr(g.target), self.expr(g.iter)] + [self.expr(i) for i in g.ifs], False)
                for g in gens]

    def joined_pieces(self, values):
        out = []
        for v in values:
            if isinstance(v, ast.Constant):
                out.append(self.const(v))
            else:
                out.append(self.formatted(v))
        return out

    def spec_exprs(self, spec):
        if spec is None:
            return []
        out = []
        for v in spec.values:
            if isinstance(v, ast.FormattedValue):
                out.append(self.expr(v.value))
                out.extend(self.spec_exprs(v.format_spec))
        return out

    def formatted(self, v):
        return self.node("FormattedValue", "", v, [self.expr(v.value)] + self.spec_exprs(v.format_spec))

    def const(self, c):
        v = c.value
        if v is None:
            attrs = "None"
        elif v is True:
            attrs = "True"
        elif v is False:
            attrs = "False"
        elif v is Ellipsis:
            attrs = "Ellipsis"
        elif isinstance(v, str):
            attrs = "Str," + json.dumps(v, ensure_ascii=False)
        elif isinstance(v, bytes):
            attrs = "Bytes," + v.hex()
        elif isinstance(v, int):
            attrs = "Int"
        elif isinstance(v, float):
            attrs = "Float"
        else:
            attrs = "Complex"
        return self.node("Constant", attrs, c, [])

    def expr(self, e):
        t = type(e)
        if t is ast.BoolOp:
            return self.node("BoolOp", "and" if isinstance(e.op, ast.And) else "or", e,
                             [self.expr(v) for v in e.values])
        if t is ast.NamedExpr:
            return self.node("NamedExpr", "", e, [self.expr(e.target), self.expr(e.value)])
        if t is ast.BinOp:
            return self.node("BinOp", BIN[type(e.op)], e, [self.expr(e.left), self.expr(e.right)])
        if t is ast.UnaryOp:
            return self.node("UnaryOp", UNARY[type(e.op)], e, [self.expr(e.operand)])
        if t is ast.Lambda:
            return self.node("Lambda", "", e, [self.arguments(e.args), self.expr(e.body)])
        if t is ast.IfExp:
            return self.node("IfExp", "", e, [self.expr(e.test), self.expr(e.body), self.expr(e.orelse)])
        if t is ast.Dict:
            entries = [self.node("DictEntry", "", None, [self.opt(k), self.expr(v)], False)
                       for k, v in zip(e.keys, e.values)]
            return self.node("Dict", "", e, entries)
        if t is ast.Set:
            return self.node("Set", "", e, [self.expr(x) for x in e.elts])
        if t in (ast.ListComp, ast.SetComp, ast.GeneratorExp):
            return self.node(t.__name__, "", e, [self.expr(e.elt)] + self.comprehensions(e.generators))
        if t is ast.DictComp:
            return self.node("DictComp", "", e,
                             [self.expr(e.key), self.expr(e.value)] + self.comprehensions(e.generators))
        if t is ast.Await:
            return self.node("Await", "", e, [self.expr(e.value)])
        if t is ast.Yield:
            return self.node("Yield", "", e, [self.opt(e.value)])
        if t is ast.YieldFrom:
            return self.node("YieldFrom", "", e, [self.expr(e.value)])
        if t is ast.Compare:
            ops = ",".join(CMP[type(o)] for o in e.ops)
            return self.node("Compare", ops, e, [self.expr(e.left)] + [self.expr(c) for c in e.comparators])
        if t is ast.Call:
            return self.node("Call", "", e, [self.expr(e.func)] + self.call_args(e.args, e.keywords))
        if t is ast.JoinedStr:
            head = "JoinedStr" + self.pos(e)
            saved, self.positions = self.positions, False
            pieces = self.joined_pieces(e.values)
            self.positions = saved
            return head + ("{" + ",".join(pieces) + "}" if pieces else "")
        if t is ast.FormattedValue:
            return self.formatted(e)
        if t is ast.Constant:
            return self.const(e)
        if t is ast.Attribute:
            return self.node("Attribute", CTX[type(e.ctx)] + "," + e.attr, e, [self.expr(e.value)])
        if t is ast.Subscript:
            return self.node("Subscript", CTX[type(e.ctx)], e, [self.expr(e.value), self.expr(e.slice)])
        if t is ast.Starred:
            return self.node("Starred", CTX[type(e.ctx)], e, [self.expr(e.value)])
        if t is ast.Name:
            return self.node("Name", CTX[type(e.ctx)] + "," + e.id, e, [])
        if t in (ast.List, ast.Tuple):
            return self.node(t.__name__, CTX[type(e.ctx)], e, [self.expr(x) for x in e.elts])
        if t is ast.Slice:
            return self.node("Slice", "", e, [self.opt(e.lower), self.opt(e.upper), self.opt(e.step)])
        raise NotImplementedError(t.__name__)


def main():
    with open(sys.argv[1], "rb") as f:
        source = f.read()
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        print(f"SYNTAX-ERROR {exc.lineno}:{(exc.offset or 1) - 1}")
        return
    print(Dumper(source).module(tree))


if __name__ == "__main__":
    main()
