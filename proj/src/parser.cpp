#include "codequal/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace codequal::py {

namespace {

struct StringPrefix {
    bool raw = false;
    bool bytes = false;
    bool fstring = false;
    std::size_t length = 0;
};

StringPrefix string_prefix(std::string_view raw) {
    StringPrefix p;
    while (p.length < raw.size() && raw[p.length] != '"' && raw[p.length] != '\'') {
        switch (std::tolower(static_cast<unsigned char>(raw[p.length]))) {
            case 'r': p.raw = true; break;
            case 'b': p.bytes = true; break;
            case 'f': p.fstring = true; break;
            default: break;
        }
        ++p.length;
    }
    return p;
}

// Body of a string token without prefix and quotes; `offset` receives the
// position of the body inside the raw token.
std::string_view string_body(std::string_view raw, std::size_t* offset = nullptr) {
    const StringPrefix p = string_prefix(raw);
    const std::string_view rest = raw.substr(p.length);
    const bool triple = rest.size() >= 6 && rest[0] == rest[1] && rest[1] == rest[2];
    const std::size_t q = triple ? 3 : 1;
    if (offset) *offset = p.length + q;
    if (rest.size() < 2 * q) return {};
    return rest.substr(q, rest.size() - 2 * q);
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

std::string unescape(std::string_view body, bool bytes) {
    std::string out;
    out.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (c != '\\' || i + 1 >= body.size()) {
            out += c;
            continue;
        }
        const char e = body[++i];
        auto hex = [&](std::size_t n) {
            unsigned long v = 0;
            std::size_t k = 0;
            for (; k < n && i + 1 < body.size() && std::isxdigit(static_cast<unsigned char>(body[i + 1])); ++k)
                v = v * 16 + static_cast<unsigned long>(std::stoi(std::string(1, body[++i]), nullptr, 16));
            return v;
        };
        switch (e) {
            case '\n': break;
            case '\r':
                if (i + 1 < body.size() && body[i + 1] == '\n') ++i;
                break;
            case '\\': out += '\\'; break;
            case '\'': out += '\''; break;
            case '"': out += '"'; break;
            case 'a': out += '\a'; break;
            case 'b': out += '\b'; break;
            case 'f': out += '\f'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            case 't': out += '\t'; break;
            case 'v': out += '\v'; break;
            case 'x': {
                const unsigned long v = hex(2);
                if (bytes) out += static_cast<char>(v);
                else append_utf8(out, v);
                break;
            }
            case 'u':
            case 'U':
                if (bytes) {
                    out += '\\';
                    out += e;
                } else {
                    append_utf8(out, hex(e == 'u' ? 4 : 8));
                }
                break;
            default:
                if (e >= '0' && e <= '7') {
                    unsigned long v = static_cast<unsigned long>(e - '0');
                    for (int k = 0; k < 2 && i + 1 < body.size() && body[i + 1] >= '0' && body[i + 1] <= '7'; ++k)
                        v = v * 8 + static_cast<unsigned long>(body[++i] - '0');
                    if (bytes) out += static_cast<char>(v & 0xFF);
                    else append_utf8(out, v);
                } else {
                    out += '\\';
                    out += e;
                }
        }
    }
    return out;
}

bool is_aug_op(std::string_view op) {
    static constexpr std::array<std::string_view, 13> kOps = {
        "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**="};
    return std::find(kOps.begin(), kOps.end(), op) != kOps.end();
}

void shift_positions(Node& n, int base_line, int base_col) {
    auto shift = [&](int& line, int& col) {
        if (line == 1) col = base_col + col - 1;
        line = base_line + line - 1;
    };
    shift(n.line, n.col);
    shift(n.end_line, n.end_col);
    for (auto& c : n.children)
        if (c) shift_positions(*c, base_line, base_col);
}

NodePtr parse_expression_text(std::string_view text, int base_line, int base_col);

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    NodePtr parse_file() {
        auto mod = std::make_unique<Node>(NodeKind::Module);
        mod->line = 1;
        mod->col = 0;
        while (!at(TokenKind::EndMarker)) {
            if (at(TokenKind::Newline)) {
                advance();
                continue;
            }
            parse_statement(mod->children);
        }
        mod->end_line = peek().line;
        mod->end_col = peek().col;
        return mod;
    }

    // Parses "(" expr ")" produced by wrapping an f-string replacement field.
    NodePtr parse_wrapped_expression() {
        expect_op("(");
        NodePtr e = at_kw("yield") ? parse_yield() : parse_star_expressions();
        expect_op(")");
        if (at(TokenKind::Newline)) advance();
        if (!at(TokenKind::EndMarker)) fail(peek(), "f-string: invalid syntax");
        return e;
    }

private:
    // ---- token helpers ---------------------------------------------------

    const Token& peek(std::size_t k = 0) const {
        const std::size_t i = std::min(pos_ + k, toks_.size() - 1);
        return toks_[i];
    }
    bool at(TokenKind kind) const { return peek().kind == kind; }
    bool at_op(std::string_view op, std::size_t k = 0) const {
        const Token& t = peek(k);
        return t.kind == TokenKind::Op && t.text == op;
    }
    bool at_kw(std::string_view kw, std::size_t k = 0) const {
        const Token& t = peek(k);
        return t.kind == TokenKind::Name && t.text == kw;
    }
    bool at_name(std::size_t k = 0) const {
        const Token& t = peek(k);
        return t.kind == TokenKind::Name && !is_keyword(t.text);
    }
    bool at_stmt_end() const {
        return at(TokenKind::Newline) || at(TokenKind::EndMarker) || at_op(";");
    }

    const Token& advance() {
        const Token& t = toks_[pos_];
        if (t.kind != TokenKind::Newline && t.kind != TokenKind::Indent &&
            t.kind != TokenKind::Dedent && t.kind != TokenKind::EndMarker) {
            end_line_ = t.end_line;
            end_col_ = t.end_col;
        }
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    [[noreturn]] static void fail(const Token& t, const std::string& msg) {
        throw SyntaxError(t.line, t.col, msg);
    }
    [[noreturn]] static void fail(const Node& n, const std::string& msg) {
        throw SyntaxError(n.line, n.col, msg);
    }

    void expect_op(std::string_view op) {
        if (!at_op(op)) fail(peek(), "expected '" + std::string(op) + "'");
        advance();
    }
    void expect_kw(std::string_view kw) {
        if (!at_kw(kw)) fail(peek(), "expected '" + std::string(kw) + "'");
        advance();
    }
    void expect(TokenKind kind, const char* what) {
        if (!at(kind)) fail(peek(), std::string("expected ") + what);
        advance();
    }
    std::string expect_name() {
        if (!at_name()) fail(peek(), "invalid syntax");
        return advance().text;
    }

    NodePtr make(NodeKind kind, const Token& start) const {
        auto n = std::make_unique<Node>(kind);
        n->line = start.line;
        n->col = start.col;
        return n;
    }
    NodePtr make_at(NodeKind kind, const Node& first) const {
        auto n = std::make_unique<Node>(kind);
        n->line = first.line;
        n->col = first.col;
        return n;
    }
    NodePtr finish(NodePtr n) const {
        n->end_line = end_line_;
        n->end_col = end_col_;
        return n;
    }

    bool starts_expression() const {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::Number:
            case TokenKind::String: return true;
            case TokenKind::Name:
                return !is_keyword(t.text) || t.text == "not" || t.text == "lambda" ||
                       t.text == "await" || t.text == "None" || t.text == "True" || t.text == "False";
            case TokenKind::Op:
                return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
                       t.text == "+" || t.text == "~" || t.text == "*" || t.text == "...";
            default: return false;
        }
    }

    // ---- statements --------------------------------------------------------

    void parse_statement(std::vector<NodePtr>& out) {
        const Token& t = peek();
        if (t.kind == TokenKind::Indent) fail(t, "unexpected indent");
        if (t.kind == TokenKind::Dedent) fail(t, "unexpected unindent");
        if (at_op("@")) {
            out.push_back(parse_decorated());
            return;
        }
        if (t.kind == TokenKind::Name) {
            if (t.text == "def") return out.push_back(parse_funcdef(make(NodeKind::Decorators, t), t));
            if (t.text == "class") return out.push_back(parse_classdef(make(NodeKind::Decorators, t), t));
            if (t.text == "if") return out.push_back(parse_if(false));
            if (t.text == "while") return out.push_back(parse_while());
            if (t.text == "for") return out.push_back(parse_for(t, false));
            if (t.text == "try") return out.push_back(parse_try());
            if (t.text == "with") return out.push_back(parse_with(t, false));
            if (t.text == "async") {
                const Token& start = advance();
                if (at_kw("def")) return out.push_back(parse_funcdef(make(NodeKind::Decorators, start), start, true));
                if (at_kw("for")) return out.push_back(parse_for(start, true));
                if (at_kw("with")) return out.push_back(parse_with(start, true));
                fail(peek(), "invalid syntax");
            }
            if (t.text == "match") {
                if (NodePtr m = try_parse_match()) return out.push_back(std::move(m));
            }
        }
        parse_simple_statements(out);
    }

    void parse_simple_statements(std::vector<NodePtr>& out) {
        out.push_back(parse_small_statement());
        while (at_op(";")) {
            advance();
            if (at(TokenKind::Newline) || at(TokenKind::EndMarker)) break;
            out.push_back(parse_small_statement());
        }
        if (at(TokenKind::EndMarker)) return;
        if (!at(TokenKind::Newline)) fail(peek(), "invalid syntax");
        advance();
    }

    NodePtr parse_block() {
        auto block = make(NodeKind::Block, peek());
        if (at(TokenKind::Newline)) {
            advance();
            if (!at(TokenKind::Indent)) fail(peek(), "expected an indented block");
            advance();
            block->line = peek().line;
            block->col = peek().col;
            while (!at(TokenKind::Dedent) && !at(TokenKind::EndMarker)) {
                if (at(TokenKind::Newline)) {
                    advance();
                    continue;
                }
                parse_statement(block->children);
            }
            if (at(TokenKind::Dedent)) advance();
        } else {
            parse_simple_statements(block->children);
        }
        return finish(std::move(block));
    }

    NodePtr parse_small_statement() {
        const Token& t = peek();
        if (t.kind == TokenKind::Name) {
            const std::string& w = t.text;
            if (w == "pass" || w == "break" || w == "continue") {
                advance();
                return finish(make(w == "pass" ? NodeKind::Pass : w == "break" ? NodeKind::Break : NodeKind::Continue, t));
            }
            if (w == "return") {
                auto n = make(NodeKind::Return, advance());
                n->children.push_back(at_stmt_end() ? nullptr : parse_star_expressions());
                return finish(std::move(n));
            }
            if (w == "raise") {
                auto n = make(NodeKind::Raise, advance());
                NodePtr exc, cause;
                if (!at_stmt_end()) {
                    exc = parse_expression();
                    if (at_kw("from")) {
                        advance();
                        cause = parse_expression();
                    }
                }
                n->children.push_back(std::move(exc));
                n->children.push_back(std::move(cause));
                return finish(std::move(n));
            }
            if (w == "global" || w == "nonlocal") {
                auto n = make(w == "global" ? NodeKind::Global : NodeKind::Nonlocal, advance());
                do {
                    auto name = make(NodeKind::Name, peek());
                    name->text = expect_name();
                    n->children.push_back(finish(std::move(name)));
                } while (at_op(",") && (advance(), true));
                return finish(std::move(n));
            }
            if (w == "del") {
                auto n = make(NodeKind::Delete, advance());
                do {
                    NodePtr target = parse_bitwise_or();
                    set_context(*target, ExprContext::Del);
                    n->children.push_back(std::move(target));
                } while (at_op(",") && (advance(), !at_stmt_end()));
                return finish(std::move(n));
            }
            if (w == "assert") {
                auto n = make(NodeKind::Assert, advance());
                n->children.push_back(parse_expression());
                NodePtr msg;
                if (at_op(",")) {
                    advance();
                    msg = parse_expression();
                }
                n->children.push_back(std::move(msg));
                return finish(std::move(n));
            }
            if (w == "import") return parse_import();
            if (w == "from") return parse_from_import();
            if (w == "type" && peek(1).kind == TokenKind::Name && !is_keyword(peek(1).text) &&
                (at_op("=", 2) || at_op("[", 2))) {
                auto n = make(NodeKind::TypeAlias, advance());
                auto name = make(NodeKind::Name, peek());
                name->text = expect_name();
                name->ctx = ExprContext::Store;
                n->children.push_back(finish(std::move(name)));
                if (at_op("[")) skip_type_params();
                expect_op("=");
                n->children.push_back(parse_expression());
                return finish(std::move(n));
            }
        }
        return parse_expression_statement();
    }

    NodePtr parse_expression_statement() {
        const Token& start = peek();
        NodePtr first = at_kw("yield") ? parse_yield() : parse_star_expressions();
        if (at_op(":")) {
            if (!(first->is(NodeKind::Name) || first->is(NodeKind::Attribute) || first->is(NodeKind::Subscript)))
                fail(*first, "illegal target for annotation");
            set_context(*first, ExprContext::Store);
            advance();
            auto n = make(NodeKind::AnnAssign, start);
            n->children.push_back(std::move(first));
            n->children.push_back(parse_expression());
            NodePtr value;
            if (at_op("=")) {
                advance();
                value = at_kw("yield") ? parse_yield() : parse_star_expressions();
            }
            n->children.push_back(std::move(value));
            return finish(std::move(n));
        }
        if (peek().kind == TokenKind::Op && is_aug_op(peek().text)) {
            if (!(first->is(NodeKind::Name) || first->is(NodeKind::Attribute) || first->is(NodeKind::Subscript)))
                fail(*first, "illegal expression for augmented assignment");
            set_context(*first, ExprContext::Store);
            auto n = make(NodeKind::AugAssign, start);
            n->text = advance().text;
            n->children.push_back(std::move(first));
            n->children.push_back(at_kw("yield") ? parse_yield() : parse_star_expressions());
            return finish(std::move(n));
        }
        if (at_op("=")) {
            auto n = make(NodeKind::Assign, start);
            n->children.push_back(std::move(first));
            while (at_op("=")) {
                advance();
                n->children.push_back(at_kw("yield") ? parse_yield() : parse_star_expressions());
            }
            for (std::size_t i = 0; i + 1 < n->children.size(); ++i)
                set_context(*n->children[i], ExprContext::Store);
            return finish(std::move(n));
        }
        auto n = make(NodeKind::ExprStmt, start);
        n->children.push_back(std::move(first));
        return finish(std::move(n));
    }

    void set_context(Node& n, ExprContext ctx) {
        switch (n.kind) {
            case NodeKind::Name:
            case NodeKind::Attribute:
            case NodeKind::Subscript: n.ctx = ctx; return;
            case NodeKind::Tuple:
            case NodeKind::List:
                n.ctx = ctx;
                for (auto& c : n.children) set_context(*c, ctx);
                return;
            case NodeKind::Starred:
                n.ctx = ctx;
                set_context(*n.children[0], ctx);
                return;
            default:
                fail(n, std::string(ctx == ExprContext::Del ? "cannot delete " : "cannot assign to ") +
                            std::string(kind_name(n.kind)));
        }
    }

    NodePtr parse_import() {
        auto n = make(NodeKind::Import, advance());
        do {
            auto alias = make(NodeKind::Alias, peek());
            alias->text = parse_dotted_name();
            if (at_kw("as")) {
                advance();
                alias->text2 = expect_name();
            }
            n->children.push_back(finish(std::move(alias)));
        } while (at_op(",") && (advance(), true));
        return finish(std::move(n));
    }

    std::string parse_dotted_name() {
        std::string name = expect_name();
        while (at_op(".")) {
            advance();
            name += "." + expect_name();
        }
        return name;
    }

    NodePtr parse_from_import() {
        auto n = make(NodeKind::ImportFrom, advance());
        std::string module;
        while (at_op(".") || at_op("...")) module += advance().text;
        if (!at_kw("import")) module += parse_dotted_name();
        n->text = module;
        expect_kw("import");
        if (at_op("*")) {
            auto alias = make(NodeKind::Alias, advance());
            alias->text = "*";
            n->children.push_back(finish(std::move(alias)));
            return finish(std::move(n));
        }
        const bool paren = at_op("(");
        if (paren) advance();
        while (true) {
            auto alias = make(NodeKind::Alias, peek());
            alias->text = expect_name();
            if (at_kw("as")) {
                advance();
                alias->text2 = expect_name();
            }
            n->children.push_back(finish(std::move(alias)));
            if (!at_op(",")) break;
            advance();
            if (paren && at_op(")")) break;
            if (!paren && at_stmt_end()) fail(peek(), "trailing comma not allowed without surrounding parentheses");
        }
        if (paren) expect_op(")");
        return finish(std::move(n));
    }

    void skip_type_params() {
        int depth = 0;
        do {
            if (at_op("[")) ++depth;
            else if (at_op("]")) --depth;
            else if (at(TokenKind::EndMarker)) fail(peek(), "invalid syntax");
            advance();
        } while (depth > 0);
    }

    NodePtr parse_decorated() {
        auto decorators = make(NodeKind::Decorators, peek());
        while (at_op("@")) {
            advance();
            decorators->children.push_back(parse_named_expression());
            expect(TokenKind::Newline, "newline after decorator");
        }
        decorators = finish(std::move(decorators));
        const Token& t = peek();
        if (at_kw("def")) return parse_funcdef(std::move(decorators), t);
        if (at_kw("class")) return parse_classdef(std::move(decorators), t);
        if (at_kw("async") && at_kw("def", 1)) {
            advance();
            return parse_funcdef(std::move(decorators), t, true);
        }
        fail(t, "invalid syntax");
    }

    NodePtr parse_funcdef(NodePtr decorators, const Token& start, bool is_async = false) {
        auto n = make(NodeKind::FunctionDef, start);
        n->flag = is_async;
        expect_kw("def");
        n->text = expect_name();
        if (at_op("[")) skip_type_params();
        expect_op("(");
        NodePtr args = parse_parameters(true, ")");
        expect_op(")");
        NodePtr returns;
        if (at_op("->")) {
            advance();
            returns = parse_expression();
        }
        expect_op(":");
        n->children.push_back(std::move(decorators));
        n->children.push_back(std::move(args));
        n->children.push_back(std::move(returns));
        n->children.push_back(parse_block());
        return finish(std::move(n));
    }

    NodePtr parse_parameters(bool annotations, std::string_view closer) {
        auto args = make(NodeKind::Arguments, peek());
        bool keyword_only = false;
        bool seen_default = false;
        while (!at_op(closer)) {
            if (at_op("/")) {
                if (args->children.empty()) fail(peek(), "at least one argument must precede /");
                for (auto& p : args->children) p->param_kind = ParamKind::PositionalOnly;
                advance();
            } else if (at_op("*") || at_op("**")) {
                const bool double_star = at_op("**");
                advance();
                if (!double_star && (at_op(",") || at_op(closer))) {
                    keyword_only = true;
                } else {
                    auto p = make(NodeKind::Param, peek());
                    p->param_kind = double_star ? ParamKind::VarKeywords : ParamKind::VarArgs;
                    p->text = expect_name();
                    NodePtr ann;
                    if (annotations && at_op(":")) {
                        advance();
                        ann = at_op("*") ? parse_star_expression() : parse_expression();
                    }
                    p->children.push_back(std::move(ann));
                    p->children.push_back(nullptr);
                    args->children.push_back(finish(std::move(p)));
                    if (!double_star) keyword_only = true;
                }
            } else {
                auto p = make(NodeKind::Param, peek());
                p->param_kind = keyword_only ? ParamKind::KeywordOnly : ParamKind::Normal;
                p->text = expect_name();
                NodePtr ann, def;
                if (annotations && at_op(":")) {
                    advance();
                    ann = parse_expression();
                }
                p->end_line = end_line_;
                p->end_col = end_col_;
                if (at_op("=")) {
                    advance();
                    def = parse_expression();
                    if (!keyword_only) seen_default = true;
                } else if (!keyword_only && seen_default) {
                    fail(*p, "non-default argument follows default argument");
                }
                p->children.push_back(std::move(ann));
                p->children.push_back(std::move(def));
                args->children.push_back(std::move(p));
            }
            if (!at_op(",")) break;
            advance();
        }
        return finish(std::move(args));
    }

    NodePtr parse_classdef(NodePtr decorators, const Token& start) {
        auto n = make(NodeKind::ClassDef, start);
        expect_kw("class");
        n->text = expect_name();
        if (at_op("[")) skip_type_params();
        auto bases = make(NodeKind::Bases, peek());
        if (at_op("(")) {
            advance();
            parse_call_arguments(*bases);
        }
        expect_op(":");
        n->children.push_back(std::move(decorators));
        n->children.push_back(finish(std::move(bases)));
        n->children.push_back(parse_block());
        return finish(std::move(n));
    }

    NodePtr parse_if(bool is_elif) {
        auto n = make(NodeKind::If, advance());
        n->flag = is_elif;
        n->children.push_back(parse_named_expression());
        expect_op(":");
        n->children.push_back(parse_block());
        NodePtr orelse;
        if (at_kw("elif")) {
            orelse = make(NodeKind::Block, peek());
            orelse->children.push_back(parse_if(true));
            orelse = finish(std::move(orelse));
        } else if (at_kw("else")) {
            advance();
            expect_op(":");
            orelse = parse_block();
        }
        n->children.push_back(std::move(orelse));
        return finish(std::move(n));
    }

    NodePtr parse_optional_else() {
        if (!at_kw("else")) return nullptr;
        advance();
        expect_op(":");
        return parse_block();
    }

    NodePtr parse_while() {
        auto n = make(NodeKind::While, advance());
        n->children.push_back(parse_named_expression());
        expect_op(":");
        n->children.push_back(parse_block());
        n->children.push_back(parse_optional_else());
        return finish(std::move(n));
    }

    NodePtr parse_for(const Token& start, bool is_async) {
        auto n = make(NodeKind::For, start);
        n->flag = is_async;
        expect_kw("for");
        NodePtr target = parse_star_targets();
        set_context(*target, ExprContext::Store);
        expect_kw("in");
        n->children.push_back(std::move(target));
        n->children.push_back(parse_star_expressions());
        expect_op(":");
        n->children.push_back(parse_block());
        n->children.push_back(parse_optional_else());
        return finish(std::move(n));
    }

    NodePtr parse_try() {
        auto n = make(NodeKind::Try, advance());
        expect_op(":");
        n->children.push_back(parse_block());
        auto handlers = make(NodeKind::Block, peek());
        while (at_kw("except")) {
            auto h = make(NodeKind::ExceptHandler, advance());
            if (at_op("*")) {
                advance();
                n->flag = true;
            }
            NodePtr type;
            if (!at_op(":")) {
                type = parse_expression();
                if (at_op(",")) fail(peek(), "multiple exception types must be parenthesized");
                if (at_kw("as")) {
                    advance();
                    h->text = expect_name();
                }
            }
            expect_op(":");
            h->children.push_back(std::move(type));
            h->children.push_back(parse_block());
            handlers->children.push_back(finish(std::move(h)));
        }
        const bool has_handlers = !handlers->children.empty();
        n->children.push_back(finish(std::move(handlers)));
        NodePtr orelse;
        if (at_kw("else")) {
            if (!has_handlers) fail(peek(), "expected 'except' or 'finally' block");
            orelse = parse_optional_else();
        }
        NodePtr final_body;
        if (at_kw("finally")) {
            advance();
            expect_op(":");
            final_body = parse_block();
        }
        if (!has_handlers && !final_body) fail(peek(), "expected 'except' or 'finally' block");
        n->children.push_back(std::move(orelse));
        n->children.push_back(std::move(final_body));
        return finish(std::move(n));
    }

    NodePtr parse_with_item() {
        auto item = make(NodeKind::WithItem, peek());
        item->children.push_back(parse_expression());
        NodePtr target;
        if (at_kw("as")) {
            advance();
            target = parse_star_target();
            set_context(*target, ExprContext::Store);
        }
        item->children.push_back(std::move(target));
        return finish(std::move(item));
    }

    NodePtr parse_with(const Token& start, bool is_async) {
        auto n = make(NodeKind::With, start);
        n->flag = is_async;
        expect_kw("with");
        bool parsed = false;
        if (at_op("(")) {
            const std::size_t save = pos_;
            const int save_line = end_line_, save_col = end_col_;
            try {
                advance();
                std::vector<NodePtr> items;
                while (!at_op(")")) {
                    items.push_back(parse_with_item());
                    if (!at_op(",")) break;
                    advance();
                }
                expect_op(")");
                if (!at_op(":") || items.empty()) fail(peek(), "invalid syntax");
                for (auto& i : items) n->children.push_back(std::move(i));
                parsed = true;
            } catch (const SyntaxError&) {
                pos_ = save;
                end_line_ = save_line;
                end_col_ = save_col;
                n->children.clear();
            }
        }
        if (!parsed) {
            do {
                n->children.push_back(parse_with_item());
            } while (at_op(",") && (advance(), true));
        }
        expect_op(":");
        n->children.push_back(parse_block());
        return finish(std::move(n));
    }

    NodePtr try_parse_match() {
        const std::size_t save = pos_;
        const int save_line = end_line_, save_col = end_col_;
        const Token& start = peek();
        NodePtr subject;
        try {
            advance();
            subject = parse_star_expressions();
            expect_op(":");
            expect(TokenKind::Newline, "newline");
            expect(TokenKind::Indent, "indent");
            if (!at_kw("case")) fail(peek(), "expected 'case'");
        } catch (const SyntaxError&) {
            pos_ = save;
            end_line_ = save_line;
            end_col_ = save_col;
            return nullptr;
        }
        auto n = make(NodeKind::Match, start);
        n->children.push_back(std::move(subject));
        while (at_kw("case")) {
            auto c = make(NodeKind::MatchCase, advance());
            c->children.push_back(parse_patterns());
            NodePtr guard;
            if (at_kw("if")) {
                advance();
                guard = parse_named_expression();
            }
            c->children.push_back(std::move(guard));
            expect_op(":");
            c->children.push_back(parse_block());
            n->children.push_back(finish(std::move(c)));
        }
        expect(TokenKind::Dedent, "dedent");
        return finish(std::move(n));
    }

    // ---- patterns ----------------------------------------------------------

    NodePtr parse_patterns() {
        const Token& start = peek();
        NodePtr first = parse_maybe_star_pattern();
        if (!at_op(",")) return first;
        auto tuple = make(NodeKind::Tuple, start);
        tuple->children.push_back(std::move(first));
        while (at_op(",")) {
            advance();
            if (at_op(":") || at_kw("if")) break;
            tuple->children.push_back(parse_maybe_star_pattern());
        }
        return finish(std::move(tuple));
    }

    NodePtr parse_maybe_star_pattern() {
        if (at_op("*")) {
            auto star = make(NodeKind::Starred, advance());
            auto name = make(NodeKind::Name, peek());
            name->text = expect_name();
            name->ctx = ExprContext::Store;
            star->children.push_back(finish(std::move(name)));
            return finish(std::move(star));
        }
        return parse_as_pattern();
    }

    NodePtr parse_as_pattern() {
        NodePtr p = parse_or_pattern();
        if (!at_kw("as")) return p;
        advance();
        auto n = make_at(NodeKind::NamedExpr, *p);
        auto name = make(NodeKind::Name, peek());
        name->text = expect_name();
        name->ctx = ExprContext::Store;
        n->children.push_back(finish(std::move(name)));
        n->children.push_back(std::move(p));
        return finish(std::move(n));
    }

    NodePtr parse_or_pattern() {
        NodePtr p = parse_closed_pattern();
        while (at_op("|")) {
            advance();
            auto n = make_at(NodeKind::BinOp, *p);
            n->text = "|";
            n->children.push_back(std::move(p));
            n->children.push_back(parse_closed_pattern());
            p = finish(std::move(n));
        }
        return p;
    }

    NodePtr parse_closed_pattern() {
        const Token& t = peek();
        if (at_op("-") || t.kind == TokenKind::Number) return parse_arith();
        if (t.kind == TokenKind::String) return parse_strings();
        if (at_kw("None") || at_kw("True") || at_kw("False")) return parse_atom();
        if (at_name()) {
            auto name = make(NodeKind::Name, t);
            name->text = advance().text;
            NodePtr expr = finish(std::move(name));
            bool dotted = false;
            while (at_op(".")) {
                advance();
                auto attr = make_at(NodeKind::Attribute, *expr);
                attr->text = expect_name();
                attr->children.push_back(std::move(expr));
                expr = finish(std::move(attr));
                dotted = true;
            }
            if (at_op("(")) {
                auto call = make_at(NodeKind::Call, *expr);
                call->children.push_back(std::move(expr));
                advance();
                while (!at_op(")")) {
                    if (at_name() && at_op("=", 1)) {
                        auto kw = make(NodeKind::Keyword, peek());
                        kw->text = advance().text;
                        advance();
                        kw->children.push_back(parse_as_pattern());
                        call->children.push_back(finish(std::move(kw)));
                    } else {
                        call->children.push_back(parse_as_pattern());
                    }
                    if (!at_op(",")) break;
                    advance();
                }
                expect_op(")");
                return finish(std::move(call));
            }
            if (!dotted) expr->ctx = ExprContext::Store;
            return expr;
        }
        if (at_op("(") || at_op("[")) {
            const bool paren = at_op("(");
            auto seq = make(paren ? NodeKind::Tuple : NodeKind::List, advance());
            const std::string_view closer = paren ? ")" : "]";
            bool comma = false;
            while (!at_op(closer)) {
                seq->children.push_back(parse_maybe_star_pattern());
                if (!at_op(",")) break;
                advance();
                comma = true;
            }
            expect_op(closer);
            if (paren && seq->children.size() == 1 && !comma && !seq->children[0]->is(NodeKind::Starred))
                return std::move(seq->children[0]);
            return finish(std::move(seq));
        }
        if (at_op("{")) {
            auto dict = make(NodeKind::Dict, advance());
            while (!at_op("}")) {
                auto entry = make(NodeKind::DictEntry, peek());
                if (at_op("**")) {
                    advance();
                    auto name = make(NodeKind::Name, peek());
                    name->text = expect_name();
                    name->ctx = ExprContext::Store;
                    entry->children.push_back(nullptr);
                    entry->children.push_back(finish(std::move(name)));
                } else {
                    entry->children.push_back(parse_closed_pattern());
                    expect_op(":");
                    entry->children.push_back(parse_as_pattern());
                }
                dict->children.push_back(finish(std::move(entry)));
                if (!at_op(",")) break;
                advance();
            }
            expect_op("}");
            return finish(std::move(dict));
        }
        fail(t, "invalid pattern");
    }

    // ---- expressions -------------------------------------------------------

    NodePtr parse_star_expressions() {
        const Token& start = peek();
        NodePtr first = parse_star_expression();
        if (!at_op(",")) return first;
        auto tuple = make(NodeKind::Tuple, start);
        tuple->children.push_back(std::move(first));
        while (at_op(",")) {
            advance();
            if (!starts_expression()) break;
            tuple->children.push_back(parse_star_expression());
        }
        return finish(std::move(tuple));
    }

    NodePtr parse_star_expression() {
        if (at_op("*")) {
            auto n = make(NodeKind::Starred, advance());
            n->children.push_back(parse_bitwise_or());
            return finish(std::move(n));
        }
        return parse_expression();
    }

    NodePtr parse_star_named_expression() {
        if (at_op("*")) {
            auto n = make(NodeKind::Starred, advance());
            n->children.push_back(parse_bitwise_or());
            return finish(std::move(n));
        }
        return parse_named_expression();
    }

    NodePtr parse_star_targets() {
        const Token& start = peek();
        NodePtr first = parse_star_target();
        if (!at_op(",")) return first;
        auto tuple = make(NodeKind::Tuple, start);
        tuple->children.push_back(std::move(first));
        while (at_op(",")) {
            advance();
            if (at_kw("in") || at_op("=") || at_op(":")) break;
            tuple->children.push_back(parse_star_target());
        }
        return finish(std::move(tuple));
    }

    NodePtr parse_star_target() {
        if (at_op("*")) {
            auto n = make(NodeKind::Starred, advance());
            n->children.push_back(parse_bitwise_or());
            return finish(std::move(n));
        }
        return parse_bitwise_or();
    }

    NodePtr parse_named_expression() {
        if (at_name() && at_op(":=", 1)) {
            const Token& t = peek();
            auto n = make(NodeKind::NamedExpr, t);
            auto name = make(NodeKind::Name, t);
            name->text = advance().text;
            name->ctx = ExprContext::Store;
            n->children.push_back(finish(std::move(name)));
            advance();
            n->children.push_back(parse_expression());
            return finish(std::move(n));
        }
        return parse_expression();
    }

    NodePtr parse_expression() {
        if (at_kw("lambda")) return parse_lambda();
        const Token& start = peek();
        NodePtr body = parse_disjunction();
        if (!at_kw("if")) return body;
        advance();
        auto n = make(NodeKind::IfExp, start);
        n->children.push_back(parse_disjunction());
        expect_kw("else");
        n->children.push_back(std::move(body));
        n->children.push_back(parse_expression());
        return finish(std::move(n));
    }

    NodePtr parse_lambda() {
        auto n = make(NodeKind::Lambda, advance());
        n->children.push_back(parse_parameters(false, ":"));
        expect_op(":");
        n->children.push_back(parse_expression());
        return finish(std::move(n));
    }

    NodePtr parse_yield() {
        auto n = make(NodeKind::Yield, advance());
        if (at_kw("from")) {
            advance();
            n->kind = NodeKind::YieldFrom;
            n->children.push_back(parse_expression());
        } else if (starts_expression()) {
            n->children.push_back(parse_star_expressions());
        } else {
            n->children.push_back(nullptr);
        }
        return finish(std::move(n));
    }

    NodePtr parse_bool_chain(std::string_view op, NodePtr (Parser::*next)()) {
        const Token& start = peek();
        NodePtr first = (this->*next)();
        if (!at_kw(op)) return first;
        auto n = make(NodeKind::BoolOp, start);
        n->text = std::string(op);
        n->children.push_back(std::move(first));
        while (at_kw(op)) {
            advance();
            n->children.push_back((this->*next)());
        }
        return finish(std::move(n));
    }

    NodePtr parse_disjunction() { return parse_bool_chain("or", &Parser::parse_conjunction); }
    NodePtr parse_conjunction() { return parse_bool_chain("and", &Parser::parse_inversion); }

    NodePtr parse_inversion() {
        if (at_kw("not")) {
            auto n = make(NodeKind::UnaryOp, advance());
            n->text = "not";
            n->children.push_back(parse_inversion());
            return finish(std::move(n));
        }
        return parse_comparison();
    }

    std::string comparison_operator() {
        const Token& t = peek();
        if (t.kind == TokenKind::Op &&
            (t.text == "<" || t.text == ">" || t.text == "==" || t.text == ">=" || t.text == "<=" || t.text == "!=")) {
            return advance().text;
        }
        if (at_kw("in")) {
            advance();
            return "in";
        }
        if (at_kw("not") && at_kw("in", 1)) {
            advance();
            advance();
            return "not in";
        }
        if (at_kw("is")) {
            advance();
            if (at_kw("not")) {
                advance();
                return "is not";
            }
            return "is";
        }
        return {};
    }

    NodePtr parse_comparison() {
        const Token& start = peek();
        NodePtr left = parse_bitwise_or();
        std::string op = comparison_operator();
        if (op.empty()) return left;
        auto n = make(NodeKind::Compare, start);
        n->children.push_back(std::move(left));
        while (!op.empty()) {
            if (!n->text.empty()) n->text += ",";
            n->text += op;
            n->children.push_back(parse_bitwise_or());
            op = comparison_operator();
        }
        return finish(std::move(n));
    }

    NodePtr parse_binary(std::initializer_list<std::string_view> ops, NodePtr (Parser::*next)()) {
        const Token& start = peek();
        NodePtr left = (this->*next)();
        while (peek().kind == TokenKind::Op &&
               std::find(ops.begin(), ops.end(), std::string_view(peek().text)) != ops.end()) {
            auto n = make(NodeKind::BinOp, start);
            n->text = advance().text;
            n->children.push_back(std::move(left));
            n->children.push_back((this->*next)());
            left = finish(std::move(n));
        }
        return left;
    }

    NodePtr parse_bitwise_or() { return parse_binary({"|"}, &Parser::parse_bitwise_xor); }
    NodePtr parse_bitwise_xor() { return parse_binary({"^"}, &Parser::parse_bitwise_and); }
    NodePtr parse_bitwise_and() { return parse_binary({"&"}, &Parser::parse_shift); }
    NodePtr parse_shift() { return parse_binary({"<<", ">>"}, &Parser::parse_arith); }
    NodePtr parse_arith() { return parse_binary({"+", "-"}, &Parser::parse_term); }
    NodePtr parse_term() { return parse_binary({"*", "/", "//", "%", "@"}, &Parser::parse_factor); }

    NodePtr parse_factor() {
        if (at_op("+") || at_op("-") || at_op("~")) {
            auto n = make(NodeKind::UnaryOp, peek());
            n->text = advance().text;
            n->children.push_back(parse_factor());
            return finish(std::move(n));
        }
        return parse_power();
    }

    NodePtr parse_power() {
        const Token& start = peek();
        NodePtr base;
        if (at_kw("await")) {
            auto n = make(NodeKind::Await, advance());
            n->children.push_back(parse_primary());
            base = finish(std::move(n));
        } else {
            base = parse_primary();
        }
        if (!at_op("**")) return base;
        advance();
        auto n = make(NodeKind::BinOp, start);
        n->text = "**";
        n->children.push_back(std::move(base));
        n->children.push_back(parse_factor());
        return finish(std::move(n));
    }

    NodePtr parse_primary() {
        const Token& start = peek();
        NodePtr e = parse_atom();
        while (true) {
            if (at_op(".")) {
                advance();
                auto n = make(NodeKind::Attribute, start);
                n->text = expect_name();
                n->children.push_back(std::move(e));
                e = finish(std::move(n));
            } else if (at_op("(")) {
                advance();
                auto n = make(NodeKind::Call, start);
                n->children.push_back(std::move(e));
                parse_call_arguments(*n);
                e = finish(std::move(n));
            } else if (at_op("[")) {
                advance();
                auto n = make(NodeKind::Subscript, start);
                n->children.push_back(std::move(e));
                n->children.push_back(parse_slices());
                expect_op("]");
                e = finish(std::move(n));
            } else {
                return e;
            }
        }
    }

    // Parses arguments up to and including the closing ')'.
    void parse_call_arguments(Node& into) {
        const Token& open = toks_[pos_ - 1];
        const std::size_t first_arg = into.children.size();
        bool bare_generator = false;
        while (!at_op(")")) {
            if (at_op("*")) {
                auto s = make(NodeKind::Starred, advance());
                s->children.push_back(parse_expression());
                into.children.push_back(finish(std::move(s)));
            } else if (at_op("**")) {
                auto kw = make(NodeKind::Keyword, advance());
                kw->children.push_back(parse_expression());
                into.children.push_back(finish(std::move(kw)));
            } else if (at_name() && at_op("=", 1)) {
                auto kw = make(NodeKind::Keyword, peek());
                kw->text = advance().text;
                advance();
                kw->children.push_back(parse_expression());
                into.children.push_back(finish(std::move(kw)));
            } else {
                NodePtr e = parse_named_expression();
                if (at_comprehension()) {
                    e = parse_comprehension(NodeKind::GeneratorExp, std::move(e));
                    bare_generator = true;
                }
                into.children.push_back(std::move(e));
            }
            if (!at_op(",")) break;
            advance();
        }
        expect_op(")");
        // A lone generator argument shares the call's parentheses.
        if (bare_generator && into.children.size() == first_arg + 1) {
            Node& gen = *into.children.back();
            gen.line = open.line;
            gen.col = open.col;
            gen.end_line = end_line_;
            gen.end_col = end_col_;
        }
    }

    NodePtr parse_slices() {
        const Token& start = peek();
        NodePtr first = parse_slice();
        if (!at_op(",")) return first;
        auto tuple = make(NodeKind::Tuple, start);
        tuple->children.push_back(std::move(first));
        while (at_op(",")) {
            advance();
            if (at_op("]")) break;
            tuple->children.push_back(parse_slice());
        }
        return finish(std::move(tuple));
    }

    NodePtr parse_slice() {
        const Token& start = peek();
        NodePtr lower;
        if (!at_op(":")) {
            NodePtr e = at_op("*") ? parse_star_expression() : parse_named_expression();
            if (!at_op(":")) return e;
            lower = std::move(e);
        }
        auto n = make(NodeKind::Slice, start);
        expect_op(":");
        NodePtr upper, step;
        if (!at_op("]") && !at_op(",") && !at_op(":")) upper = parse_expression();
        if (at_op(":")) {
            advance();
            if (!at_op("]") && !at_op(",")) step = parse_expression();
        }
        n->children.push_back(std::move(lower));
        n->children.push_back(std::move(upper));
        n->children.push_back(std::move(step));
        return finish(std::move(n));
    }

    bool at_comprehension() const { return at_kw("for") || (at_kw("async") && at_kw("for", 1)); }

    NodePtr parse_comprehension(NodeKind kind, NodePtr elt, NodePtr value = nullptr) {
        auto n = make_at(kind, *elt);
        n->children.push_back(std::move(elt));
        if (value) n->children.push_back(std::move(value));
        while (at_comprehension()) {
            auto comp = make(NodeKind::Comprehension, peek());
            if (at_kw("async")) {
                comp->flag = true;
                advance();
            }
            expect_kw("for");
            NodePtr target = parse_star_targets();
            set_context(*target, ExprContext::Store);
            expect_kw("in");
            comp->children.push_back(std::move(target));
            comp->children.push_back(parse_disjunction());
            while (at_kw("if")) {
                advance();
                comp->children.push_back(parse_disjunction());
            }
            n->children.push_back(finish(std::move(comp)));
        }
        return finish(std::move(n));
    }

    NodePtr parse_atom() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::Name: {
                if (t.text == "True" || t.text == "False" || t.text == "None") {
                    auto n = make(NodeKind::Constant, advance());
                    n->const_kind = t.text == "True" ? ConstKind::True
                                    : t.text == "False" ? ConstKind::False
                                                        : ConstKind::None;
                    n->text = t.text;
                    return finish(std::move(n));
                }
                if (is_keyword(t.text)) fail(t, "invalid syntax");
                auto n = make(NodeKind::Name, t);
                n->text = advance().text;
                return finish(std::move(n));
            }
            case TokenKind::Number: {
                auto n = make(NodeKind::Constant, t);
                const std::string& s = t.text;
                const bool radix = s.size() > 1 && s[0] == '0' &&
                                   std::string_view("xXoObB").find(s[1]) != std::string_view::npos;
                if (!radix && (s.back() == 'j' || s.back() == 'J')) n->const_kind = ConstKind::Complex;
                else if (!radix && s.find_first_of(".eE") != std::string::npos) n->const_kind = ConstKind::Float;
                else n->const_kind = ConstKind::Int;
                n->text = advance().text;
                return finish(std::move(n));
            }
            case TokenKind::String: return parse_strings();
            case TokenKind::Op:
                if (t.text == "...") {
                    auto n = make(NodeKind::Constant, advance());
                    n->const_kind = ConstKind::Ellipsis;
                    n->text = "...";
                    return finish(std::move(n));
                }
                if (t.text == "(") return parse_paren();
                if (t.text == "[") return parse_list();
                if (t.text == "{") return parse_brace();
                break;
            default: break;
        }
        fail(t, "invalid syntax");
    }

    NodePtr parse_paren() {
        const Token& open = advance();
        if (at_op(")")) {
            advance();
            return finish(make(NodeKind::Tuple, open));
        }
        if (at_kw("yield")) {
            NodePtr y = parse_yield();
            expect_op(")");
            return y;
        }
        NodePtr first = parse_star_named_expression();
        if (at_comprehension()) {
            NodePtr gen = parse_comprehension(NodeKind::GeneratorExp, std::move(first));
            expect_op(")");
            gen->line = open.line;
            gen->col = open.col;
            return finish(std::move(gen));
        }
        if (!at_op(",")) {
            expect_op(")");
            return first;
        }
        auto tuple = make(NodeKind::Tuple, open);
        tuple->children.push_back(std::move(first));
        while (at_op(",")) {
            advance();
            if (at_op(")")) break;
            tuple->children.push_back(parse_star_named_expression());
        }
        expect_op(")");
        return finish(std::move(tuple));
    }

    NodePtr parse_list() {
        const Token& open = advance();
        auto list = make(NodeKind::List, open);
        if (at_op("]")) {
            advance();
            return finish(std::move(list));
        }
        NodePtr first = parse_star_named_expression();
        if (at_comprehension()) {
            NodePtr comp = parse_comprehension(NodeKind::ListComp, std::move(first));
            expect_op("]");
            comp->line = open.line;
            comp->col = open.col;
            return finish(std::move(comp));
        }
        list->children.push_back(std::move(first));
        while (at_op(",")) {
            advance();
            if (at_op("]")) break;
            list->children.push_back(parse_star_named_expression());
        }
        expect_op("]");
        return finish(std::move(list));
    }

    NodePtr parse_dict_entry() {
        auto entry = make(NodeKind::DictEntry, peek());
        if (at_op("**")) {
            advance();
            entry->children.push_back(nullptr);
            entry->children.push_back(parse_bitwise_or());
        } else {
            entry->children.push_back(parse_expression());
            expect_op(":");
            entry->children.push_back(parse_expression());
        }
        return finish(std::move(entry));
    }

    NodePtr parse_brace() {
        const Token& open = advance();
        if (at_op("}")) {
            advance();
            return finish(make(NodeKind::Dict, open));
        }
        const bool dict_like = at_op("**") || [&] {
            // Look ahead for a top-level ':' before ',', 'for' or '}'.
            int depth = 0;
            for (std::size_t k = 0;; ++k) {
                const Token& t = peek(k);
                if (t.kind == TokenKind::EndMarker) return false;
                if (t.kind == TokenKind::Op) {
                    if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
                    else if (t.text == ")" || t.text == "]" || t.text == "}") {
                        if (depth == 0) return false;
                        --depth;
                    } else if (depth == 0 && t.text == ":") return true;
                    else if (depth == 0 && (t.text == "," || t.text == ":=")) return false;
                } else if (depth == 0 && t.kind == TokenKind::Name && (t.text == "for" || t.text == "lambda")) {
                    return false;
                }
            }
        }();
        if (dict_like) {
            auto dict = make(NodeKind::Dict, open);
            NodePtr first = parse_dict_entry();
            if (first->child(0) && at_comprehension()) {
                NodePtr key = std::move(first->children[0]);
                NodePtr value = std::move(first->children[1]);
                NodePtr comp = parse_comprehension(NodeKind::DictComp, std::move(key), std::move(value));
                expect_op("}");
                comp->line = open.line;
                comp->col = open.col;
                return finish(std::move(comp));
            }
            dict->children.push_back(std::move(first));
            while (at_op(",")) {
                advance();
                if (at_op("}")) break;
                dict->children.push_back(parse_dict_entry());
            }
            expect_op("}");
            return finish(std::move(dict));
        }
        NodePtr first = parse_star_named_expression();
        if (at_comprehension()) {
            NodePtr comp = parse_comprehension(NodeKind::SetComp, std::move(first));
            expect_op("}");
            comp->line = open.line;
            comp->col = open.col;
            return finish(std::move(comp));
        }
        auto set = make(NodeKind::Set, open);
        set->children.push_back(std::move(first));
        while (at_op(",")) {
            advance();
            if (at_op("}")) break;
            set->children.push_back(parse_star_named_expression());
        }
        expect_op("}");
        return finish(std::move(set));
    }

    // ---- strings -----------------------------------------------------------

    NodePtr parse_strings() {
        const Token& first = peek();
        std::vector<const Token*> parts;
        while (at(TokenKind::String)) parts.push_back(&advance());
        bool any_f = false, any_bytes = false, any_text = false;
        for (const Token* t : parts) {
            const StringPrefix p = string_prefix(t->text);
            any_f |= p.fstring;
            (p.bytes ? any_bytes : any_text) = true;
        }
        if (any_bytes && any_text) fail(first, "cannot mix bytes and nonbytes literals");
        if (!any_f) {
            auto n = make(NodeKind::Constant, first);
            n->const_kind = any_bytes ? ConstKind::Bytes : ConstKind::Str;
            for (const Token* t : parts) n->text += decode_string_literal(t->text);
            return finish(std::move(n));
        }
        auto joined = make(NodeKind::JoinedStr, first);
        std::string pending;
        for (const Token* t : parts) {
            const StringPrefix p = string_prefix(t->text);
            if (!p.fstring) {
                pending += decode_string_literal(t->text);
                continue;
            }
            parse_fstring(*t, p.raw, *joined, pending);
        }
        flush_literal(*joined, pending, first);
        return finish(std::move(joined));
    }

    void flush_literal(Node& joined, std::string& pending, const Token& at_tok) const {
        if (pending.empty()) return;
        auto c = make(NodeKind::Constant, at_tok);
        c->const_kind = ConstKind::Str;
        c->text = std::move(pending);
        c->end_line = at_tok.end_line;
        c->end_col = at_tok.end_col;
        joined.children.push_back(std::move(c));
        pending.clear();
    }

    // Locates line/col of byte `offset` inside a (possibly multi-line) token.
    static std::pair<int, int> position_in_token(const Token& t, std::size_t offset) {
        int line = t.line;
        int col = t.col;
        for (std::size_t i = 0; i < offset && i < t.text.size(); ++i) {
            if (t.text[i] == '\n') {
                ++line;
                col = 0;
            } else {
                ++col;
            }
        }
        return {line, col};
    }

    static std::size_t skip_quoted(std::string_view body, std::size_t k) {
        const char q = body[k];
        const bool triple = k + 2 < body.size() && body[k + 1] == q && body[k + 2] == q;
        k += triple ? 3 : 1;
        while (k < body.size()) {
            if (body[k] == '\\') {
                k += 2;
                continue;
            }
            if (body[k] == q) {
                if (!triple) return k + 1;
                if (k + 2 < body.size() && body[k + 1] == q && body[k + 2] == q) return k + 3;
            }
            ++k;
        }
        return k;
    }

    // Index just past the replacement-field expression starting at `k`.
    static std::size_t field_expression_end(std::string_view body, std::size_t k) {
        int depth = 0;
        while (k < body.size()) {
            const char ch = body[k];
            if (ch == '\'' || ch == '"') {
                k = skip_quoted(body, k);
                continue;
            }
            if (ch == '(' || ch == '[' || ch == '{') {
                ++depth;
            } else if (ch == ')' || ch == ']' || ch == '}') {
                if (depth == 0) return k;
                --depth;
            } else if (depth == 0) {
                if (ch == '!' && (k + 1 >= body.size() || body[k + 1] != '=')) return k;
                if (ch == ':') return k;
                if (ch == '=' && k + 1 < body.size() && body[k + 1] != '=' && k > 0 &&
                    std::string_view("=!<>").find(body[k - 1]) == std::string_view::npos) {
                    std::size_t j = k + 1;
                    while (j < body.size() && body[j] == ' ') ++j;
                    if (j < body.size() && (body[j] == '}' || body[j] == '!' || body[j] == ':')) return k;
                }
            }
            ++k;
        }
        return k;
    }

    NodePtr parse_field(const Token& tok, std::size_t body_offset, std::string_view body,
                        std::size_t start, std::size_t end) const {
        const std::string_view text = body.substr(start, end - start);
        if (text.find_first_not_of(" \t\n\r") == std::string_view::npos)
            fail(tok, "f-string: empty expression not allowed");
        const auto [line, col] = position_in_token(tok, body_offset + start);
        try {
            return parse_expression_text(text, line, col);
        } catch (const SyntaxError& e) {
            throw SyntaxError(line, col, e.what());
        }
    }

    void parse_fstring(const Token& tok, bool raw, Node& joined, std::string& pending) {
        std::size_t body_offset = 0;
        const std::string_view body = string_body(tok.text, &body_offset);
        std::string literal;
        auto flush = [&] {
            pending += raw ? literal : unescape(literal, false);
            literal.clear();
        };
        std::size_t i = 0;
        while (i < body.size()) {
            const char c = body[i];
            if (c == '{') {
                if (i + 1 < body.size() && body[i + 1] == '{') {
                    literal += '{';
                    i += 2;
                    continue;
                }
                const std::size_t expr_end = field_expression_end(body, i + 1);
                if (expr_end >= body.size()) fail(tok, "f-string: expecting '}'");
                if (body[expr_end] == '=') {
                    // Self-documenting field: the source text is emitted verbatim.
                    std::size_t k = expr_end + 1;
                    while (k < body.size() && body[k] == ' ') ++k;
                    flush();
                    pending += body.substr(i + 1, k - i - 1);
                }
                flush();
                flush_literal(joined, pending, tok);
                auto fv = make(NodeKind::FormattedValue, tok);
                fv->children.push_back(parse_field(tok, body_offset, body, i + 1, expr_end));
                std::size_t k = expr_end;
                if (body[k] == '=') ++k;
                while (k < body.size() && body[k] == ' ') ++k;
                if (k < body.size() && body[k] == '!') k += 2;
                if (k < body.size() && body[k] == ':') {
                    ++k;
                    int depth = 0;
                    while (k < body.size() && !(depth == 0 && body[k] == '}')) {
                        if (body[k] == '{') {
                            const std::size_t nested_end = field_expression_end(body, k + 1);
                            if (nested_end >= body.size()) fail(tok, "f-string: expecting '}'");
                            fv->children.push_back(parse_field(tok, body_offset, body, k + 1, nested_end));
                            k = nested_end;
                            while (k < body.size() && body[k] != '}') ++k;
                        }
                        ++k;
                    }
                }
                if (k >= body.size() || body[k] != '}') fail(tok, "f-string: expecting '}'");
                fv->end_line = tok.end_line;
                fv->end_col = tok.end_col;
                joined.children.push_back(std::move(fv));
                i = k + 1;
            } else if (c == '}') {
                if (i + 1 < body.size() && body[i + 1] == '}') {
                    literal += '}';
                    i += 2;
                    continue;
                }
                fail(tok, "f-string: single '}' is not allowed");
            } else if (c == '\\' && !raw && i + 2 < body.size() && body[i + 1] == 'N' && body[i + 2] == '{') {
                const std::size_t close = body.find('}', i);
                const std::size_t stop = close == std::string_view::npos ? body.size() : close + 1;
                literal += body.substr(i, stop - i);
                i = stop;
            } else if (c == '\\' && !raw && i + 1 < body.size()) {
                literal += c;
                literal += body[i + 1];
                i += 2;
            } else {
                literal += c;
                ++i;
            }
        }
        flush();
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int end_line_ = 1;
    int end_col_ = 0;
};

NodePtr parse_expression_text(std::string_view text, int base_line, int base_col) {
    std::string wrapped;
    wrapped.reserve(text.size() + 2);
    wrapped += '(';
    wrapped += text;
    wrapped += ')';
    Parser parser(tokenize(wrapped));
    NodePtr e = parser.parse_wrapped_expression();
    shift_positions(*e, base_line, base_col);
    return e;
}

}  // namespace

std::string decode_string_literal(std::string_view raw) {
    const StringPrefix p = string_prefix(raw);
    const std::string_view body = string_body(raw);
    return p.raw ? std::string(body) : unescape(body, p.bytes);
}

NodePtr parse_module(std::string_view source) {
    if (source.find('\r') != std::string_view::npos) {
        // Universal newlines, as the interpreter reads source files.
        std::string normalized;
        normalized.reserve(source.size());
        for (std::size_t i = 0; i < source.size(); ++i) {
            if (source[i] == '\r') {
                normalized += '\n';
                if (i + 1 < source.size() && source[i + 1] == '\n') ++i;
            } else {
                normalized += source[i];
            }
        }
        Parser parser(tokenize(normalized));
        return parser.parse_file();
    }
    Parser parser(tokenize(source));
    return parser.parse_file();
}

}  // namespace codequal::py
