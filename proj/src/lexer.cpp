#include "codequal/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace codequal::py {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",     "assert", "async", "await", "break",
    "class", "continue", "def",   "del",      "elif",   "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",     "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",    "while",  "with",  "yield",
};

// Longest match first.
constexpr std::array<std::string_view, 48> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", ">>", "<<", "<=", ">=", "==",
    "!=",  "+=",  "-=",  "*=",  "/=",  "%=", "&=", "|=", "^=", "@=", "+",  "-",  "*",  "/",
    "%",   "@",   "&",   "|",   "^",   "~",  "<",  ">",  "(",  ")",  "[",  "]",  "{",  "}",
    ",",   ":",   ";",   ".",   "=",   "!",
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view word) {
    if (word.size() > 2) return false;
    std::string lower;
    for (char c : word) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower == "r" || lower == "u" || lower == "b" || lower == "f" || lower == "br" ||
           lower == "rb" || lower == "fr" || lower == "rf";
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        bool line_start = true;
        while (true) {
            if (line_start && brackets_.empty()) {
                if (!handle_indentation()) break;
                line_start = false;
            }
            if (pos_ >= src_.size()) break;
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\f') {
                ++pos_;
            } else if (c == '\n' || c == '\r') {
                const int l = line_;
                const int cl = col();
                consume_newline();
                if (brackets_.empty()) {
                    emit_newline(l, cl);
                    line_start = true;
                }
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
            } else if (c == '\\') {
                ++pos_;
                if (pos_ >= src_.size()) throw SyntaxError(line_, col(), "unexpected EOF while parsing");
                if (src_[pos_] != '\n' && src_[pos_] != '\r')
                    throw SyntaxError(line_, col(), "unexpected character after line continuation character");
                consume_newline();
            } else if (ident_start(static_cast<unsigned char>(c))) {
                lex_name_or_prefixed_string();
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && pos_ + 1 < src_.size() &&
                        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                lex_number();
            } else if (c == '"' || c == '\'') {
                lex_string(pos_);
            } else {
                lex_operator();
            }
        }
        if (!brackets_.empty()) {
            const auto& open = brackets_.back();
            throw SyntaxError(open.line, open.col, std::string("'") + open.ch + "' was never closed");
        }
        emit_newline(line_, col());
        while (indents_.size() > 1) {
            indents_.pop_back();
            push(TokenKind::Dedent, "", line_, col(), line_, col());
        }
        push(TokenKind::EndMarker, "", line_, col(), line_, col());
        return std::move(tokens_);
    }

private:
    struct OpenBracket {
        char ch;
        int line;
        int col;
    };

    int col() const { return static_cast<int>(pos_ - line_begin_); }

    void push(TokenKind kind, std::string text, int l, int c, int el, int ec) {
        tokens_.push_back(Token{kind, std::move(text), l, c, el, ec});
    }

    void emit_newline(int l, int c) {
        if (tokens_.empty()) return;
        const TokenKind last = tokens_.back().kind;
        if (last == TokenKind::Newline || last == TokenKind::Indent || last == TokenKind::Dedent) return;
        push(TokenKind::Newline, "", l, c, l, c + 1);
    }

    void consume_newline() {
        if (src_[pos_] == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
        ++pos_;
        ++line_;
        line_begin_ = pos_;
    }

    // Returns false at end of input.
    bool handle_indentation() {
        while (true) {
            int width = 0;
            std::size_t p = pos_;
            while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
                if (src_[p] == ' ') ++width;
                else if (src_[p] == '\t') width = (width / 8 + 1) * 8;
                else width = 0;
                ++p;
            }
            if (p >= src_.size()) {
                pos_ = p;
                return false;
            }
            const char c = src_[p];
            if (c == '#' || c == '\n' || c == '\r') {
                pos_ = p;
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
                if (pos_ >= src_.size()) return false;
                consume_newline();
                continue;
            }
            pos_ = p;
            if (width > indents_.back()) {
                if (tokens_.empty()) throw SyntaxError(line_, col(), "unexpected indent");
                indents_.push_back(width);
                push(TokenKind::Indent, "", line_, col(), line_, col());
            } else {
                while (width < indents_.back()) {
                    indents_.pop_back();
                    push(TokenKind::Dedent, "", line_, col(), line_, col());
                }
                if (width != indents_.back())
                    throw SyntaxError(line_, col(), "unindent does not match any outer indentation level");
            }
            return true;
        }
    }

    void lex_name_or_prefixed_string() {
        const std::size_t start = pos_;
        const int l = line_;
        const int c = col();
        while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string_view word = src_.substr(start, pos_ - start);
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') && is_string_prefix(word)) {
            lex_string(start);
            return;
        }
        push(TokenKind::Name, std::string(word), l, c, line_, col());
    }

    void lex_number() {
        const std::size_t start = pos_;
        const int c = col();
        auto digits = [&](auto pred) {
            while (pos_ < src_.size() && (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
        };
        auto is_dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
        if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
            std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
            pos_ += 2;
            digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
        } else {
            digits(is_dec);
            if (pos_ < src_.size() && src_[pos_] == '.') {
                ++pos_;
                digits(is_dec);
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                std::size_t save = pos_;
                ++pos_;
                if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
                if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    digits(is_dec);
                else
                    pos_ = save;
            }
            if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) ++pos_;
        }
        push(TokenKind::Number, std::string(src_.substr(start, pos_ - start)), line_, c, line_, col());
    }

    void lex_string(std::size_t start) {
        const int l = line_;
        const int c = static_cast<int>(start - line_begin_);
        const char q = src_[pos_];
        const bool triple = pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q;
        pos_ += triple ? 3 : 1;
        while (true) {
            if (pos_ >= src_.size()) {
                throw SyntaxError(l, c, triple ? "unterminated triple-quoted string literal"
                                               : "unterminated string literal");
            }
            const char ch = src_[pos_];
            if (ch == '\\') {
                ++pos_;
                if (pos_ < src_.size()) {
                    if (src_[pos_] == '\n' || src_[pos_] == '\r') consume_newline();
                    else ++pos_;
                }
                continue;
            }
            if (ch == '\n' || ch == '\r') {
                if (!triple) throw SyntaxError(l, c, "unterminated string literal");
                consume_newline();
                continue;
            }
            if (ch == q) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q) {
                    pos_ += 3;
                    break;
                }
            }
            ++pos_;
        }
        push(TokenKind::String, std::string(src_.substr(start, pos_ - start)), l, c, line_, col());
    }

    void lex_operator() {
        const int c = col();
        for (std::string_view op : kOperators) {
            if (src_.substr(pos_, op.size()) != op) continue;
            if (op == "!") throw SyntaxError(line_, c, "invalid syntax");
            if (op == "(" || op == "[" || op == "{") {
                brackets_.push_back({op[0], line_, c});
            } else if (op == ")" || op == "]" || op == "}") {
                if (brackets_.empty())
                    throw SyntaxError(line_, c, std::string("unmatched '") + op[0] + "'");
                const char open = brackets_.back().ch;
                const char expected = open == '(' ? ')' : open == '[' ? ']' : '}';
                if (expected != op[0]) {
                    throw SyntaxError(line_, c, std::string("closing parenthesis '") + op[0] +
                                                    "' does not match opening parenthesis '" + open + "'");
                }
                brackets_.pop_back();
            }
            pos_ += op.size();
            push(TokenKind::Op, std::string(op), line_, c, line_, col());
            return;
        }
        throw SyntaxError(line_, c, std::string("invalid character '") + src_[pos_] + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_begin_ = 0;
    int line_ = 1;
    std::vector<int> indents_{0};
    std::vector<OpenBracket> brackets_;
    std::vector<Token> tokens_;
};

}  // namespace

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace codequal::py
