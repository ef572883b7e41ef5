#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace codequal::py {

enum class TokenKind { Name, Number, String, Op, Newline, Indent, Dedent, EndMarker };

struct Token {
    TokenKind kind = TokenKind::EndMarker;
    std::string text;  // raw source text; strings keep prefix and quotes
    int line = 1;
    int col = 0;
    int end_line = 1;
    int end_col = 0;
};

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(int line, int col, const std::string& message)
        : std::runtime_error(message), line_(line), col_(col) {}
    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

/// Tokenizes Python source into logical tokens with INDENT/DEDENT handling.
/// Throws SyntaxError on malformed input.
std::vector<Token> tokenize(std::string_view source);

bool is_keyword(std::string_view word);

}  // namespace codequal::py
