#pragma once

#include <string>
#include <string_view>

#include "codequal/ast.hpp"
#include "codequal/lexer.hpp"

namespace codequal::py {

/// Parses a complete module. Throws SyntaxError at the first error.
NodePtr parse_module(std::string_view source);

/// Decodes the value of a (non f-) string literal token, prefix and quotes
/// included. Escape handling follows Python for the common escapes.
std::string decode_string_literal(std::string_view raw);

}  // namespace codequal::py
