#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "codequal/ast.hpp"
#include "codequal/span.hpp"

namespace codequal {

struct FunctionInfo {
    std::string qualified_name;  // "f", "C.m", "f.<locals>.g"
    std::string name;
    int parameter_count = 0;     // every declared parameter, variadics included
    int annotated_parameter_count = 0;
    bool has_docstring = false;
    bool has_return_annotation = false;
    bool is_method = false;      // defined directly in a class body
    bool is_nested = false;      // defined inside a function
    bool is_decorated = false;
    Span span;
    const py::Node* node = nullptr;  // the FunctionDef; body is function_body(*node)
};

struct ClassInfo {
    std::string qualified_name;
    std::string name;
    bool has_docstring = false;
    bool is_nested = false;
    bool is_decorated = false;
    Span span;
    const py::Node* node = nullptr;
};

/// Parsed, indexed and immutable view of one Python file or snippet. Copies
/// share the syntax tree, so node pointers stay valid across copies.
class SourceUnit {
public:
    SourceUnit(std::string file_label, std::string source_text, std::shared_ptr<const py::Node> root);

    const std::string& file_label() const { return file_label_; }
    const std::string& source_text() const { return source_text_; }
    const py::Node& syntax_root() const { return *root_; }
    int line_count() const { return line_count_; }
    const std::vector<FunctionInfo>& function_index() const { return functions_; }
    const std::vector<ClassInfo>& class_index() const { return classes_; }

    /// Span of a node labelled with this unit's file.
    Span span_of(const py::Node& node) const;

    /// Text of line `line` (1-based) without its terminator; empty if out of range.
    std::string_view line_text(int line) const;

private:
    friend SourceUnit index_structure(SourceUnit unit);

    std::string file_label_;
    std::string source_text_;
    std::shared_ptr<const py::Node> root_;
    int line_count_ = 0;
    std::vector<std::size_t> line_offsets_;
    std::vector<FunctionInfo> functions_;
    std::vector<ClassInfo> classes_;
};

struct ParseFailure {
    std::string file_label;
    int line = 1;
    int col = 0;
    std::string message;
};

using ParseResult = std::variant<SourceUnit, ParseFailure>;

/// Number of newline-delimited lines: a final line without a terminator counts.
int count_lines(std::string_view text);

ParseResult parse_source(std::string file_label, std::string source_text);

/// Rebuilds the function and class indices of `unit`.
SourceUnit index_structure(SourceUnit unit);

struct CodeBlock {
    std::string language_tag;
    std::string body;
    bool complete = false;
    Span span_in_completion;
};

/// Fenced regions in order. A fence opens on a line starting with three
/// backticks plus an optional tag and closes on a line that starts with three
/// backticks and carries no tag; text after such a closer may open the next
/// block on the same line.
std::vector<CodeBlock> extract_code_blocks(std::string_view completion_text);

/// Tags "python", "py" and the empty tag (any case) mark candidate solutions.
bool is_candidate_block(const CodeBlock& block);

}  // namespace codequal
