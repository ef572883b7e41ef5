#include "codequal/source.hpp"

#include <algorithm>
#include <cctype>

#include "codequal/parser.hpp"

namespace codequal {

namespace {

using py::Node;
using py::NodeKind;

enum class Scope { Module, Class, Function };

bool block_has_docstring(const Node& block) {
    const Node* first = block.child(0);
    return first && first->is(NodeKind::ExprStmt) && first->child(0)->is_string();
}

class Indexer {
public:
    explicit Indexer(const SourceUnit& unit) : unit_(unit) {}

    void visit_block(const Node& block, const std::string& prefix, Scope scope) {
        for (const auto& stmt : block.children) visit_statement(*stmt, prefix, scope);
    }

    std::vector<FunctionInfo> functions;
    std::vector<ClassInfo> classes;

private:
    void visit_statement(const Node& stmt, const std::string& prefix, Scope scope) {
        if (stmt.is(NodeKind::FunctionDef)) {
            FunctionInfo info;
            info.name = stmt.text;
            info.qualified_name = prefix + stmt.text;
            info.is_method = scope == Scope::Class;
            info.is_nested = scope == Scope::Function;
            info.is_decorated = !py::function_decorators(stmt).children.empty();
            for (const auto& param : py::function_args(stmt).children) {
                ++info.parameter_count;
                if (param->child(0)) ++info.annotated_parameter_count;
            }
            info.has_return_annotation = py::function_returns(stmt) != nullptr;
            info.has_docstring = block_has_docstring(py::function_body(stmt));
            info.span = unit_.span_of(stmt);
            info.node = &stmt;
            functions.push_back(std::move(info));
            visit_block(py::function_body(stmt), prefix + stmt.text + ".<locals>.", Scope::Function);
            return;
        }
        if (stmt.is(NodeKind::ClassDef)) {
            ClassInfo info;
            info.name = stmt.text;
            info.qualified_name = prefix + stmt.text;
            info.is_nested = scope == Scope::Function;
            info.is_decorated = !py::class_decorators(stmt).children.empty();
            info.has_docstring = block_has_docstring(py::class_body(stmt));
            info.span = unit_.span_of(stmt);
            info.node = &stmt;
            classes.push_back(std::move(info));
            visit_block(py::class_body(stmt), prefix + stmt.text + ".", Scope::Class);
            return;
        }
        // Definitions inside compound statements keep the enclosing scope.
        for (const auto& child : stmt.children) {
            if (!child) continue;
            if (child->is(NodeKind::Block)) {
                visit_block(*child, prefix, scope);
            } else if (child->is(NodeKind::MatchCase)) {
                for (const auto& part : child->children)
                    if (part && part->is(NodeKind::Block)) visit_block(*part, prefix, scope);
            }
        }
    }

    const SourceUnit& unit_;
};

}  // namespace

int count_lines(std::string_view text) {
    const auto newlines = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
    return newlines + (!text.empty() && text.back() != '\n' ? 1 : 0);
}

SourceUnit::SourceUnit(std::string file_label, std::string source_text, std::shared_ptr<const py::Node> root)
    : file_label_(std::move(file_label)),
      source_text_(std::move(source_text)),
      root_(std::move(root)),
      line_count_(count_lines(source_text_)) {
    line_offsets_.push_back(0);
    for (std::size_t i = 0; i < source_text_.size(); ++i)
        if (source_text_[i] == '\n') line_offsets_.push_back(i + 1);
}

Span SourceUnit::span_of(const py::Node& node) const {
    Span s{file_label_, node.line, node.col, node.end_line, node.end_col};
    // Clamp to the file so that layout-only positions stay inside it.
    const int last = std::max(1, line_count_);
    s.start_line = std::clamp(s.start_line, 1, last);
    s.end_line = std::clamp(s.end_line, s.start_line, last);
    if (s.start_line == s.end_line && s.end_col < s.start_col) s.end_col = s.start_col;
    return s;
}

std::string_view SourceUnit::line_text(int line) const {
    if (line < 1 || line > static_cast<int>(line_offsets_.size())) return {};
    const std::size_t begin = line_offsets_[static_cast<std::size_t>(line - 1)];
    std::size_t end = source_text_.find('\n', begin);
    if (end == std::string::npos) end = source_text_.size();
    std::string_view text(source_text_);
    text = text.substr(begin, end - begin);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    return text;
}

SourceUnit index_structure(SourceUnit unit) {
    Indexer indexer(unit);
    indexer.visit_block(*unit.root_, "", Scope::Module);
    unit.functions_ = std::move(indexer.functions);
    unit.classes_ = std::move(indexer.classes);
    return unit;
}

ParseResult parse_source(std::string file_label, std::string source_text) {
    try {
        std::shared_ptr<const py::Node> root = py::parse_module(source_text);
        return index_structure(SourceUnit(std::move(file_label), std::move(source_text), std::move(root)));
    } catch (const py::SyntaxError& e) {
        const int last = std::max(1, count_lines(source_text));
        return ParseFailure{std::move(file_label), std::clamp(e.line(), 1, last), e.col(), e.what()};
    }
}

namespace {

std::string_view trim_left(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::string_view trim(std::string_view s) {
    s = trim_left(s);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Tag following an opening fence: the first whitespace-delimited word.
std::string fence_tag(std::string_view after_ticks) {
    after_ticks = trim(after_ticks);
    const std::size_t end = after_ticks.find_first_of(" \t{");
    return std::string(after_ticks.substr(0, end));
}

bool is_closing_fence(std::string_view line) {
    line = trim_left(line);
    if (line.substr(0, 3) != "```") return false;
    std::size_t i = 3;
    while (i < line.size() && line[i] == '`') ++i;
    return i >= line.size() || !std::isalnum(static_cast<unsigned char>(line[i]));
}

}  // namespace

std::vector<CodeBlock> extract_code_blocks(std::string_view text) {
    std::vector<CodeBlock> blocks;
    CodeBlock* open = nullptr;
    int line_no = 0;
    std::size_t pos = 0;
    auto begin_block = [&](std::string_view after_ticks, int line, int col) {
        CodeBlock b;
        b.language_tag = fence_tag(after_ticks);
        b.span_in_completion = Span{"<completion>", line, col, line, col};
        blocks.push_back(std::move(b));
        open = &blocks.back();
    };
    while (pos < text.size()) {
        ++line_no;
        std::size_t end = text.find('\n', pos);
        const bool last_line = end == std::string_view::npos;
        if (last_line) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const std::size_t indent = line.size() - trim_left(line).size();
        if (open) {
            if (is_closing_fence(line)) {
                std::size_t ticks = indent;
                while (ticks < line.size() && line[ticks] == '`') ++ticks;
                open->complete = true;
                open->span_in_completion.end_line = line_no;
                open->span_in_completion.end_col = static_cast<int>(ticks);
                open = nullptr;
                const std::size_t next = line.find("```", ticks);
                if (next != std::string_view::npos) {
                    std::size_t after = next;
                    while (after < line.size() && line[after] == '`') ++after;
                    begin_block(line.substr(after), line_no, static_cast<int>(next));
                }
            } else {
                open->body += line;
                open->body += '\n';
                open->span_in_completion.end_line = line_no;
                open->span_in_completion.end_col = static_cast<int>(line.size());
            }
        } else if (line.substr(indent, 3) == "```") {
            std::size_t after = indent;
            while (after < line.size() && line[after] == '`') ++after;
            begin_block(line.substr(after), line_no, static_cast<int>(indent));
        }
        pos = last_line ? text.size() : end + 1;
    }
    return blocks;
}

bool is_candidate_block(const CodeBlock& block) {
    std::string tag;
    for (char c : block.language_tag) tag += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return tag.empty() || tag == "python" || tag == "py";
}

}  // namespace codequal
