#pragma once

#include <string>
#include <tuple>

namespace codequal {

/// Source location of a finding or syntax node. Lines are 1-based, columns
/// 0-based byte offsets; a tab counts as one column. `end_col` is exclusive.
struct Span {
    std::string file_label;
    int start_line = 1;
    int start_col = 0;
    int end_line = 1;
    int end_col = 0;

    bool well_formed() const {
        if (start_line < 1 || start_line > end_line) return false;
        return start_line != end_line || start_col <= end_col;
    }

    friend bool operator==(const Span&, const Span&) = default;

    friend bool operator<(const Span& a, const Span& b) {
        return std::tie(a.file_label, a.start_line, a.start_col, a.end_line, a.end_col) <
               std::tie(b.file_label, b.start_line, b.start_col, b.end_line, b.end_col);
    }
};

}  // namespace codequal
