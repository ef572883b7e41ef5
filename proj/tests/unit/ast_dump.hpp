#pragma once

#include <string>

#include "codequal/ast.hpp"

namespace codequal::testing {

// Canonical one-line rendering shared with tests/oracle/py_ast_dump.py.
std::string dump_ast(const py::Node& module);

}  // namespace codequal::testing
