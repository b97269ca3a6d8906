#pragma once

#include <string>

#include "hwut/ast.hpp"

namespace hwut {

// Parses one module of the supported SystemVerilog subset.
//
// Throws Error with kSyntaxError for malformed text and kUnsupportedConstruct
// for syntax that is valid SystemVerilog but outside the subset (delays,
// instantiation, generate, 4-state literals, ...). Both carry line/column.
DesignAst parse_design(const DesignSource& source);

// Canonical text for an AST. parse_design(pretty_print(ast)) == ast.
std::string pretty_print(const DesignAst& ast);
std::string print_expr(const Expr& expr);
std::string print_stmt(const Stmt& stmt, int indent = 0);

}  // namespace hwut
