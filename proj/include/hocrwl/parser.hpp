// Surface syntax: curried program files and query expressions.
//
// Program files are UTF-8 text with one rule `lhs -> rhs` per line. Blank
// lines and `--` comments are ignored. Optional header lines
// `constructor c/N` and `function f/N` declare symbols explicitly; anything
// else is inferred: rule heads become functions (arity = parameter count),
// identifiers never defined become constructors (arity = longest observed
// application). Uppercase-initial identifiers are variables; juxtaposition is
// left-associative application; `e1 + e2` is sugar for `plus e1 e2`.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hocrwl/syntax.hpp"

namespace hocrwl {

struct ParseError : Error {
  ParseError(const std::string& message, int line, int column)
      : Error("parse error at " + std::to_string(line) + ":" +
              std::to_string(column) + ": " + message),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct ParseOptions {
  bool allow_bottom = false;  // accept `_|_` in query expressions
};

Program parse_program(std::string_view src, ProgramFlags flags = {});

ExprPtr parse_expr(std::string_view src, const Signature& sig,
                   ParseOptions opts = {});

/// Minimal-parentheses curried rendering; parse_expr(print_expr(e)) == e.
std::string print_expr(const ExprPtr& e);
std::string print_rule(const ProgramRule& r);
/// Full round-trip form: explicit signature header followed by the rules.
std::string print_program(const Program& p);
std::string print_context(const ContextPtr& c);
std::string print_substitution(const PSubstitution& theta);

/// Peano addition over {0, s}, included on demand by the CLI.
const std::string& prelude_source();

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

}  // namespace hocrwl
