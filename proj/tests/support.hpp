// Shared fixtures for the test suites.
#pragma once

#include <string>

#include "hocrwl/parser.hpp"
#include "hocrwl/syntax.hpp"

namespace hocrwl::testing {

// The running example: two extensionally equivalent nondeterministic
// functions whose sharing behavior differs under duplication.
inline const char* example_source() {
  return R"(g X -> 0
h X -> s 0
f -> g
f -> h
f' X -> f X
fadd F G X -> (F X) + (G X)
fdouble F -> fadd F F
)";
}

inline Program example_program(bool left_fo = false) {
  ProgramFlags flags;
  flags.left_fo_required = left_fo;
  return parse_program(std::string(prelude_source()) + example_source(), flags);
}

inline ExprPtr qe(const Program& p, const std::string& text) {
  return parse_expr(text, p.sig, {.allow_bottom = true});
}

// Extra-variable counterexample: a rule whose right side applies an
// unconstrained variable, so safe extensions can change its meaning.
inline Program extra_var_program_one() {
  ProgramFlags flags;
  flags.extra_variables_allowed = true;
  return parse_program(
      "constructor 0/0\n"
      "constructor 1/0\n"
      "function g/1\n"
      "f X -> Y X\n",
      flags);
}

// Same phenomenon with a constructor available at every arity.
inline Program extra_var_program_two() {
  ProgramFlags flags;
  flags.extra_variables_allowed = true;
  return parse_program(
      "constructor 0/0\n"
      "constructor 1/0\n"
      "constructor 2/0\n"
      "constructor c/1\n"
      "function g/1\n"
      "f 1 -> 2\n"
      "h X -> f (Y X)\n",
      flags);
}

}  // namespace hocrwl::testing
