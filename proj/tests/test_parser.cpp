#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hocrwl/corpus.hpp"
#include "hocrwl/parser.hpp"
#include "support.hpp"

using namespace hocrwl;
using hocrwl::testing::example_program;
using hocrwl::testing::qe;

TEST_CASE("signature inference on the example program") {
  Program p = example_program();
  CHECK(p.sig.is_function("g"));
  CHECK(p.sig.arity("g") == 1);
  CHECK(p.sig.arity("h") == 1);
  CHECK(p.sig.arity("f") == 0);
  CHECK(p.sig.arity("f'") == 1);
  CHECK(p.sig.arity("fadd") == 3);
  CHECK(p.sig.arity("fdouble") == 1);
  CHECK(p.sig.arity("plus") == 2);
  CHECK(p.sig.is_constructor("0"));
  CHECK(p.sig.arity("0") == 0);
  CHECK(p.sig.is_constructor("s"));
  CHECK(p.sig.arity("s") == 1);
  CHECK(p.rules.size() == 9);  // prelude (2) + example (7)
}

TEST_CASE("explicit declarations and edge cases") {
  Program p = parse_program(
      "constructor nil/0\n"
      "constructor cons/2\n"
      "function len/1\n"
      "len nil -> nil\n");
  CHECK(p.sig.arity("cons") == 2);

  CHECK(parse_program("").rules.empty());
  CHECK(parse_program("-- just a comment\n\n").rules.empty());

  // extra variables are a fatal validation error by default
  CHECK_THROWS_AS(parse_program("f X -> Y X\n"), Error);
  ProgramFlags extra;
  extra.extra_variables_allowed = true;
  CHECK(parse_program("f X -> Y X\n", extra).rules.size() == 1);

  // conflicting rule arities
  CHECK_THROWS_AS(parse_program("f X -> 0\nf X Y -> 0\n"), ParseError);
  // rule head declared as a constructor
  CHECK_THROWS_AS(parse_program("constructor f/1\nf X -> X\n"), ParseError);
  // two arrows on one line
  CHECK_THROWS_AS(parse_program("f X -> 0 -> 1\n"), ParseError);
}

TEST_CASE("expression parsing") {
  Program p = example_program();

  ExprPtr e = parse_expr("fdouble f 0", p.sig);
  Spine s = decompose(e);
  CHECK(s.head->name() == "fdouble");
  CHECK(s.args.size() == 2);

  CHECK(equal(parse_expr("(F X) + (G X)", p.sig),
              qe(p, "plus (F X) (G X)")));

  // infix is left-associative and binds looser than application
  CHECK(equal(parse_expr("s 0 + 0 + 0", p.sig),
              qe(p, "plus (plus (s 0) 0) 0")));

  CHECK_THROWS_AS(parse_expr("s 0 0", p.sig), ParseError);    // arity overflow
  CHECK_THROWS_AS(parse_expr("missing", p.sig), ParseError);  // undeclared
  CHECK_THROWS_AS(parse_expr("_|_", p.sig), ParseError);      // needs the flag
  CHECK(equal(parse_expr("_|_", p.sig, {.allow_bottom = true}),
              Expr::bottom()));
  CHECK_THROWS_AS(parse_expr("(s 0", p.sig), ParseError);
  CHECK_THROWS_AS(parse_expr("", p.sig), ParseError);
}

TEST_CASE("printing") {
  Program p = example_program();
  CHECK(print_expr(qe(p, "s (s 0)")) == "s (s 0)");
  CHECK(print_expr(Expr::bottom()) == "_|_");
  CHECK(print_expr(qe(p, "fadd f' f'")) == "fadd f' f'");
  CHECK(print_expr(qe(p, "fdouble (fadd g h) 0")) == "fdouble (fadd g h) 0");

  ContextPtr c = Context::apply_left(
      Context::apply_right(Expr::symbol("fdouble"), Context::hole()),
      Expr::symbol("0"));
  CHECK(print_context(c) == "fdouble [ ] 0");
  CHECK(print_context(Context::hole()) == "[ ]");
}

TEST_CASE("round-trips") {
  Program p = example_program();

  SUBCASE("print/parse on random expressions") {
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
      ExprPtr e = random_expr(rng, p, 6);
      CHECK(equal(parse_expr(print_expr(e), p.sig, {.allow_bottom = true}), e));
    }
    for (int i = 0; i < 300; ++i) {
      ExprPtr t = random_pattern(rng, p.sig, 5, true);
      CHECK(equal(parse_expr(print_expr(t), p.sig, {.allow_bottom = true}), t));
    }
  }

  SUBCASE("program print/parse is stable") {
    std::string printed = print_program(p);
    Program q = parse_program(printed, p.flags);
    REQUIRE(q.rules.size() == p.rules.size());
    for (std::size_t i = 0; i < p.rules.size(); ++i)
      CHECK(print_rule(q.rules[i]) == print_rule(p.rules[i]));
    CHECK(print_program(q) == printed);
  }
}

TEST_CASE("identifier lexicon") {
  // apostrophes, digits and '#' are identifier characters; case picks
  // variables apart from symbols
  Program p = parse_program("f' X -> q#1 X\nq#1 Y0 -> Y0\n");
  CHECK(p.sig.is_function("f'"));
  CHECK(p.sig.is_function("q#1"));
  ExprPtr e = parse_expr("f' Y0", p.sig);
  Spine s = decompose(e);
  CHECK(s.args[0]->kind() == ExprKind::Variable);
}
