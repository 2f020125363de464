#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hocrwl/calculus.hpp"
#include "hocrwl/corpus.hpp"
#include "hocrwl/syntax.hpp"
#include "support.hpp"

using namespace hocrwl;
using hocrwl::testing::example_program;
using hocrwl::testing::qe;

TEST_CASE("pattern discipline") {
  Program p = example_program();
  const Signature& sig = p.sig;

  CHECK(is_pattern(qe(p, "s X"), sig));
  CHECK(is_pattern(qe(p, "0"), sig));
  CHECK(is_pattern(qe(p, "s"), sig));
  CHECK(is_pattern(qe(p, "f'"), sig));
  CHECK(is_pattern(qe(p, "fadd f' f'"), sig));
  CHECK(is_pattern(qe(p, "X"), sig));
  CHECK(is_pattern(Expr::bottom(), sig));
  CHECK(is_pattern(qe(p, "s _|_"), sig));

  // f is a 0-ary function: neither f nor anything applying it is a pattern
  CHECK_FALSE(is_pattern(qe(p, "f"), sig));
  CHECK_FALSE(is_pattern(qe(p, "fadd f f"), sig));
  CHECK_FALSE(is_pattern(qe(p, "g 0"), sig));  // fully applied function

  // over-applied constructor, built directly since the parser rejects it
  ExprPtr junk = Expr::apply(Expr::apply(Expr::symbol("s"), Expr::symbol("0")),
                             Expr::symbol("0"));
  CHECK_FALSE(is_pattern(junk, sig));

  Signature empty;
  CHECK_THROWS_AS(is_pattern(Expr::symbol("nope"), empty), Error);
}

TEST_CASE("first-order patterns") {
  Program p = example_program();
  CHECK(is_fo_pattern(qe(p, "s (s 0)"), p.sig));
  CHECK(is_fo_pattern(qe(p, "X"), p.sig));
  CHECK_FALSE(is_fo_pattern(qe(p, "f'"), p.sig));
  CHECK_FALSE(is_fo_pattern(qe(p, "s"), p.sig));  // under-applied constructor
  CHECK_FALSE(is_fo_pattern(qe(p, "fadd f' f'"), p.sig));

  // every first-order pattern is a pattern
  for (const auto& t : enumerate_patterns(p.sig, 3))
    if (is_fo_pattern(t, p.sig)) CHECK(is_pattern(t, p.sig));
}

TEST_CASE("context application") {
  Program p = example_program();

  CHECK(equal(apply_context(Context::hole(), qe(p, "f 0")), qe(p, "f 0")));

  // fdouble [ ] 0
  ContextPtr c = Context::apply_left(
      Context::apply_right(Expr::symbol("fdouble"), Context::hole()),
      Expr::symbol("0"));
  CHECK(equal(apply_context(c, qe(p, "f")), qe(p, "fdouble f 0")));

  // (plus 0) [ ]
  ContextPtr r = Context::apply_right(qe(p, "plus 0"), Context::hole());
  CHECK(equal(apply_context(r, qe(p, "f 0")), qe(p, "0 + (f 0)")));

  SUBCASE("exactly one hole occurrence") {
    Rng rng(7);
    ExprPtr marker = Expr::variable("HOLEMARK");
    for (int i = 0; i < 50; ++i) {
      ContextPtr ctx = random_context(rng, p, 3);
      ExprPtr filled = apply_context(ctx, marker);
      int count = 0;
      auto walk = [&](auto&& self, const ExprPtr& e) -> void {
        if (e->kind() == ExprKind::Variable && e->name() == "HOLEMARK") ++count;
        if (e->kind() == ExprKind::Apply) {
          self(self, e->fun());
          self(self, e->arg());
        }
      };
      walk(walk, filled);
      CHECK(count == 1);
    }
  }
}

TEST_CASE("substitution") {
  Program p = example_program();

  PSubstitution theta;
  theta.bind("F", qe(p, "f'"));
  theta.bind("G", qe(p, "f'"));
  theta.bind("X", qe(p, "0"));
  CHECK(equal(apply_substitution(qe(p, "(F X) + (G X)"), theta),
              qe(p, "(f' 0) + (f' 0)")));

  CHECK(equal(apply_substitution(qe(p, "0"), theta), qe(p, "0")));

  PSubstitution just_x;
  just_x.bind("X", qe(p, "0"));
  CHECK(equal(apply_substitution(qe(p, "Y X"), just_x), qe(p, "Y 0")));

  // identity on expressions not mentioning the domain
  CHECK(equal(apply_substitution(qe(p, "s Z"), just_x), qe(p, "s Z")));
}

TEST_CASE("matching") {
  Program p = example_program();

  auto m1 = match_pattern(qe(p, "s X"), qe(p, "s _|_"));
  REQUIRE(m1.has_value());
  CHECK(equal(*m1->find("X"), Expr::bottom()));

  CHECK_FALSE(match_pattern(qe(p, "s X"), Expr::bottom()).has_value());

  // higher-order pattern parameter
  auto m2 = match_pattern(qe(p, "fadd F G"), qe(p, "fadd g h"));
  REQUIRE(m2.has_value());
  CHECK(equal(apply_substitution(qe(p, "fadd F G"), *m2), qe(p, "fadd g h")));

  SUBCASE("round-trip on random pattern/value pairs") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
      Program rp = random_program(rng);
      ExprPtr value = random_pattern(rng, rp.sig, 4, true);
      auto mv = match_pattern(Expr::variable("V"), value);
      REQUIRE(mv.has_value());
      CHECK(equal(apply_substitution(Expr::variable("V"), *mv), value));
      auto ms = match_pattern(value, value);
      if (ms) CHECK(equal(apply_substitution(value, *ms), value));
    }
  }
}

TEST_CASE("program validation") {
  SUBCASE("the example program is left-FO") {
    Program p = example_program(true);
    CHECK(validate_program(p).empty());
  }

  SUBCASE("extra variable rejected by default") {
    Program p;
    p.sig.add_constructor("0", 0);
    p.sig.add_function("f", 1);
    p.rules.push_back({"f",
                       {Expr::variable("X")},
                       Expr::apply(Expr::variable("Y"), Expr::variable("X"))});
    auto diags = validate_program(p);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].kind == DiagnosticKind::ExtraVariable);
    CHECK(diags[0].symbol == "Y");

    p.flags.extra_variables_allowed = true;
    CHECK(validate_program(p).empty());
  }

  SUBCASE("non-linear left side") {
    Program p;
    p.sig.add_constructor("0", 0);
    p.sig.add_function("pair", 2);
    p.rules.push_back(
        {"pair", {Expr::variable("X"), Expr::variable("X")}, Expr::symbol("0")});
    auto diags = validate_program(p);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].kind == DiagnosticKind::NonLinearParams);
  }

  SUBCASE("higher-order parameter under left-FO") {
    Program p;
    p.flags.left_fo_required = true;
    p.sig.add_constructor("0", 0);
    p.sig.add_function("k", 1);
    p.sig.add_function("u", 1);
    p.rules.push_back({"k", {Expr::symbol("u")}, Expr::symbol("0")});
    auto diags = validate_program(p);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].kind == DiagnosticKind::HoPatternParam);
  }

  SUBCASE("arity and undeclared symbols") {
    Program p;
    p.sig.add_constructor("0", 0);
    p.sig.add_function("f", 2);
    p.rules.push_back({"f", {Expr::variable("X")}, Expr::symbol("0")});
    auto diags = validate_program(p);
    CHECK(!diags.empty());
    CHECK(diags[0].kind == DiagnosticKind::ArityMismatch);

    Program q;
    q.sig.add_function("f", 0);
    q.rules.push_back({"f", {}, Expr::symbol("mystery")});
    auto diags2 = validate_program(q);
    REQUIRE(!diags2.empty());
    CHECK(diags2[0].kind == DiagnosticKind::UndeclaredSymbol);
  }
}

TEST_CASE("signature invariants") {
  Signature sig;
  sig.add_constructor("c", 1);
  CHECK_THROWS_AS(sig.add_function("c", 0), Error);
  CHECK_THROWS_AS(sig.add_constructor("c", 2), Error);
  CHECK_THROWS_AS(sig.add_constructor("_|_", 0), Error);
  CHECK_THROWS_AS(sig.add_constructor("d", -1), Error);
  sig.add_constructor("c", 1);  // identical redeclaration is fine
  CHECK(sig.arity("c") == 1);
}

TEST_CASE("spine decomposition") {
  Program p = example_program();
  ExprPtr e = qe(p, "fadd f' f' 0");
  Spine s = decompose(e);
  CHECK(s.head->name() == "fadd");
  REQUIRE(s.args.size() == 3);
  CHECK(equal(compose(s.head, s.args), e));
}
