#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "hocrwl/analysis.hpp"
#include "hocrwl/corpus.hpp"
#include "hocrwl/letrw.hpp"
#include "hocrwl/parser.hpp"
#include "support.hpp"

using namespace hocrwl;
using hocrwl::testing::example_program;
using hocrwl::testing::qe;

namespace {

std::set<std::string> printed(const std::vector<ExprPtr>& xs) {
  std::set<std::string> out;
  for (const auto& x : xs) out.insert(print_expr(x));
  return out;
}

}  // namespace

TEST_CASE("observations") {
  Program p = example_program();
  SearchBudget b;

  CHECK(printed(observe(p, qe(p, "fdouble f 0"), ObsKind::HO, b).values) ==
        std::set<std::string>{"0", "s (s 0)"});
  CHECK(printed(observe(p, qe(p, "fdouble f' 0"), ObsKind::HO, b).values) ==
        std::set<std::string>{"0", "s 0", "s (s 0)"});
  CHECK(printed(observe(p, qe(p, "f"), ObsKind::HO, b).values) ==
        std::set<std::string>{"g", "h"});
  CHECK(observe(p, qe(p, "f"), ObsKind::FO, b).values.empty());

  SUBCASE("observation equals denotation restricted to total patterns") {
    Rng rng(5);
    for (int i = 0; i < 25; ++i) {
      ExprPtr e = random_expr(rng, p, 4);
      Observation o = observe(p, e, ObsKind::HO, b);
      DenotationSet d = denote(p, e, b);
      CHECK(printed(o.values) == printed(d.total_elements()));
      Observation fo = observe(p, e, ObsKind::FO, b);
      for (const auto& t : fo.values) CHECK(is_fo_pattern(t, p.sig));
      for (const auto& t : o.values)
        if (is_fo_pattern(t, p.sig))
          CHECK(printed(fo.values).count(print_expr(t)) == 1);
    }
  }

  SUBCASE("both engines compute the same observations") {
    SearchBudget deep = b.with_or_depth(10);
    for (const char* text : {"fdouble f 0", "fdouble f' 0", "f 0", "h 0"}) {
      Observation o = observe(p, qe(p, text), ObsKind::HO, deep);
      REQUIRE(o.exhausted);
      ReachResult r = reachable_patterns(p, qe(p, text), 200);
      REQUIRE(r.exhausted);
      CHECK(printed(o.values) == printed(r.patterns));
    }
  }
}

TEST_CASE("extensional equivalence") {
  Program p = example_program();
  SearchBudget b;
  b.max_pattern_size = 3;

  SUBCASE("f and f' cannot be told apart by arguments") {
    ExtEquivVerdict v = ext_equiv(p, qe(p, "f"), qe(p, "f'"), 1, b);
    CHECK(v.equivalent);
  }

  SUBCASE("g and h differ at the first probe") {
    ExtEquivVerdict v = ext_equiv(p, qe(p, "g"), qe(p, "h"), 1, b);
    REQUIRE_FALSE(v.equivalent);
    REQUIRE(v.witness_args.size() == 1);
    CHECK(print_expr(v.witness_args[0]) == "0");
    // the split at that argument includes the value s 0 on the h side
    DenotationSet dg = denote(p, qe(p, "g 0"), b);
    DenotationSet dh = denote(p, qe(p, "h 0"), b);
    CHECK_FALSE(dg.contains(qe(p, "s 0")));
    CHECK(dh.contains(qe(p, "s 0")));
  }

  SUBCASE("reflexivity") {
    CHECK(ext_equiv(p, qe(p, "f"), qe(p, "f"), 3, b.with_or_depth(4))
              .equivalent);
  }

  SUBCASE("equivalence persists at higher arity once established") {
    SearchBudget tiny = b;
    tiny.max_pattern_size = 1;  // keep the n=2 grid small
    CHECK(ext_equiv(p, qe(p, "f"), qe(p, "f'"), 1, tiny).equivalent);
    CHECK(ext_equiv(p, qe(p, "f"), qe(p, "f'"), 2, tiny).equivalent);
  }
}

TEST_CASE("tabulated extensional semantics") {
  Program p = example_program();
  SearchBudget b;
  b.max_pattern_size = 2;

  ExtSemantics sf = ext_semantics(p, qe(p, "f"), 1, b);
  ExtSemantics sf2 = ext_semantics(p, qe(p, "f'"), 1, b);
  CHECK(ext_semantics_equal(sf, sf2));

  // the entry at argument 0 is the bounded denotation of `f 0`
  bool found = false;
  for (const auto& [args, den] : sf.table) {
    if (args.size() == 1 && print_expr(args[0]) == "0") {
      found = true;
      CHECK(printed(den.elements()) ==
            std::set<std::string>{"_|_", "0", "s _|_", "s 0"});
    }
  }
  CHECK(found);

  ExtSemantics sg = ext_semantics(p, qe(p, "g"), 1, b);
  ExtSemantics sh = ext_semantics(p, qe(p, "h"), 1, b);
  CHECK_FALSE(ext_semantics_equal(sg, sh));

  SUBCASE("zero arity tabulates the denotation itself") {
    ExtSemantics s0 = ext_semantics(p, qe(p, "fdouble f 0"), 0, b);
    REQUIRE(s0.table.size() == 1);
    CHECK(s0.table[0].first.empty());
    CHECK(printed(s0.table[0].second.elements()) ==
          std::set<std::string>{"_|_", "0", "s _|_", "s (s _|_)", "s (s 0)"});
  }

  SUBCASE("table equality agrees with the pairwise check") {
    CHECK(ext_equiv(p, qe(p, "f"), qe(p, "f'"), 1, b).equivalent ==
          ext_semantics_equal(sf, sf2));
    CHECK(ext_equiv(p, qe(p, "g"), qe(p, "h"), 1, b).equivalent ==
          ext_semantics_equal(sg, sh));
  }
}

TEST_CASE("compositionality") {
  Program p = example_program();
  SearchBudget b;

  SUBCASE("the example decomposition") {
    ContextPtr c = Context::apply_left(
        Context::apply_right(Expr::symbol("fdouble"), Context::hole()),
        Expr::symbol("0"));
    CompositionalityVerdict v =
        check_compositionality(p, qe(p, "f"), c, b.with_or_depth(10));
    CHECK(v.holds);
    CHECK(v.strict);
  }

  SUBCASE("a pattern in the empty context") {
    CompositionalityVerdict v =
        check_compositionality(p, qe(p, "s (s 0)"), Context::hole(), b);
    CHECK(v.holds);
    CHECK(v.strict);
  }

  SUBCASE("random instances at stabilized budgets") {
    Rng rng(23);
    int strict_checked = 0;
    for (int i = 0; i < 60; ++i) {
      Program rp = random_program(rng);
      ExprPtr e = random_expr(rng, rp, 3);
      ContextPtr c = random_context(rng, rp, 2);
      SearchBudget budget;
      budget.max_or_depth = 8;
      budget.max_results = 3000;
      budget.max_search_nodes = 20000;
      CompositionalityVerdict v = check_compositionality(rp, e, c, budget);
      if (v.strict) {
        ++strict_checked;
        CHECK(v.holds);
      }
    }
    CHECK(strict_checked > 20);
  }
}

TEST_CASE("unsoundness witness search") {
  Program p = example_program();
  SearchBudget b;

  SUBCASE("extensionally equal functions split under first-order probes") {
    UnsoundnessResult r =
        unsoundness_witness(p, qe(p, "f"), qe(p, "f'"), 1, ObsKind::FO, b);
    REQUIRE(r.status == UnsoundnessStatus::WitnessFound);
    CHECK(printed(r.split).count("s 0") == 1);
    std::string ctx = print_context(r.context);
    CHECK(ctx.find("fdouble") != std::string::npos);
  }

  SUBCASE("already-distinguished expressions are not applicable") {
    UnsoundnessResult r =
        unsoundness_witness(p, qe(p, "g"), qe(p, "h"), 1, ObsKind::FO, b);
    CHECK(r.status == UnsoundnessStatus::NotApplicable);
    CHECK_FALSE(r.equiv.equivalent);
  }

  SUBCASE("identical expressions yield nothing") {
    SearchBudget small = b;
    small.max_pattern_size = 1;
    UnsoundnessResult r = unsoundness_witness(p, qe(p, "g"), qe(p, "g"), 1,
                                              ObsKind::FO, small, 200);
    CHECK(r.status == UnsoundnessStatus::NoneFound);
  }
}
