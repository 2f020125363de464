#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "hocrwl/analysis.hpp"
#include "hocrwl/corpus.hpp"
#include "hocrwl/parser.hpp"
#include "hocrwl/transforms.hpp"
#include "support.hpp"

using namespace hocrwl;
using hocrwl::testing::example_program;
using hocrwl::testing::extra_var_program_one;
using hocrwl::testing::extra_var_program_two;
using hocrwl::testing::qe;

namespace {

std::set<std::string> avoid_of(const Program& p) {
  std::set<std::string> out;
  for (const auto& [n, a] : p.sig.constructors()) {
    (void)a;
    out.insert(n);
  }
  for (const auto& [n, a] : p.sig.functions()) {
    (void)a;
    out.insert(n);
  }
  return out;
}

}  // namespace

TEST_CASE("symbol analyses") {
  Program p = example_program();
  CHECK(defs(p.rules) == std::set<std::string>{"plus", "g", "h", "f", "f'",
                                               "fadd", "fdouble"});
  CHECK(defs(std::span<const ProgramRule>{}).empty());

  CHECK(fs(qe(p, "fdouble f 0"), p.sig) ==
        std::set<std::string>{"fdouble", "f"});
  CHECK(fs(qe(p, "0"), p.sig).empty());

  Program two = extra_var_program_two();
  CHECK(fs(qe(two, "f (Y X)"), two.sig) == std::set<std::string>{"f"});
  CHECK(defs(std::span(two.rules).subspan(0, 1)) ==
        std::set<std::string>{"f"});
}

TEST_CASE("safe extension validation") {
  Program p = example_program();

  SUBCASE("defining an occupied symbol is rejected") {
    ProgramRule bad{"g", {qe(p, "0")}, qe(p, "s 0")};
    auto res = safe_extend(p, {bad}, {}, {});
    REQUIRE(std::holds_alternative<Diagnostic>(res));
    CHECK(std::get<Diagnostic>(res).kind == DiagnosticKind::UnsafeExtension);
    CHECK(std::get<Diagnostic>(res).symbol == "g");
  }

  SUBCASE("declared-but-unused symbols may be defined") {
    Program one = extra_var_program_one();  // g/1 declared, no rules, unused
    ProgramRule ext{"g", {qe(one, "0")}, qe(one, "1")};
    std::vector<ExprPtr> prot{qe(one, "f 0"), qe(one, "f 1")};
    auto res = safe_extend(one, {ext}, {}, prot);
    REQUIRE(std::holds_alternative<SafeExtension>(res));
    CHECK(std::get<SafeExtension>(res).merged.rules.size() ==
          one.rules.size() + 1);
  }

  SUBCASE("protected expressions block definitions") {
    Program one = extra_var_program_one();
    ProgramRule ext{"g", {qe(one, "0")}, qe(one, "1")};
    std::vector<ExprPtr> prot{qe(one, "g 0")};  // now g occurs protected
    auto res = safe_extend(one, {ext}, {}, prot);
    CHECK(std::holds_alternative<Diagnostic>(res));
  }
}

TEST_CASE("safe extensions preserve denotations without extra variables") {
  Program p = example_program();
  // a fresh helper that even calls base functions
  SignatureDelta delta;
  delta.functions = {{"probe", 1}};
  ProgramRule ext{"probe", {Expr::variable("X")}, qe(p, "fdouble f' X")};
  std::vector<ExprPtr> prot{qe(p, "fdouble f 0")};
  auto res = safe_extend(p, {ext}, delta, prot);
  REQUIRE(std::holds_alternative<SafeExtension>(res));
  SafeExtInvariance inv = safe_extension_invariance_check(
      std::get<SafeExtension>(res), qe(p, "fdouble f 0"), {});
  CHECK(inv.equal);
  CHECK(inv.both_complete);
}

TEST_CASE("extra variables break safe-extension invariance") {
  SearchBudget b;
  b.max_pattern_size = 3;

  SUBCASE("unconstrained application gains a value") {
    Program one = extra_var_program_one();
    ProgramRule ext{"g", {qe(one, "0")}, qe(one, "1")};
    std::vector<ExprPtr> prot{qe(one, "f 0"), qe(one, "f 1")};
    auto res = safe_extend(one, {ext}, {}, prot);
    REQUIRE(std::holds_alternative<SafeExtension>(res));
    const SafeExtension& se = std::get<SafeExtension>(res);

    SafeExtInvariance zero = safe_extension_invariance_check(se, qe(one, "f 0"), b);
    CHECK_FALSE(zero.equal);
    REQUIRE(zero.gained.size() == 1);
    CHECK(print_expr(zero.gained[0]) == "1");
    CHECK(zero.lost.empty());

    SafeExtInvariance onearg =
        safe_extension_invariance_check(se, qe(one, "f 1"), b);
    CHECK(onearg.equal);  // g 0 -> 1 never fires on argument 1
  }

  SUBCASE("the value smuggles through a second function") {
    Program two = extra_var_program_two();
    ProgramRule ext{"g", {qe(two, "0")}, qe(two, "1")};
    std::vector<ExprPtr> prot{qe(two, "h 0"), qe(two, "h 1")};
    auto res = safe_extend(two, {ext}, {}, prot);
    REQUIRE(std::holds_alternative<SafeExtension>(res));
    const SafeExtension& se = std::get<SafeExtension>(res);

    DenotationSet base0 = denote(se.base, qe(two, "h 0"), b);
    CHECK(base0.elements().size() == 1);  // just _|_
    CHECK(base0.contains(Expr::bottom()));
    SafeExtInvariance h0 = safe_extension_invariance_check(se, qe(two, "h 0"), b);
    CHECK_FALSE(h0.equal);
    bool gained2 = false;
    for (const auto& t : h0.gained) gained2 |= print_expr(t) == "2";
    CHECK(gained2);

    DenotationSet m1 = denote(se.merged, qe(two, "h 1"), b);
    CHECK_FALSE(m1.contains(qe(two, "2")));
  }
}

TEST_CASE("hat transformation") {
  Program p = example_program();

  CHECK(print_expr(hat(qe(p, "s _|_"), HatVariant::HO)) == "s #bot");
  CHECK(print_expr(hat(qe(p, "X"), HatVariant::HO)) == "X");
  CHECK(print_expr(hat(qe(p, "X"), HatVariant::FO)) == "X");
  CHECK(hat(qe(p, "s (s _|_)"), HatVariant::HO)->total());

  ExprPtr fo = hat(qe(p, "fadd f' f'"), HatVariant::FO);
  CHECK(print_expr(fo) == "#fadd_2 #f'_0 #f'_0");

  // first-order markers are checkable once their constructors are declared
  Distinguisher d =
      gen_distinguisher(qe(p, "fadd f' f'"), HatVariant::FO, avoid_of(p));
  auto res = safe_extend(p, d.rules, d.delta, {});
  REQUIRE(std::holds_alternative<SafeExtension>(res));
  CHECK(is_fo_pattern(d.hat_target, std::get<SafeExtension>(res).merged.sig));
}

TEST_CASE("distinguisher generation") {
  Program p = example_program();

  SUBCASE("variable target") {
    Distinguisher d = gen_distinguisher(qe(p, "X"), HatVariant::HO, avoid_of(p));
    REQUIRE(d.rules.size() == 1);
    CHECK(print_rule(d.rules[0]) == "#g_X U -> U");
  }

  SUBCASE("constant target") {
    Distinguisher d = gen_distinguisher(qe(p, "0"), HatVariant::HO, avoid_of(p));
    REQUIRE(d.rules.size() == 1);
    CHECK(print_rule(d.rules[0]) == "#g_0 0 -> 0");
  }

  SUBCASE("partial target") {
    Distinguisher d =
        gen_distinguisher(qe(p, "s _|_"), HatVariant::HO, avoid_of(p));
    std::set<std::string> rules;
    for (const auto& r : d.rules) rules.insert(print_rule(r));
    CHECK(rules == std::set<std::string>{"#g_bot X -> #bot",
                                         "#g_s_bot (s X1) -> s (#g_bot X1)"});
  }

  SUBCASE("shared subpatterns share one rule symbol") {
    Distinguisher d =
        gen_distinguisher(qe(p, "fadd (s 0) (s 0)"), HatVariant::HO,
                          avoid_of(p));
    // subpatterns: 0, s 0 (shared), fadd (s 0) (s 0) -> three rules
    CHECK(d.rules.size() == 3);
  }

  SUBCASE("merged programs validate and stay extra-variable free") {
    Rng rng(31);
    for (int i = 0; i < 40; ++i) {
      Program rp = random_program(rng);
      ExprPtr t = random_pattern_with_vars(rng, rp.sig, 3);
      if (!is_pattern(t, rp.sig)) continue;
      for (HatVariant variant : {HatVariant::HO, HatVariant::FO}) {
        Distinguisher d = gen_distinguisher(t, variant, avoid_of(rp));
        for (const auto& r : d.rules) CHECK(rule_extra_variables(r).empty());
        auto res = safe_extend(rp, d.rules, d.delta, {});
        REQUIRE(std::holds_alternative<SafeExtension>(res));
        CHECK(validate_program(std::get<SafeExtension>(res).merged).empty());
        CHECK(d.hat_target->total());
        if (variant == HatVariant::FO)
          CHECK(is_fo_pattern(d.hat_target,
                              std::get<SafeExtension>(res).merged.sig));
      }
    }
  }
}

TEST_CASE("distinguish builds an observable split") {
  Program p = example_program();
  SearchBudget b;

  SUBCASE("the duplicating context separates f from f' applied") {
    auto report =
        distinguish(p, qe(p, "fdouble f 0"), qe(p, "fdouble f' 0"), b);
    REQUIRE(report.has_value());
    CHECK(print_expr(report->witness) == "s 0");
    CHECK_FALSE(report->witness_in_first);
    CHECK(report->context == "#g_s_0 [ ]");
    CHECK_FALSE(report->hat_in_first_obs);
    CHECK(report->hat_in_second_obs);
  }

  SUBCASE("identical expressions have no witness") {
    CHECK_FALSE(distinguish(p, qe(p, "f"), qe(p, "f"), b).has_value());
  }

  SUBCASE("higher-order witness for the bare functions") {
    auto report = distinguish(p, qe(p, "f"), qe(p, "f'"), b);
    REQUIRE(report.has_value());
    CHECK(print_expr(report->witness) == "g");
    CHECK(report->witness_in_first);
    CHECK(report->hat_in_first_obs);
    CHECK_FALSE(report->hat_in_second_obs);
  }

  SUBCASE("round-trip on random triples") {
    Rng rng(41);
    SearchBudget budget;
    budget.max_results = 3000;
    budget.max_search_nodes = 20000;
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
      Program rp = random_program(rng);
      ExprPtr e = random_expr(rng, rp, 4);
      ExprPtr t = random_pattern(rng, rp.sig, 3, true);
      DenotationSet before = denote(rp, e, budget);
      if (!before.complete_at_bound()) continue;
      for (HatVariant variant : {HatVariant::HO, HatVariant::FO}) {
        Distinguisher d = gen_distinguisher(t, variant, avoid_of(rp));
        std::vector<ExprPtr> prot{e};
        auto res = safe_extend(rp, d.rules, d.delta, prot);
        REQUIRE(std::holds_alternative<SafeExtension>(res));
        const SafeExtension& se = std::get<SafeExtension>(res);
        DenotationSet after =
            denote(se.merged, Expr::apply(Expr::symbol(d.root_symbol), e),
                   budget.with_or_depth(budget.max_or_depth + t->size() + 1));
        if (!after.complete_at_bound()) continue;
        CHECK(before.contains(t) == after.contains(d.hat_target));
        ++checked;
      }
    }
    CHECK(checked > 30);
  }
}
