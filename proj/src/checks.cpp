#include "hocrwl/checks.hpp"

#include <algorithm>
#include <sstream>

#include "hocrwl/analysis.hpp"
#include "hocrwl/parser.hpp"
#include "hocrwl/transforms.hpp"

namespace hocrwl {

namespace {

std::string render_set(const std::vector<ExprPtr>& xs) {
  std::string out = "{";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += print_expr(xs[i]);
  }
  return out + "}";
}

void note_failure(CheckStats& stats, const CheckOptions& opt,
                  const std::string& line) {
  ++stats.failures;
  stats.notes.push_back(line);
  if (opt.log) (*opt.log) << "FAIL " << line << "\n";
}

// Runs `body(program, rng)` over the corpus or once over a loaded program.
template <class F>
CheckStats drive(const std::optional<Program>& loaded, const CheckOptions& opt,
                 F&& body) {
  CheckStats stats;
  Rng rng(opt.seed);
  if (loaded) {
    body(stats, *loaded, rng);
    return stats;
  }
  CorpusConfig cfg;
  for (int i = 0; i < opt.programs; ++i) {
    Program p = random_program(rng, cfg);
    body(stats, p, rng);
  }
  return stats;
}

}  // namespace

std::optional<DenotationSet> stabilized_denote(const Program& p,
                                               const ExprPtr& e,
                                               const CheckOptions& opt) {
  for (int depth = opt.budget.max_or_depth; depth <= opt.max_stable_depth;
       depth += 2) {
    DenotationSet d = denote(p, e, opt.budget.with_or_depth(depth));
    if (d.complete_at_bound()) return d;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

void oracle_body(CheckStats& stats, const Program& p, Rng& rng,
                 const CheckOptions& opt) {
  for (int k = 0; k < opt.exprs_per_program; ++k) {
    ExprPtr e = random_expr(rng, p, 4);
    ++stats.instances;
    auto den = stabilized_denote(p, e, opt);
    if (!den) {
      ++stats.skipped;
      continue;
    }
    ReachResult reach =
        reachable_patterns(p, e, opt.letrw_steps, opt.letrw_max_states);
    if (!reach.exhausted) {
      ++stats.skipped;
      continue;
    }
    ++stats.checked;
    std::vector<ExprPtr> calc = den->total_elements();
    ExprSet reach_set(reach.patterns.begin(), reach.patterns.end());
    ExprSet calc_set(calc.begin(), calc.end());
    bool agree = calc.size() == reach.patterns.size();
    if (agree)
      for (const auto& t : calc)
        if (!reach_set.count(t)) {
          agree = false;
          break;
        }
    if (!agree) {
      std::ostringstream why;
      why << "oracle mismatch on `" << print_expr(e) << "`: calculus "
          << render_set(calc) << " vs rewriting " << render_set(reach.patterns)
          << " in program\n"
          << print_program(p);
      note_failure(stats, opt, why.str());
    }
  }
}

}  // namespace

CheckStats run_oracle_suite(const CheckOptions& opt) {
  return drive(std::nullopt, opt, [&](CheckStats& s, const Program& p, Rng& r) {
    oracle_body(s, p, r, opt);
  });
}

CheckStats run_oracle_suite_on(const Program& p, const CheckOptions& opt) {
  return drive(p, opt, [&](CheckStats& s, const Program& prog, Rng& r) {
    for (int i = 0; i < std::max(1, opt.programs / 4); ++i)
      oracle_body(s, prog, r, opt);
  });
}

// ---------------------------------------------------------------------------

namespace {

void compositionality_body(CheckStats& stats, const Program& p, Rng& rng,
                           const CheckOptions& opt) {
  for (int k = 0; k < opt.exprs_per_program; ++k) {
    ExprPtr e = random_expr(rng, p, 3);
    ContextPtr c = random_context(rng, p, 3);
    ++stats.instances;

    // stabilize every denotation the theorem statement mentions
    auto inner = stabilized_denote(p, e, opt);
    if (!inner) {
      ++stats.skipped;
      continue;
    }
    SearchBudget budget = inner->bound();
    DenotationSet left = denote(p, apply_context(c, e), budget);
    bool stable = left.complete_at_bound();
    for (const auto& t : inner->elements()) {
      if (!stable) break;
      stable &= denote(p, apply_context(c, t), budget).complete_at_bound();
    }
    if (!stable) {
      ++stats.skipped;
      continue;
    }

    ++stats.checked;
    CompositionalityVerdict v = check_compositionality(p, e, c, budget);
    if (!v.holds || !v.strict) {
      std::ostringstream why;
      why << "compositionality failed for e=`" << print_expr(e) << "` C=`"
          << print_context(c) << "`: only_left=" << render_set(v.only_left)
          << " only_right=" << render_set(v.only_right) << " in program\n"
          << print_program(p);
      note_failure(stats, opt, why.str());
    }
  }
}

}  // namespace

CheckStats run_compositionality_suite(const CheckOptions& opt) {
  return drive(std::nullopt, opt, [&](CheckStats& s, const Program& p, Rng& r) {
    compositionality_body(s, p, r, opt);
  });
}

CheckStats run_compositionality_suite_on(const Program& p,
                                         const CheckOptions& opt) {
  return drive(p, opt, [&](CheckStats& s, const Program& prog, Rng& r) {
    for (int i = 0; i < std::max(1, opt.programs / 4); ++i)
      compositionality_body(s, prog, r, opt);
  });
}

// ---------------------------------------------------------------------------

namespace {

void lemma_roundtrip_body(CheckStats& stats, const Program& p, Rng& rng,
                          const CheckOptions& opt) {
  for (int k = 0; k < opt.exprs_per_program; ++k) {
    ExprPtr e = random_expr(rng, p, 4);
    ExprPtr t = random_pattern_with_vars(rng, p.sig, 3);
    if (!is_pattern(t, p.sig)) continue;
    for (HatVariant variant : {HatVariant::HO, HatVariant::FO}) {
      ++stats.instances;
      auto den = stabilized_denote(p, e, opt);
      if (!den) {
        ++stats.skipped;
        continue;
      }

      std::set<std::string> avoid;
      for (const auto& [name, ar] : p.sig.constructors()) {
        (void)ar;
        avoid.insert(name);
      }
      for (const auto& [name, ar] : p.sig.functions()) {
        (void)ar;
        avoid.insert(name);
      }
      Distinguisher dist = gen_distinguisher(t, variant, avoid);
      std::vector<ExprPtr> prot{e};
      auto ext = safe_extend(p, dist.rules, dist.delta, prot);
      if (std::holds_alternative<Diagnostic>(ext)) {
        note_failure(stats, opt,
                     "distinguisher extension rejected: " +
                         std::get<Diagnostic>(ext).message);
        continue;
      }
      const SafeExtension& se = std::get<SafeExtension>(ext);

      SearchBudget verify =
          den->bound().with_or_depth(den->bound().max_or_depth + t->size() + 1);
      DenotationSet after = denote(
          se.merged, Expr::apply(Expr::symbol(dist.root_symbol), e), verify);
      if (!after.complete_at_bound()) {
        ++stats.skipped;
        continue;
      }
      ++stats.checked;

      bool before_member = den->contains(t);
      bool after_member = after.contains(dist.hat_target);
      bool fo_ok = variant != HatVariant::FO ||
                   is_fo_pattern(dist.hat_target, se.merged.sig);
      if (before_member != after_member || !fo_ok) {
        std::ostringstream why;
        why << "distinguisher round-trip failed (variant "
            << (variant == HatVariant::FO ? "FO" : "HO") << ") for t=`"
            << print_expr(t) << "`, e=`" << print_expr(e) << "`: before="
            << before_member << " after=" << after_member << " in program\n"
            << print_program(p);
        note_failure(stats, opt, why.str());
      }
    }
  }
}

}  // namespace

CheckStats run_lemma_roundtrip_suite(const CheckOptions& opt) {
  return drive(std::nullopt, opt, [&](CheckStats& s, const Program& p, Rng& r) {
    lemma_roundtrip_body(s, p, r, opt);
  });
}

CheckStats run_lemma_roundtrip_suite_on(const Program& p,
                                        const CheckOptions& opt) {
  return drive(p, opt, [&](CheckStats& s, const Program& prog, Rng& r) {
    for (int i = 0; i < std::max(1, opt.programs / 4); ++i)
      lemma_roundtrip_body(s, prog, r, opt);
  });
}

// ---------------------------------------------------------------------------

namespace {

void safe_extension_body(CheckStats& stats, const Program& p, Rng& rng,
                         const CheckOptions& opt) {
  FreshExtension fresh = random_fresh_extension(rng, p);
  SignatureDelta delta;
  delta.functions = fresh.new_functions;
  for (int k = 0; k < opt.exprs_per_program; ++k) {
    ExprPtr e = random_expr(rng, p, 4);
    ++stats.instances;
    std::vector<ExprPtr> prot{e};
    auto ext = safe_extend(p, fresh.rules, delta, prot);
    if (std::holds_alternative<Diagnostic>(ext)) {
      // two-sided name clash between corpus symbols; not a check failure
      ++stats.skipped;
      continue;
    }
    const SafeExtension& se = std::get<SafeExtension>(ext);
    auto base = stabilized_denote(se.base, e, opt);
    auto merged = stabilized_denote(se.merged, e, opt);
    if (!base || !merged) {
      ++stats.skipped;
      continue;
    }
    ++stats.checked;
    if (!same_elements(*base, *merged)) {
      std::ostringstream why;
      why << "safe extension changed the denotation of `" << print_expr(e)
          << "`: base " << render_set(base->elements()) << " vs merged "
          << render_set(merged->elements()) << " in program\n"
          << print_program(se.merged);
      note_failure(stats, opt, why.str());
    }
  }
}

}  // namespace

CheckStats run_safe_extension_suite(const CheckOptions& opt) {
  return drive(std::nullopt, opt, [&](CheckStats& s, const Program& p, Rng& r) {
    safe_extension_body(s, p, r, opt);
  });
}

CheckStats run_safe_extension_suite_on(const Program& p,
                                       const CheckOptions& opt) {
  return drive(p, opt, [&](CheckStats& s, const Program& prog, Rng& r) {
    for (int i = 0; i < std::max(1, opt.programs / 4); ++i)
      safe_extension_body(s, prog, r, opt);
  });
}

std::vector<SafeExtViolation> find_safe_extension_violations(
    const Program& p, const CheckOptions& opt) {
  std::vector<SafeExtViolation> out;

  // Function symbols that are declared but occur nowhere: defining them is a
  // safe extension.
  std::set<std::string> occupied = fs_program(p);
  std::vector<std::pair<std::string, int>> definable;
  for (const auto& [name, arity] : p.sig.functions())
    if (!occupied.count(name)) definable.emplace_back(name, arity);

  std::vector<ExprPtr> ctor_args;
  for (const auto& [name, arity] : p.sig.constructors())
    if (arity == 0) ctor_args.push_back(Expr::symbol(name));

  // Probe expressions: every defined function applied to small constants.
  std::vector<ExprPtr> probes;
  for (const auto& [fname, farity] : p.sig.functions()) {
    if (!occupied.count(fname)) continue;
    if (farity == 0) {
      probes.push_back(Expr::symbol(fname));
      continue;
    }
    if (farity == 1)
      for (const auto& a : ctor_args)
        probes.push_back(Expr::apply(Expr::symbol(fname), a));
  }

  for (const auto& [gname, garity] : definable) {
    if (garity != 1) continue;  // constant tables: one rule `g c -> c'`
    for (const auto& lhs_arg : ctor_args) {
      for (const auto& rhs : ctor_args) {
        ProgramRule rule{gname, {lhs_arg}, rhs};
        auto ext = safe_extend(p, {rule}, {}, probes);
        if (std::holds_alternative<Diagnostic>(ext)) continue;
        const SafeExtension& se = std::get<SafeExtension>(ext);
        for (const auto& e : probes) {
          SafeExtInvariance inv =
              safe_extension_invariance_check(se, e, opt.budget);
          if (!inv.gained.empty())
            out.push_back({rule, e, inv.gained.front()});
        }
      }
    }
  }
  return out;
}

}  // namespace hocrwl
