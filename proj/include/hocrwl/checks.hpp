// Property-suite drivers: cross-engine oracle agreement, compositionality,
// distinguisher round-trips and safe-extension invariance, runnable over a
// random corpus or a loaded program.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hocrwl/calculus.hpp"
#include "hocrwl/corpus.hpp"
#include "hocrwl/letrw.hpp"
#include "hocrwl/syntax.hpp"

namespace hocrwl {

struct CheckOptions {
  std::uint64_t seed = 1;
  int programs = 200;           // corpus size (ignored with a loaded program)
  int exprs_per_program = 8;
  // Starting budget for stabilization. The element and work caps downgrade
  // runaway searches to incomplete, so pathological corpus programs are
  // skipped rather than enumerated.
  SearchBudget budget{.max_or_depth = 8,
                      .max_pattern_size = 4,
                      .max_results = 5000,
                      .max_search_nodes = 30000};
  int max_stable_depth = 12;    // raise or-depth up to here to stabilize
  int letrw_steps = 60;
  std::size_t letrw_max_states = 20000;
  std::ostream* log = nullptr;  // per-failure notes when set
};

struct CheckStats {
  int instances = 0;  // (program, expression/context/triple) pairs visited
  int checked = 0;    // instances that stabilized and were actually compared
  int skipped = 0;    // instances the budgets could not stabilize
  int failures = 0;
  std::vector<std::string> notes;  // one line per failure

  bool ok() const { return failures == 0; }
};

/// Smallest or-depth within [budget.max_or_depth, max_stable_depth] at which
/// the search is complete; nullopt when none is.
std::optional<DenotationSet> stabilized_denote(const Program& p,
                                               const ExprPtr& e,
                                               const CheckOptions& opt);

/// Total patterns from the calculus vs the rewriting engine, compared
/// whenever both searches exhaust their space.
CheckStats run_oracle_suite(const CheckOptions& opt);
CheckStats run_oracle_suite_on(const Program& p, const CheckOptions& opt);

/// Context decomposition at stabilized budgets over random contexts.
CheckStats run_compositionality_suite(const CheckOptions& opt);
CheckStats run_compositionality_suite_on(const Program& p,
                                         const CheckOptions& opt);

/// Distinguisher round-trip for random (program, expression, target) triples,
/// both variants: membership of t before must coincide with membership of
/// hat(t) after applying the generated rules.
CheckStats run_lemma_roundtrip_suite(const CheckOptions& opt);
CheckStats run_lemma_roundtrip_suite_on(const Program& p,
                                        const CheckOptions& opt);

/// Safe extensions must not change denotations (extra-variable-free case).
CheckStats run_safe_extension_suite(const CheckOptions& opt);
CheckStats run_safe_extension_suite_on(const Program& p,
                                       const CheckOptions& opt);

/// For programs in extra-variable mode: enumerate small safe extensions over
/// declared-but-unused function symbols and report every invariance
/// violation found (the expected phenomenon in that mode).
struct SafeExtViolation {
  ProgramRule extension_rule;
  ExprPtr expr;
  ExprPtr gained_value;
};
std::vector<SafeExtViolation> find_safe_extension_violations(
    const Program& p, const CheckOptions& opt);

}  // namespace hocrwl
