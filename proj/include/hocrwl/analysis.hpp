// Semantic comparison layer: observations, extensional equivalence and
// tabulated extensional semantics, compositionality checking, and the search
// for contexts witnessing unsoundness of the extensional view.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hocrwl/calculus.hpp"
#include "hocrwl/syntax.hpp"

namespace hocrwl {

enum class ObsKind { HO, FO };

/// The total patterns (optionally restricted to first-order patterns)
/// computable for an expression: its externally visible outcomes.
struct Observation {
  ObsKind kind = ObsKind::HO;
  std::vector<ExprPtr> values;
  bool exhausted = false;  // the underlying search was complete at its bound
};

Observation observe(const Program& p, const ExprPtr& e, ObsKind kind,
                    const SearchBudget& budget);

// ---------------------------------------------------------------------------

/// Verdict of the bounded n-ary extensional comparison. `equivalent` is only
/// a statement at the bound; a witness is a genuine proof of inequivalence.
struct ExtEquivVerdict {
  bool equivalent = true;
  bool all_complete = true;                // every denotation was exhaustive
  std::vector<ExprPtr> witness_args;       // distinguishing argument tuple
  ExprPtr witness_value;                   // value on one side only
  bool value_in_first = false;
};

/// Compares the denotations of `e t1..tn` and `e' t1..tn` over every n-tuple
/// of ground partial patterns with at most budget.max_pattern_size nodes.
/// Restricting argument tuples to patterns loses no generality.
ExtEquivVerdict ext_equiv(const Program& p, const ExprPtr& e,
                          const ExprPtr& e2, int n,
                          const SearchBudget& budget);

/// The n-extensional semantics tabulated over the bounded argument grid.
struct ExtSemantics {
  int arity = 0;
  std::vector<std::pair<std::vector<ExprPtr>, DenotationSet>> table;
};

ExtSemantics ext_semantics(const Program& p, const ExprPtr& e, int n,
                           const SearchBudget& budget);
bool ext_semantics_equal(const ExtSemantics& a, const ExtSemantics& b);

// ---------------------------------------------------------------------------

/// Checks the decomposition of a context application: the denotation of C[e]
/// must equal the union over t in the denotation of e of the denotations of
/// C[t]. With both sides complete at the bound, inequality is an
/// implementation bug. Otherwise each inclusion is retried against the other
/// side recomputed at twice the unfolding depth before being reported.
struct CompositionalityVerdict {
  bool holds = true;
  bool strict = false;  // both sides were complete at the bound
  std::vector<ExprPtr> only_left;   // in C[e] but not in the union
  std::vector<ExprPtr> only_right;  // in the union but not in C[e]
};

CompositionalityVerdict check_compositionality(const Program& p,
                                               const ExprPtr& e,
                                               const ContextPtr& c,
                                               const SearchBudget& budget);

// ---------------------------------------------------------------------------

enum class UnsoundnessStatus {
  WitnessFound,   // bounded n-equivalence holds, yet a context observes a gap
  NoneFound,      // no distinguishing context within the search space
  NotApplicable,  // the expressions are already n-distinguished
};

struct UnsoundnessResult {
  UnsoundnessStatus status = UnsoundnessStatus::NoneFound;
  ContextPtr context;
  std::vector<ExprPtr> split;  // symmetric difference of the two observations
  ExprPtr first_value;         // one observed value present on one side only
  bool value_in_first = false;
  ExtEquivVerdict equiv;       // the step-1 verdict (witness when NotApplicable)
  std::size_t contexts_tried = 0;
};

/// Searches single-spine contexts (head symbol, pattern fillers, one hole,
/// nested up to depth 3) for one that observably distinguishes two
/// expressions that are n-extensionally equivalent at the bound.
UnsoundnessResult unsoundness_witness(const Program& p, const ExprPtr& e,
                                      const ExprPtr& e2, int n, ObsKind kind,
                                      const SearchBudget& budget,
                                      std::size_t max_contexts = 200000);

nlohmann::json observation_to_json(const ExprPtr& e, const Observation& o);
nlohmann::json ext_equiv_to_json(const ExtEquivVerdict& v);

}  // namespace hocrwl
