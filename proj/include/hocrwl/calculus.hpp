// Bounded proof search for the proof calculus defining program semantics.
//
// Reduction statements `e ~> t` say that the partial pattern t approximates a
// possible value of e under call-time choice. Four rules derive them:
//
//   (B)   e ~> _|_                                  always
//   (RR)  x ~> x                                    x a variable
//   (DC)  h e1..em ~> h t1..tm   from ei ~> ti      if h t1..tm is a pattern
//   (OR)  f e1..en a1..am ~> t   from ei ~> pi0i    for a rule f p1..pn -> r,
//         and r0 a1..am ~> t                        0 a pattern substitution
//
// The denotation of e is the set of all derivable t. It is infinite, so
// enumeration is bounded by the number of OR applications along any branch;
// B, RR and DC are structural and terminate on their own.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hocrwl/syntax.hpp"

namespace hocrwl {

struct SearchBudget {
  int max_or_depth = 8;       // OR applications along any branch
  int max_pattern_size = 4;   // node cap for enumerated extra-variable values
  // Optional safety valves for adversarial inputs: per-expression element
  // cap and a total work cap across the whole search. Hitting either marks
  // the result incomplete rather than failing.
  std::optional<std::size_t> max_results{};
  std::optional<std::size_t> max_search_nodes{};

  SearchBudget with_or_depth(int d) const {
    SearchBudget b = *this;
    b.max_or_depth = d;
    return b;
  }
};

/// The set of partial patterns derivable for one expression within a budget.
/// `_|_` is always a member. complete_at_bound() reports whether no search
/// branch was cut: if true, enlarging the budget adds no elements.
class DenotationSet {
public:
  DenotationSet(std::vector<ExprPtr> elems, SearchBudget bound, bool complete);

  const std::vector<ExprPtr>& elements() const { return elems_; }
  bool contains(const ExprPtr& t) const { return set_.count(t) != 0; }
  /// Members without `_|_` inside: the observable values.
  std::vector<ExprPtr> total_elements() const;
  bool complete_at_bound() const { return complete_; }
  const SearchBudget& bound() const { return bound_; }

private:
  std::vector<ExprPtr> elems_;  // canonical order: size, then rendering
  ExprSet set_;
  SearchBudget bound_;
  bool complete_;
};

bool same_elements(const DenotationSet& a, const DenotationSet& b);

DenotationSet denote(const Program& p, const ExprPtr& e,
                     const SearchBudget& budget);

// ---------------------------------------------------------------------------
// Proof trees.

enum class RuleName { B, RR, DC, OR };
const char* rule_name(RuleName r);

struct ProofTree;
using ProofPtr = std::shared_ptr<const ProofTree>;

struct OrInstance {
  ProgramRule rule;  // parameters freshly renamed
  PSubstitution theta;
};

struct ProofTree {
  RuleName rule;
  ExprPtr expr;   // conclusion: expr ~> value
  ExprPtr value;
  std::vector<ProofPtr> premises;
  std::optional<OrInstance> instance;  // OR only

  int depth() const;
};

/// A proof of `e ~> t` within the budget, or nullopt. Absence at a bound is
/// a refutation only when denote(...) was complete at that bound.
std::optional<ProofPtr> derive(const Program& p, const ExprPtr& e,
                               const ExprPtr& t, const SearchBudget& budget);

struct ProofCheckResult {
  bool ok = true;
  std::string diagnostic;  // node path + violation when !ok
};

/// Validates every node against its rule's side conditions. Honors the
/// program flags: without extra variables, an OR substitution domain must be
/// contained in the rule's parameter variables.
ProofCheckResult check_proof(const Program& p, const ProofTree& proof);

nlohmann::json proof_to_json(const ProofTree& proof);
nlohmann::json denotation_to_json(const ExprPtr& e, const DenotationSet& d);

/// All ground partial patterns over the signature with at most `max_size`
/// nodes, in canonical order. Used for extra-variable instantiation and for
/// the argument grids of the analysis layer.
std::vector<ExprPtr> enumerate_patterns(const Signature& sig, int max_size);

}  // namespace hocrwl
