// Operational engine: small-step rewriting with explicit sharing.
//
// Call-time choice is enforced by binding non-pattern arguments in local
// `let`s before a function rule can fire, so every copy of a duplicated
// argument sees the same eventual value. Rules:
//
//   (Fapp)  f t1..tn -> r0          ti patterns matching a program rule
//   (LetIn) f .. e .. -> let X = e in f .. X ..   e a non-pattern argument
//   (Bind)  let X = t in e -> e[X/t]              t a pattern
//   (Elim)  let X = e1 in e2 -> e2                X not free in e2
//   (Flat)  let X = (let Y = e1 in e2) in e3 -> let Y = e1 in let X = e2 in e3
//
// plus contextual closure into any subterm, including let bindings. The
// engine exists as an independent cross-check for the proof calculus: total
// patterns reachable here must coincide with the calculus denotation
// restricted to total patterns.
#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "hocrwl/syntax.hpp"

namespace hocrwl {

class LetExpr;
using LetPtr = std::shared_ptr<const LetExpr>;

enum class LetKind { Variable, Symbol, Bottom, Apply, Let };

/// Immutable expression extended with non-recursive local bindings.
class LetExpr {
public:
  static LetPtr variable(std::string name);
  static LetPtr symbol(std::string name);
  static const LetPtr& bottom();
  static LetPtr apply(LetPtr fun, LetPtr arg);
  static LetPtr let(std::string binder, LetPtr bound, LetPtr body);

  LetKind kind() const { return kind_; }
  const std::string& name() const { return name_; }  // Variable/Symbol/binder
  const LetPtr& fun() const { return a_; }
  const LetPtr& arg() const { return b_; }
  const LetPtr& bound() const { return a_; }
  const LetPtr& body() const { return b_; }
  std::size_t hash() const { return hash_; }
  int size() const { return size_; }
  bool has_let() const { return has_let_; }

private:
  LetExpr() = default;
  LetKind kind_ = LetKind::Bottom;
  std::string name_;
  LetPtr a_, b_;
  std::size_t hash_ = 0;
  int size_ = 1;
  bool has_let_ = false;
};

bool let_equal(const LetPtr& a, const LetPtr& b);
struct LetHash {
  std::size_t operator()(const LetPtr& e) const { return e->hash(); }
};
struct LetEq {
  bool operator()(const LetPtr& a, const LetPtr& b) const {
    return let_equal(a, b);
  }
};

LetPtr from_expr(const ExprPtr& e);
ExprPtr to_expr(const LetPtr& e);  // throws when a let remains

bool occurs_free(const LetPtr& e, const std::string& var);
bool is_let_pattern(const LetPtr& e, const Signature& sig);
bool is_total_let(const LetPtr& e);

/// Renames let binders to $0, $1, ... in traversal order, so states equal up
/// to binder renaming compare equal.
LetPtr canonical_lets(const LetPtr& e);

std::string print_letexpr(const LetPtr& e);

struct StepSuccessor {
  const char* rule;        // Fapp | LetIn | Bind | Elim | Flat
  std::vector<int> path;   // 0 = fun/bound child, 1 = arg/body child
  LetPtr state;
};

/// All one-step successors; empty means no step applies (patterns and stuck
/// junk are normal forms).
std::vector<StepSuccessor> step(const Program& p, const LetPtr& e);

struct ReachResult {
  std::vector<ExprPtr> patterns;  // total patterns reached, canonical order
  bool exhausted = true;          // frontier fully explored within the bounds
  std::size_t states_explored = 0;
};

/// Breadth-first closure of the step relation from e, collecting every total
/// pattern reachable within max_steps. States are deduplicated up to binder
/// renaming; `exhausted` is cleared when the step bound or the state cap cut
/// the frontier.
ReachResult reachable_patterns(const Program& p, const ExprPtr& e,
                               int max_steps,
                               std::size_t max_states = 200000);

struct TraceStep {
  std::string rule;
  std::vector<int> path;
  LetPtr state;
};

struct Trace {
  LetPtr initial;
  std::vector<TraceStep> steps;
};

/// One pseudo-random maximal (or budget-cut) rewriting sequence,
/// reproducible from the seed.
Trace random_trace(const Program& p, const ExprPtr& e, std::uint64_t seed,
                   int max_steps);

std::string format_path(const std::vector<int>& path);
nlohmann::json trace_to_json(const Trace& trace);

}  // namespace hocrwl
