// Term language for applicative higher-order rewrite programs: expressions,
// patterns, contexts, pattern substitutions, signatures and program rules.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hocrwl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Patterns are the irreducible value subset of expressions. They are plain
/// expressions classified by is_pattern; `total()` caches the absence of the
/// undefined value so filtering observable values is O(1) per element.
using Pattern = ExprPtr;

enum class ExprKind { Variable, Symbol, Apply, Bottom };

/// Immutable applicative expression: a variable, a signature symbol, an
/// application node, or the undefined value `_|_`. Structural hash and node
/// count are computed once on construction; nodes are shared freely.
class Expr {
public:
  static ExprPtr variable(std::string name);
  static ExprPtr symbol(std::string name);
  static ExprPtr apply(ExprPtr fun, ExprPtr arg);
  static const ExprPtr& bottom();

  ExprKind kind() const { return kind_; }
  const std::string& name() const { return name_; }  // Variable / Symbol
  const ExprPtr& fun() const { return fun_; }        // Apply
  const ExprPtr& arg() const { return arg_; }        // Apply
  std::size_t hash() const { return hash_; }
  int size() const { return size_; }
  bool total() const { return total_; }

private:
  Expr() = default;
  ExprKind kind_ = ExprKind::Bottom;
  std::string name_;
  ExprPtr fun_, arg_;
  std::size_t hash_ = 0;
  int size_ = 1;
  bool total_ = true;
};

bool equal(const ExprPtr& a, const ExprPtr& b);

struct ExprHash {
  std::size_t operator()(const ExprPtr& e) const { return e->hash(); }
};
struct ExprEq {
  bool operator()(const ExprPtr& a, const ExprPtr& b) const { return equal(a, b); }
};
using ExprSet = std::unordered_set<ExprPtr, ExprHash, ExprEq>;
template <class V>
using ExprMap = std::unordered_map<ExprPtr, V, ExprHash, ExprEq>;

/// Head and argument list of the application spine of an expression.
/// `h e1 e2 ... en` decomposes to head `h` (never an Apply) and args [e1..en].
struct Spine {
  ExprPtr head;
  std::vector<ExprPtr> args;
};
Spine decompose(const ExprPtr& e);
ExprPtr compose(ExprPtr head, std::span<const ExprPtr> args);

/// Free variable names in first-occurrence (leftmost) order.
std::vector<std::string> variables_of(const ExprPtr& e);
bool occurs(const ExprPtr& e, const std::string& var);

/// Renames variables to `prefix0, prefix1, ...` in first-occurrence order.
/// Returns the renamed expression and the original names in index order.
std::pair<ExprPtr, std::vector<std::string>> canonicalize_variables(
    const ExprPtr& e, const std::string& prefix);

/// Display order for value sets: node count, then structure with the
/// undefined value smallest, so less-defined approximations list first.
bool expr_less(const ExprPtr& a, const ExprPtr& b);
std::vector<ExprPtr> sorted_patterns(std::vector<ExprPtr> elems);

/// Constructor and function symbols with arities. The two name sets are
/// disjoint; the undefined value acts as an implicit 0-ary constructor and is
/// not declarable. Declaration order is preserved for reproducible
/// enumeration.
class Signature {
public:
  void add_constructor(const std::string& name, int arity);
  void add_function(const std::string& name, int arity);

  bool contains(const std::string& name) const;
  bool is_constructor(const std::string& name) const;
  bool is_function(const std::string& name) const;
  std::optional<int> find_arity(const std::string& name) const;
  int arity(const std::string& name) const;  // throws Error if undeclared

  const std::vector<std::pair<std::string, int>>& constructors() const {
    return ctors_;
  }
  const std::vector<std::pair<std::string, int>>& functions() const {
    return funcs_;
  }

private:
  std::vector<std::pair<std::string, int>> ctors_, funcs_;
  std::unordered_map<std::string, int> ctor_arity_, func_arity_;
};

/// t ::= X | c t1..tn (n <= ar(c)) | f t1..tm (m < ar(f)), `_|_` counting as
/// a 0-ary constructor. Throws Error on symbols not declared in `sig`.
bool is_pattern(const ExprPtr& e, const Signature& sig);

/// First-order patterns: X or fully applied constructors all the way down.
bool is_fo_pattern(const ExprPtr& e, const Signature& sig);

// ---------------------------------------------------------------------------
// Contexts: expressions with exactly one hole.

class Context;
using ContextPtr = std::shared_ptr<const Context>;

enum class ContextKind { Hole, ApplyLeft, ApplyRight };

class Context {
public:
  static const ContextPtr& hole();
  static ContextPtr apply_left(ContextPtr inner, ExprPtr arg);   // C e
  static ContextPtr apply_right(ExprPtr fun, ContextPtr inner);  // e C

  ContextKind kind() const { return kind_; }
  const ContextPtr& inner() const { return inner_; }
  const ExprPtr& expr() const { return expr_; }

private:
  Context() = default;
  ContextKind kind_ = ContextKind::Hole;
  ContextPtr inner_;
  ExprPtr expr_;
};

ExprPtr apply_context(const ContextPtr& c, const ExprPtr& e);

// ---------------------------------------------------------------------------
// Pattern substitutions.

/// Finite mapping from variable names to (possibly partial) patterns.
class PSubstitution {
public:
  PSubstitution() = default;

  void bind(const std::string& var, ExprPtr value);
  const ExprPtr* find(const std::string& var) const;
  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }
  const std::map<std::string, ExprPtr>& mapping() const { return map_; }

  /// Disjoint union; throws Error on conflicting bindings.
  static PSubstitution merge(const PSubstitution& a, const PSubstitution& b);

private:
  std::map<std::string, ExprPtr> map_;
};

/// Simultaneous replacement of free variables. The core language has no
/// binders, so capture cannot occur.
ExprPtr apply_substitution(const ExprPtr& e, const PSubstitution& theta);

/// Syntactic matching of a rule parameter against a derived value: the unique
/// theta with `pattern theta = value`, or nullopt. Repeated pattern variables
/// are accepted when their occurrences agree.
std::optional<PSubstitution> match_pattern(const ExprPtr& pattern,
                                           const ExprPtr& value);

// ---------------------------------------------------------------------------
// Programs.

struct ProgramRule {
  std::string function;
  std::vector<ExprPtr> params;
  ExprPtr rhs;
};

ExprPtr rule_lhs(const ProgramRule& r);
std::vector<std::string> rule_param_variables(const ProgramRule& r);
std::vector<std::string> rule_extra_variables(const ProgramRule& r);

/// Two rules equal up to a renaming of their variables.
bool rules_alpha_equal(const ProgramRule& a, const ProgramRule& b);

struct ProgramFlags {
  bool extra_variables_allowed = false;
  bool left_fo_required = false;
};

struct Program {
  Signature sig;
  std::vector<ProgramRule> rules;  // order preserved for reproducibility
  ProgramFlags flags;

  std::vector<const ProgramRule*> rules_for(const std::string& function) const;
};

enum class DiagnosticKind {
  UndeclaredSymbol,
  ArityMismatch,
  ParamNotPattern,
  BottomInParam,
  NonLinearParams,
  ExtraVariable,
  HoPatternParam,
  UnsafeExtension,
};

struct Diagnostic {
  DiagnosticKind kind;
  std::size_t rule_index = 0;
  std::string symbol;
  std::string message;
};

/// Empty iff every rule invariant holds under the program flags.
std::vector<Diagnostic> validate_program(const Program& p);

}  // namespace hocrwl
