// Full-abstraction machinery: symbol analyses, safe program extensions, and
// generated distinguisher rules that turn membership of a partial pattern in
// a denotation into an observable (optionally first-order) total value.
#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hocrwl/calculus.hpp"
#include "hocrwl/syntax.hpp"

namespace hocrwl {

/// Function symbols defined (at a rule head) by a rule set.
std::set<std::string> defs(std::span<const ProgramRule> rules);

/// Function symbols occurring anywhere in an expression.
std::set<std::string> fs(const ExprPtr& e, const Signature& sig);

/// Function symbols occurring in any rule of a program (left or right side).
std::set<std::string> fs_program(const Program& p);

/// New symbols an extension brings along, with arities.
struct SignatureDelta {
  std::vector<std::pair<std::string, int>> constructors;
  std::vector<std::pair<std::string, int>> functions;
};

struct SafeExtension {
  Program base;
  std::vector<ProgramRule> extension;
  SignatureDelta delta;
  Program merged;
};

/// Validates that the extension defines no function symbol occurring in the
/// base rules or in the protected expressions, and builds the merged
/// program. Returns the offending diagnostic otherwise.
std::variant<SafeExtension, Diagnostic> safe_extend(
    const Program& base, std::vector<ProgramRule> extension,
    const SignatureDelta& delta, std::span<const ExprPtr> protected_exprs);

struct SafeExtInvariance {
  bool equal = true;
  bool both_complete = false;
  std::vector<ExprPtr> gained;  // in the merged denotation only
  std::vector<ExprPtr> lost;    // in the base denotation only
};

/// Compares the denotation of e under the base and the merged program. For
/// programs without extra variables, inequality at complete bounds is an
/// implementation bug; with extra variables it is the expected, reportable
/// failure of extension invariance.
SafeExtInvariance safe_extension_invariance_check(const SafeExtension& se,
                                                  const ExprPtr& e,
                                                  const SearchBudget& budget);

// ---------------------------------------------------------------------------

enum class HatVariant { HO, FO };

/// Distinguisher for a target pattern t: rules over fresh symbols that map
/// any expression reaching t to the total marker pattern hat(t), making
/// denotational membership observable. In the FO variant every head symbol
/// is replaced by a fresh constructor, so the marker is first-order.
struct Distinguisher {
  ExprPtr target;
  ExprPtr hat_target;
  std::string root_symbol;  // the rule symbol to apply to the observed expr
  std::vector<ProgramRule> rules;
  SignatureDelta delta;
  std::set<std::string> fresh_symbols;
  HatVariant variant = HatVariant::HO;
};

/// Total pattern with every `_|_` replaced by a fresh constant; the FO
/// variant also replaces each head applied to m arguments by a fresh
/// constructor of arity m.
ExprPtr hat(const ExprPtr& t, HatVariant variant,
            const std::set<std::string>& avoid = {});

/// One rule per distinct subpattern of t (equal subpatterns share a symbol):
///   g_X U -> U      g_bot X -> bot      g_(h t1..tm) (h X1..Xm) -> h' ...
/// Fresh names are chosen outside `avoid` with a reserved '#' prefix.
Distinguisher gen_distinguisher(const ExprPtr& t, HatVariant variant,
                                const std::set<std::string>& avoid);

struct DistinguishReport {
  ExprPtr witness;        // t in one denotation and not the other
  bool witness_in_first = false;
  Distinguisher distinguisher;
  SafeExtension extension;
  std::string context;    // rendered distinguishing context g_t [ ]
  bool hat_in_first_obs = false;
  bool hat_in_second_obs = false;
  SearchBudget verify_budget;
};

/// Searches the two denotations for a semantic difference and, on success,
/// builds the constructive observation split: hat(t) is observable for
/// g_t e on exactly one side. The verification runs with the unfolding depth
/// raised by the witness size so the structural distinguisher rules cannot
/// mask it.
std::optional<DistinguishReport> distinguish(const Program& p, const ExprPtr& e,
                                             const ExprPtr& e2,
                                             const SearchBudget& budget,
                                             HatVariant variant = HatVariant::HO);

nlohmann::json distinguish_report_to_json(const DistinguishReport& r);

}  // namespace hocrwl
