// Seeded random generation of small programs, query expressions, contexts
// and safe extensions, shared by the property suites and the CLI check
// command.
#pragma once

#include <random>
#include <vector>

#include "hocrwl/syntax.hpp"

namespace hocrwl {

struct CorpusConfig {
  int max_rules = 6;
  int max_symbols = 4;       // constructors + functions
  int max_pattern_size = 3;  // rule parameters
  int max_rhs_size = 5;
  int max_expr_size = 4;
  bool allow_ho_params = true;  // occasionally use higher-order parameters
};

using Rng = std::mt19937_64;

/// A validated program without extra variables.
Program random_program(Rng& rng, const CorpusConfig& cfg = {});

/// A total expression over the program's signature, occasionally with free
/// variables.
ExprPtr random_expr(Rng& rng, const Program& p, int max_size);

/// A ground partial pattern over the signature.
ExprPtr random_pattern(Rng& rng, const Signature& sig, int max_size,
                       bool allow_bottom);

/// A partial pattern that may also contain variables drawn from a small pool.
ExprPtr random_pattern_with_vars(Rng& rng, const Signature& sig, int max_size);

/// A context of bounded nesting whose spines use program symbols and random
/// expression fillers.
ContextPtr random_context(Rng& rng, const Program& p, int max_depth);

/// Rules defining 1-2 fresh function symbols over the base signature,
/// together with the implied signature additions (as a program fragment).
struct FreshExtension {
  std::vector<ProgramRule> rules;
  std::vector<std::pair<std::string, int>> new_functions;
};
FreshExtension random_fresh_extension(Rng& rng, const Program& p);

}  // namespace hocrwl
