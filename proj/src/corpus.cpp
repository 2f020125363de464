#include "hocrwl/corpus.hpp"

#include <algorithm>

namespace hocrwl {

namespace {

int pick(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

bool chance(Rng& rng, int percent) { return pick(rng, 1, 100) <= percent; }

template <class T>
const T& pick_one(Rng& rng, const std::vector<T>& xs) {
  return xs[rng() % xs.size()];
}

ExprPtr ground_atom(const Signature& sig) {
  for (const auto& [name, arity] : sig.constructors())
    if (arity == 0) return Expr::symbol(name);
  if (!sig.constructors().empty())
    return Expr::symbol(sig.constructors().front().first);
  if (!sig.functions().empty())
    return Expr::symbol(sig.functions().front().first);
  return Expr::bottom();
}

// Generic pattern generator. Variables are taken from `vars` when non-null
// (introducing fresh ones for rule parameters), `_|_` appears only when
// allowed.
ExprPtr gen_pattern(Rng& rng, const Signature& sig, int max_size,
                    bool allow_bottom, bool allow_ho,
                    std::vector<std::string>* vars, int* fresh_counter) {
  if (allow_bottom && chance(rng, 15)) return Expr::bottom();
  if (vars && chance(rng, 35)) {
    if (fresh_counter && (vars->empty() || chance(rng, 60))) {
      std::string v = "X" + std::to_string((*fresh_counter)++);
      vars->push_back(v);
      return Expr::variable(v);
    }
    if (!vars->empty()) return Expr::variable(pick_one(rng, *vars));
  }

  std::vector<std::pair<std::string, int>> heads;  // name, max arg count
  for (const auto& [name, arity] : sig.constructors())
    heads.emplace_back(name, arity);
  if (allow_ho)
    for (const auto& [name, arity] : sig.functions())
      if (arity >= 1) heads.emplace_back(name, arity - 1);
  if (heads.empty()) return Expr::bottom();

  const auto& [head, max_args] = pick_one(rng, heads);
  int argc = std::min(max_args, max_size - 1);
  if (argc > 0) argc = pick(rng, 0, argc);
  // Constructors tend to be fully applied so first-order data dominates.
  if (sig.is_constructor(head) && max_args <= max_size - 1 &&
      chance(rng, 70))
    argc = max_args;
  std::vector<ExprPtr> args;
  int remaining = max_size - 1;
  for (int i = 0; i < argc; ++i) {
    int slot = std::max(1, remaining / (argc - i));
    args.push_back(gen_pattern(rng, sig, slot, allow_bottom, allow_ho, vars,
                               fresh_counter));
    remaining -= args.back()->size();
  }
  return compose(Expr::symbol(head), args);
}

}  // namespace

ExprPtr random_pattern(Rng& rng, const Signature& sig, int max_size,
                       bool allow_bottom) {
  return gen_pattern(rng, sig, max_size, allow_bottom, true, nullptr, nullptr);
}

ExprPtr random_pattern_with_vars(Rng& rng, const Signature& sig,
                                 int max_size) {
  static const std::vector<std::string> pool{"X", "Y", "Z"};
  ExprPtr p = gen_pattern(rng, sig, max_size, true, true, nullptr, nullptr);
  // sprinkle a variable leaf by regenerating small patterns occasionally
  if (chance(rng, 25)) return Expr::variable(pick_one(rng, pool));
  return p;
}

ExprPtr random_expr(Rng& rng, const Program& p, int max_size) {
  const Signature& sig = p.sig;
  std::vector<std::pair<std::string, int>> heads;  // name, max application
  for (const auto& [name, arity] : sig.constructors())
    heads.emplace_back(name, arity);
  for (const auto& [name, arity] : sig.functions())
    heads.emplace_back(name, arity + (chance(rng, 20) ? 1 : 0));

  if (max_size <= 1 || chance(rng, 10)) {
    if (chance(rng, 12)) return Expr::variable("A");
    std::vector<std::string> atoms;
    for (const auto& [name, arity] : sig.constructors())
      if (arity == 0) atoms.push_back(name);
    for (const auto& [name, arity] : sig.functions())
      if (arity == 0) atoms.push_back(name);
    if (!atoms.empty()) return Expr::symbol(pick_one(rng, atoms));
    if (max_size <= 1) return ground_atom(sig);
  }

  const auto& [head, max_args] = pick_one(rng, heads);
  int argc = std::min(max_args, max_size - 1);
  if (argc > 0) argc = pick(rng, 0, argc);
  // Bias toward saturated function applications: those actually rewrite.
  if (sig.is_function(head)) {
    int arity = sig.arity(head);
    if (arity <= max_size - 1 && chance(rng, 75))
      argc = std::max(argc, arity);
  }
  std::vector<ExprPtr> args;
  int remaining = max_size - 1;
  for (int i = 0; i < argc; ++i) {
    int slot = std::max(1, remaining / (argc - i));
    args.push_back(random_expr(rng, p, slot));
    remaining -= args.back()->size();
  }
  return compose(Expr::symbol(head), args);
}

Program random_program(Rng& rng, const CorpusConfig& cfg) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Program p;
    int n_ctors = pick(rng, 1, 2);
    int n_funcs = std::min(pick(rng, 1, 2), cfg.max_symbols - n_ctors);
    if (n_funcs < 1) n_funcs = 1;

    static const char* ctor_names[] = {"a", "b", "c"};
    static const char* func_names[] = {"p", "q", "r"};
    p.sig.add_constructor(ctor_names[0], 0);  // keep a ground constant
    for (int i = 1; i < n_ctors; ++i)
      p.sig.add_constructor(ctor_names[i], pick(rng, 0, 2));
    for (int i = 0; i < n_funcs; ++i)
      p.sig.add_function(func_names[i], pick(rng, 0, 2));

    int n_rules = pick(rng, 1, cfg.max_rules);
    for (int i = 0; i < n_rules; ++i) {
      const auto& [fname, arity] =
          p.sig.functions()[rng() % p.sig.functions().size()];
      ProgramRule rule;
      rule.function = fname;
      std::vector<std::string> vars;
      int fresh = 0;
      for (int k = 0; k < arity; ++k) {
        // fresh-only variables keep the tuple linear by construction
        std::vector<std::string> mine;
        rule.params.push_back(gen_pattern(rng, p.sig, cfg.max_pattern_size,
                                          false,
                                          cfg.allow_ho_params && chance(rng, 25),
                                          &mine, &fresh));
        vars.insert(vars.end(), mine.begin(), mine.end());
      }
      // rhs over signature symbols and the parameter variables
      ExprPtr rhs = random_expr(rng, p, cfg.max_rhs_size);
      if (!vars.empty() && chance(rng, 70)) {
        // splice parameter variables over some leaves
        auto splice = [&](auto&& self, const ExprPtr& e) -> ExprPtr {
          if (e->kind() == ExprKind::Apply)
            return Expr::apply(self(self, e->fun()), self(self, e->arg()));
          if (e->kind() == ExprKind::Symbol && chance(rng, 35) &&
              p.sig.find_arity(e->name()) == 0)
            return Expr::variable(pick_one(rng, vars));
          if (e->kind() == ExprKind::Variable)
            return Expr::variable(pick_one(rng, vars));
          return e;
        };
        rhs = splice(splice, rhs);
      }
      rule.rhs = rhs;
      p.rules.push_back(std::move(rule));
    }

    // ensure rhs variables are parameter variables (ground the rest)
    for (auto& rule : p.rules) {
      std::set<std::string> params;
      for (const auto& v : rule_param_variables(rule)) params.insert(v);
      auto fix = [&](auto&& self, const ExprPtr& e) -> ExprPtr {
        if (e->kind() == ExprKind::Apply)
          return Expr::apply(self(self, e->fun()), self(self, e->arg()));
        if (e->kind() == ExprKind::Variable && !params.count(e->name()))
          return ground_atom(p.sig);
        return e;
      };
      rule.rhs = fix(fix, rule.rhs);
    }

    if (validate_program(p).empty()) return p;
  }
  throw Error("random_program: could not generate a valid program");
}

ContextPtr random_context(Rng& rng, const Program& p, int max_depth) {
  if (max_depth <= 0 || chance(rng, 25)) return Context::hole();
  std::vector<std::pair<std::string, int>> heads;
  for (const auto& [name, arity] : p.sig.functions())
    heads.emplace_back(name, arity + 1);
  for (const auto& [name, arity] : p.sig.constructors())
    if (arity >= 1) heads.emplace_back(name, arity);
  if (heads.empty()) return Context::hole();

  const auto& [head, max_args] = pick_one(rng, heads);
  int k = pick(rng, 1, max_args);
  int hole_pos = pick(rng, 0, k - 1);
  ExprPtr fun = Expr::symbol(head);
  for (int i = 0; i < hole_pos; ++i)
    fun = Expr::apply(fun, random_expr(rng, p, 3));
  ContextPtr c =
      Context::apply_right(std::move(fun), random_context(rng, p, max_depth - 1));
  for (int i = hole_pos + 1; i < k; ++i)
    c = Context::apply_left(c, random_expr(rng, p, 3));
  return c;
}

FreshExtension random_fresh_extension(Rng& rng, const Program& p) {
  FreshExtension out;
  int n = pick(rng, 1, 2);
  for (int i = 0; i < n; ++i) {
    std::string name = "z" + std::to_string(i + 1);
    int arity = pick(rng, 0, 2);
    out.new_functions.emplace_back(name, arity);
  }
  // extended signature for generating bodies that may call the new symbols
  Program ext = p;
  for (const auto& [name, arity] : out.new_functions)
    ext.sig.add_function(name, arity);

  for (const auto& [name, arity] : out.new_functions) {
    int n_rules = pick(rng, 1, 2);
    for (int r = 0; r < n_rules; ++r) {
      ProgramRule rule;
      rule.function = name;
      std::vector<std::string> vars;
      int fresh = 0;
      for (int k = 0; k < arity; ++k) {
        std::vector<std::string> mine;
        rule.params.push_back(
            gen_pattern(rng, p.sig, 2, false, false, &mine, &fresh));
        vars.insert(vars.end(), mine.begin(), mine.end());
      }
      ExprPtr rhs = random_expr(rng, ext, 4);
      auto fix = [&](auto&& self, const ExprPtr& e) -> ExprPtr {
        if (e->kind() == ExprKind::Apply)
          return Expr::apply(self(self, e->fun()), self(self, e->arg()));
        if (e->kind() == ExprKind::Variable) {
          if (!vars.empty()) return Expr::variable(vars[rng() % vars.size()]);
          return ground_atom(p.sig);
        }
        return e;
      };
      rule.rhs = fix(fix, rhs);
      out.rules.push_back(std::move(rule));
    }
  }
  return out;
}

}  // namespace hocrwl
