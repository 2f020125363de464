#include "hocrwl/calculus.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "hocrwl/parser.hpp"

namespace hocrwl {

namespace {

std::size_t hash_combine(std::size_t a, std::size_t b) {
  return a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
}

struct MemoKey {
  ExprPtr expr;  // variables canonically renamed
  int depth;
};
struct MemoKeyHash {
  std::size_t operator()(const MemoKey& k) const {
    return hash_combine(k.expr->hash(), static_cast<std::size_t>(k.depth));
  }
};
struct MemoKeyEq {
  bool operator()(const MemoKey& a, const MemoKey& b) const {
    return a.depth == b.depth && equal(a.expr, b.expr);
  }
};

// Visits index tuples until exhausted or the visitor returns false.
template <class F>
void cartesian_product(const std::vector<std::size_t>& sizes, F&& visit) {
  std::vector<std::size_t> index(sizes.size(), 0);
  for (const auto s : sizes)
    if (s == 0) return;
  while (true) {
    if (!visit(index)) return;
    std::size_t i = index.size();
    while (i > 0) {
      --i;
      if (++index[i] < sizes[i]) break;
      index[i] = 0;
      if (i == 0) return;
    }
    if (index.size() == 0) return;  // zero-length tuple: visited once
  }
}

// Renames a rule's variables to a reserved-looking but still parseable
// scheme (V'0, V'1, ...). The names are reused for every instantiation; they
// are always substituted away before the search recurses, so they never leak
// into memo keys. The language has no binders, so a clash with a query
// variable of the same name cannot capture anything.
ProgramRule rename_rule(const ProgramRule& r) {
  std::vector<ExprPtr> packed = r.params;
  packed.push_back(r.rhs);
  ExprPtr whole = compose(Expr::symbol(r.function), packed);
  auto [renamed, order] = canonicalize_variables(whole, "V'");
  (void)order;
  Spine s = decompose(renamed);
  ProgramRule out;
  out.function = r.function;
  out.rhs = s.args.back();
  s.args.pop_back();
  out.params = std::move(s.args);
  return out;
}

class Denoter {
public:
  Denoter(const Program& p, const SearchBudget& budget)
      : prog_(p),
        budget_(budget),
        work_left_(budget.max_search_nodes ? *budget.max_search_nodes
                                           : SIZE_MAX) {
    for (const auto& rule : p.rules) rules_by_function_[rule.function].push_back(&rule);
  }

  struct Result {
    std::vector<ExprPtr> elems;
    bool complete = true;
  };

  Result eval(const ExprPtr& e, int depth) {
    auto [canon, order] = canonicalize_variables(e, "%");
    const Result& entry = eval_canon(canon, depth);
    if (order.empty()) return entry;
    PSubstitution back;
    for (std::size_t i = 0; i < order.size(); ++i)
      back.bind("%" + std::to_string(i), Expr::variable(order[i]));
    Result out;
    out.complete = entry.complete;
    out.elems.reserve(entry.elems.size());
    for (const auto& t : entry.elems)
      out.elems.push_back(apply_substitution(t, back));
    return out;
  }

  std::optional<ProofPtr> prove(const ExprPtr& e, const ExprPtr& t, int depth);

private:
  const Result& eval_canon(const ExprPtr& e, int depth);
  const std::vector<ExprPtr>& universe();

  static bool member(const Result& r, const ExprPtr& t) {
    for (const auto& x : r.elems)
      if (equal(x, t)) return true;
    return false;
  }

  // One unit per memo miss and per enumerated rule instance; exhaustion
  // downgrades the whole search to incomplete.
  bool spend() {
    if (work_left_ == 0) return false;
    --work_left_;
    return true;
  }

  const Program& prog_;
  SearchBudget budget_;
  std::size_t work_left_;
  std::unordered_map<std::string, std::vector<const ProgramRule*>>
      rules_by_function_;
  std::unordered_map<MemoKey, Result, MemoKeyHash, MemoKeyEq> memo_;
  std::vector<ExprPtr> universe_;
  bool universe_built_ = false;
};

const std::vector<ExprPtr>& Denoter::universe() {
  if (!universe_built_) {
    universe_ = enumerate_patterns(prog_.sig, budget_.max_pattern_size);
    universe_built_ = true;
  }
  return universe_;
}

const Denoter::Result& Denoter::eval_canon(const ExprPtr& e, int depth) {
  MemoKey key{e, depth};
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  if (!spend()) {
    Result cut;
    cut.elems.push_back(Expr::bottom());
    cut.complete = false;
    return memo_.emplace(std::move(key), std::move(cut)).first->second;
  }

  Result res;
  std::vector<ExprPtr> out;
  ExprSet seen;
  const std::size_t cap =
      budget_.max_results ? *budget_.max_results : SIZE_MAX;
  // Inserts a derived value; returns false once the result cap cuts the
  // enumeration, which also clears the completeness flag.
  auto add = [&](const ExprPtr& t) -> bool {
    if (out.size() >= cap) {
      if (!seen.count(t)) res.complete = false;
      return false;
    }
    if (seen.insert(t).second) out.push_back(t);
    return true;
  };
  add(Expr::bottom());  // rule B applies to every expression

  Spine spine = decompose(e);
  if (spine.head->kind() == ExprKind::Variable && spine.args.empty()) {
    add(spine.head);  // rule RR
  } else if (spine.head->kind() == ExprKind::Symbol) {
    const std::string& h = spine.head->name();
    int arity = prog_.sig.arity(h);
    int m = static_cast<int>(spine.args.size());
    bool ctor = prog_.sig.is_constructor(h);

    // Rule DC: the conclusion head must still be able to form a pattern.
    if (ctor ? m <= arity : m < arity) {
      if (m == 0) {
        add(spine.head);
      } else {
        std::vector<Result> args;
        args.reserve(m);
        for (const auto& a : spine.args) {
          args.push_back(eval(a, depth));
          res.complete &= args.back().complete;
        }
        std::vector<std::size_t> sizes;
        for (const auto& r : args) sizes.push_back(r.elems.size());
        std::vector<ExprPtr> tuple(m);
        cartesian_product(sizes, [&](const std::vector<std::size_t>& idx) {
          if (!spend()) {
            res.complete = false;
            return false;
          }
          for (int i = 0; i < m; ++i) tuple[i] = args[i].elems[idx[i]];
          return add(compose(spine.head, tuple));
        });
      }
    }

    // Rule OR: function applied to at least its arity.
    if (!ctor && m >= arity) {
      if (depth == 0) {
        res.complete = false;  // branch cut by the budget
      } else {
        std::vector<Result> prem;
        prem.reserve(arity);
        for (int i = 0; i < arity; ++i) {
          prem.push_back(eval(spine.args[i], depth - 1));
          res.complete &= prem.back().complete;
        }
        std::span<const ExprPtr> over_args(spine.args.data() + arity,
                                           spine.args.size() - arity);
        auto rules_it = rules_by_function_.find(h);
        if (rules_it != rules_by_function_.end()) {
          for (const ProgramRule* rule_ptr : rules_it->second) {
            ProgramRule rule = rename_rule(*rule_ptr);
            std::vector<std::vector<std::pair<ExprPtr, PSubstitution>>> match;
            match.resize(arity);
            bool feasible = true;
            for (int i = 0; i < arity && feasible; ++i) {
              for (const auto& v : prem[i].elems)
                if (auto theta = match_pattern(rule.params[i], v))
                  match[i].push_back({v, std::move(*theta)});
              feasible = !match[i].empty();
            }
            if (!feasible) continue;

            std::vector<std::string> extras = rule_extra_variables(rule);
            if (!extras.empty() && !prog_.flags.extra_variables_allowed)
              throw Error("rule for '" + h +
                          "' has extra variables; extra-variable mode is off");

            std::vector<std::size_t> sizes;
            for (const auto& mlist : match) sizes.push_back(mlist.size());
            cartesian_product(sizes, [&](const std::vector<std::size_t>& idx) {
              if (!spend()) {
                res.complete = false;
                return false;
              }
              PSubstitution theta;
              for (int i = 0; i < arity; ++i)
                theta = PSubstitution::merge(theta, match[i][idx[i]].second);
              auto run_body = [&](const PSubstitution& full) -> bool {
                ExprPtr body = apply_substitution(rule.rhs, full);
                for (const auto& a : over_args) body = Expr::apply(body, a);
                Result sub = eval(body, depth - 1);
                res.complete &= sub.complete;
                for (const auto& t : sub.elems)
                  if (!add(t)) return false;
                return true;
              };
              if (extras.empty()) return run_body(theta);
              // The side condition only requires a pattern substitution, so
              // extra variables range over every partial pattern; we cut
              // that infinite space at max_pattern_size and report the
              // result as incomplete.
              res.complete = false;
              const auto& uni = universe();
              bool keep_going = true;
              std::vector<std::size_t> ext_sizes(extras.size(), uni.size());
              cartesian_product(
                  ext_sizes, [&](const std::vector<std::size_t>& eidx) {
                    if (!spend()) return keep_going = false;
                    PSubstitution full = theta;
                    for (std::size_t k = 0; k < extras.size(); ++k)
                      full.bind(extras[k], uni[eidx[k]]);
                    keep_going = run_body(full);
                    return keep_going;
                  });
              return keep_going;
            });
          }
        }
      }
    }
  }
  // Applied variables, over-applied constructors and the undefined value
  // derive nothing beyond rule B.

  res.elems = std::move(out);
  auto [it, inserted] = memo_.emplace(std::move(key), std::move(res));
  (void)inserted;
  return it->second;
}

std::optional<ProofPtr> Denoter::prove(const ExprPtr& e, const ExprPtr& t,
                                       int depth) {
  if (!member(eval(e, depth), t)) return std::nullopt;

  auto node = [&](RuleName rule, std::vector<ProofPtr> premises,
                  std::optional<OrInstance> instance =
                      std::nullopt) -> ProofPtr {
    auto p = std::make_shared<ProofTree>();
    p->rule = rule;
    p->expr = e;
    p->value = t;
    p->premises = std::move(premises);
    p->instance = std::move(instance);
    return p;
  };

  if (t->kind() == ExprKind::Bottom) return node(RuleName::B, {});
  if (e->kind() == ExprKind::Variable && equal(e, t))
    return node(RuleName::RR, {});

  Spine spine = decompose(e);
  if (spine.head->kind() != ExprKind::Symbol) return std::nullopt;
  const std::string& h = spine.head->name();
  int arity = prog_.sig.arity(h);
  int m = static_cast<int>(spine.args.size());
  bool ctor = prog_.sig.is_constructor(h);

  if (ctor ? m <= arity : m < arity) {
    Spine vs = decompose(t);
    if (vs.head->kind() == ExprKind::Symbol && vs.head->name() == h &&
        vs.args.size() == spine.args.size()) {
      std::vector<ProofPtr> premises;
      premises.reserve(m);
      for (int i = 0; i < m; ++i) {
        auto sub = prove(spine.args[i], vs.args[i], depth);
        if (!sub) return std::nullopt;
        premises.push_back(std::move(*sub));
      }
      return node(RuleName::DC, std::move(premises));
    }
    return std::nullopt;  // heads differ: no rule can conclude t here
  }

  if (ctor || depth == 0) return std::nullopt;

  // OR: replay the search until a rule instance covers t.
  std::vector<Result> prem;
  prem.reserve(arity);
  for (int i = 0; i < arity; ++i) prem.push_back(eval(spine.args[i], depth - 1));
  std::span<const ExprPtr> over_args(spine.args.data() + arity,
                                     spine.args.size() - arity);
  auto rules_it = rules_by_function_.find(h);
  if (rules_it == rules_by_function_.end()) return std::nullopt;

  for (const ProgramRule* rule_ptr : rules_it->second) {
    ProgramRule rule = rename_rule(*rule_ptr);
    std::vector<std::vector<std::pair<ExprPtr, PSubstitution>>> match;
    match.resize(arity);
    bool feasible = true;
    for (int i = 0; i < arity && feasible; ++i) {
      for (const auto& v : prem[i].elems)
        if (auto theta = match_pattern(rule.params[i], v))
          match[i].push_back({v, std::move(*theta)});
      feasible = !match[i].empty();
    }
    if (!feasible) continue;
    std::vector<std::string> extras = rule_extra_variables(rule);
    if (!extras.empty() && !prog_.flags.extra_variables_allowed)
      throw Error("rule for '" + h +
                  "' has extra variables; extra-variable mode is off");

    std::optional<ProofPtr> found;
    std::vector<std::size_t> sizes;
    for (const auto& mlist : match) sizes.push_back(mlist.size());
    cartesian_product(sizes, [&](const std::vector<std::size_t>& idx) {
      PSubstitution theta;
      for (int i = 0; i < arity; ++i)
        theta = PSubstitution::merge(theta, match[i][idx[i]].second);

      auto try_theta = [&](const PSubstitution& full) {
        if (found) return;
        ExprPtr body = apply_substitution(rule.rhs, full);
        for (const auto& a : over_args) body = Expr::apply(body, a);
        if (!member(eval(body, depth - 1), t)) return;
        std::vector<ProofPtr> premises;
        premises.reserve(arity + 1);
        for (int i = 0; i < arity; ++i) {
          auto sub = prove(spine.args[i], match[i][idx[i]].first, depth - 1);
          if (!sub) return;
          premises.push_back(std::move(*sub));
        }
        auto body_proof = prove(body, t, depth - 1);
        if (!body_proof) return;
        premises.push_back(std::move(*body_proof));
        auto p = std::make_shared<ProofTree>();
        p->rule = RuleName::OR;
        p->expr = e;
        p->value = t;
        p->premises = std::move(premises);
        p->instance = OrInstance{rule, full};
        found = p;
      };

      if (extras.empty()) {
        try_theta(theta);
      } else {
        const auto& uni = universe();
        std::vector<std::size_t> ext_sizes(extras.size(), uni.size());
        cartesian_product(ext_sizes,
                          [&](const std::vector<std::size_t>& eidx) {
                            PSubstitution full = theta;
                            for (std::size_t k = 0; k < extras.size(); ++k)
                              full.bind(extras[k], uni[eidx[k]]);
                            try_theta(full);
                            return !found;
                          });
      }
      return !found;
    });
    if (found) return found;
  }
  return std::nullopt;
}

}  // namespace

DenotationSet::DenotationSet(std::vector<ExprPtr> elems, SearchBudget bound,
                             bool complete)
    : bound_(bound), complete_(complete) {
  elems_ = sorted_patterns(std::move(elems));
  if (bound.max_results && elems_.size() > *bound.max_results) {
    elems_.resize(*bound.max_results);
    complete_ = false;
  }
  for (const auto& t : elems_) set_.insert(t);
}

std::vector<ExprPtr> DenotationSet::total_elements() const {
  std::vector<ExprPtr> out;
  for (const auto& t : elems_)
    if (t->total()) out.push_back(t);
  return out;
}

bool same_elements(const DenotationSet& a, const DenotationSet& b) {
  if (a.elements().size() != b.elements().size()) return false;
  for (const auto& t : a.elements())
    if (!b.contains(t)) return false;
  return true;
}

DenotationSet denote(const Program& p, const ExprPtr& e,
                     const SearchBudget& budget) {
  Denoter d(p, budget);
  auto res = d.eval(e, budget.max_or_depth);
  return DenotationSet(std::move(res.elems), budget, res.complete);
}

const char* rule_name(RuleName r) {
  switch (r) {
    case RuleName::B: return "B";
    case RuleName::RR: return "RR";
    case RuleName::DC: return "DC";
    case RuleName::OR: return "OR";
  }
  return "?";
}

int ProofTree::depth() const {
  int d = 0;
  for (const auto& p : premises) d = std::max(d, p->depth());
  return d + 1;
}

std::optional<ProofPtr> derive(const Program& p, const ExprPtr& e,
                               const ExprPtr& t, const SearchBudget& budget) {
  if (!is_pattern(t, p.sig))
    throw Error("derive: target '" + print_expr(t) + "' is not a pattern");
  Denoter d(p, budget);
  return d.prove(e, t, budget.max_or_depth);
}

namespace {

bool check_node(const Program& p, const ProofTree& n, const std::string& path,
                std::string& diag) {
  auto fail = [&](const std::string& why) {
    diag = path + ": " + why;
    return false;
  };
  if (!is_pattern(n.value, p.sig))
    return fail("conclusion value is not a pattern");

  switch (n.rule) {
    case RuleName::B:
      if (n.value->kind() != ExprKind::Bottom)
        return fail("B concludes only _|_");
      if (!n.premises.empty()) return fail("B has premises");
      return true;

    case RuleName::RR:
      if (n.expr->kind() != ExprKind::Variable)
        return fail("RR applies to variables only");
      if (!equal(n.expr, n.value)) return fail("RR concludes x ~> x");
      if (!n.premises.empty()) return fail("RR has premises");
      return true;

    case RuleName::DC: {
      Spine se = decompose(n.expr);
      Spine sv = decompose(n.value);
      if (se.head->kind() != ExprKind::Symbol)
        return fail("DC head must be a signature symbol");
      if (sv.head->kind() != ExprKind::Symbol ||
          sv.head->name() != se.head->name())
        return fail("DC conclusion head differs from the expression head");
      if (sv.args.size() != se.args.size())
        return fail("DC argument counts differ");
      if (n.premises.size() != se.args.size())
        return fail("DC premise count differs from argument count");
      for (std::size_t i = 0; i < se.args.size(); ++i) {
        const ProofTree& sub = *n.premises[i];
        if (!equal(sub.expr, se.args[i]) || !equal(sub.value, sv.args[i]))
          return fail("DC premise " + std::to_string(i + 1) +
                      " does not judge the matching argument");
        if (!check_node(p, sub, path + "." + std::to_string(i + 1), diag))
          return false;
      }
      return true;
    }

    case RuleName::OR: {
      if (!n.instance) return fail("OR without a rule instance");
      const OrInstance& inst = *n.instance;
      bool in_program = false;
      for (const auto& r : p.rules)
        if (rules_alpha_equal(r, inst.rule)) {
          in_program = true;
          break;
        }
      if (!in_program)
        return fail("instantiated rule is not a program rule");

      std::set<std::string> params;
      for (const auto& v : rule_param_variables(inst.rule)) params.insert(v);
      std::set<std::string> rhs_vars;
      for (const auto& v : variables_of(inst.rule.rhs)) rhs_vars.insert(v);
      for (const auto& [var, value] : inst.theta.mapping()) {
        if (!is_pattern(value, p.sig))
          return fail("theta image for '" + var + "' is not a pattern");
        if (params.count(var)) continue;
        if (p.flags.extra_variables_allowed && rhs_vars.count(var)) continue;
        return fail("theta binds '" + var +
                    "', which is not a rule parameter variable");
      }

      Spine se = decompose(n.expr);
      if (se.head->kind() != ExprKind::Symbol ||
          se.head->name() != inst.rule.function)
        return fail("OR expression head differs from the rule function");
      std::size_t nparams = inst.rule.params.size();
      if (se.args.size() < nparams)
        return fail("function applied to fewer arguments than its arity");
      if (n.premises.size() != nparams + 1)
        return fail("OR premise count must be arity + 1");
      for (std::size_t i = 0; i < nparams; ++i) {
        const ProofTree& sub = *n.premises[i];
        ExprPtr expected = apply_substitution(inst.rule.params[i], inst.theta);
        if (!equal(sub.expr, se.args[i]))
          return fail("OR premise " + std::to_string(i + 1) +
                      " judges the wrong argument");
        if (!equal(sub.value, expected))
          return fail("OR premise " + std::to_string(i + 1) +
                      " concludes a value inconsistent with theta");
        if (!check_node(p, sub, path + "." + std::to_string(i + 1), diag))
          return false;
      }
      ExprPtr body = apply_substitution(inst.rule.rhs, inst.theta);
      for (std::size_t i = nparams; i < se.args.size(); ++i)
        body = Expr::apply(body, se.args[i]);
      const ProofTree& last = *n.premises[nparams];
      if (!equal(last.expr, body))
        return fail("OR body premise does not judge the instantiated body");
      if (!equal(last.value, n.value))
        return fail("OR body premise concludes a different value");
      return check_node(p, last, path + "." + std::to_string(nparams + 1),
                        diag);
    }
  }
  return fail("unknown rule");
}

}  // namespace

ProofCheckResult check_proof(const Program& p, const ProofTree& proof) {
  ProofCheckResult res;
  std::string diag;
  res.ok = check_node(p, proof, "root", diag);
  res.diagnostic = diag;
  return res;
}

nlohmann::json proof_to_json(const ProofTree& proof) {
  nlohmann::json j;
  j["rule"] = rule_name(proof.rule);
  j["conclusion"] = {{"expr", print_expr(proof.expr)},
                     {"value", print_expr(proof.value)}};
  if (proof.instance) {
    j["rule_instance"] = print_rule(proof.instance->rule);
    nlohmann::json theta = nlohmann::json::object();
    for (const auto& [var, value] : proof.instance->theta.mapping())
      theta[var] = print_expr(value);
    j["theta"] = theta;
  }
  nlohmann::json premises = nlohmann::json::array();
  for (const auto& sub : proof.premises) premises.push_back(proof_to_json(*sub));
  j["premises"] = premises;
  return j;
}

nlohmann::json denotation_to_json(const ExprPtr& e, const DenotationSet& d) {
  nlohmann::json j;
  j["expr"] = print_expr(e);
  nlohmann::json elems = nlohmann::json::array();
  for (const auto& t : d.elements()) elems.push_back(print_expr(t));
  j["elements"] = elems;
  j["bound"] = {{"max_or_depth", d.bound().max_or_depth},
                {"max_pattern_size", d.bound().max_pattern_size}};
  j["complete_at_bound"] = d.complete_at_bound();
  return j;
}

std::vector<ExprPtr> enumerate_patterns(const Signature& sig, int max_size) {
  std::vector<std::vector<ExprPtr>> by_size(
      static_cast<std::size_t>(std::max(max_size, 0)) + 1);
  if (max_size < 1) return {};

  std::vector<std::pair<ExprPtr, int>> heads;  // symbol, max argument count
  for (const auto& [name, arity] : sig.constructors())
    heads.emplace_back(Expr::symbol(name), arity);
  for (const auto& [name, arity] : sig.functions())
    if (arity >= 1) heads.emplace_back(Expr::symbol(name), arity - 1);

  by_size[1].push_back(Expr::bottom());
  for (const auto& [head, maxargs] : heads) {
    (void)maxargs;
    by_size[1].push_back(head);
  }

  for (int size = 2; size <= max_size; ++size) {
    for (const auto& [head, maxargs] : heads) {
      int budget = size - 1;  // nodes available for the arguments
      for (int k = 1; k <= std::min(maxargs, budget); ++k) {
        // enumerate compositions of `budget` into k positive parts
        std::vector<int> parts(k, 1);
        std::vector<ExprPtr> args(k);
        auto rec = [&](auto&& self, int pos, int remaining) -> void {
          if (pos == k - 1) {
            parts[pos] = remaining;
            // all parts fixed: cartesian over by_size[parts[i]]
            std::vector<std::size_t> sizes;
            for (int i = 0; i < k; ++i) sizes.push_back(by_size[parts[i]].size());
            cartesian_product(sizes, [&](const std::vector<std::size_t>& idx) {
              for (int i = 0; i < k; ++i) args[i] = by_size[parts[i]][idx[i]];
              by_size[size].push_back(compose(head, args));
              return true;
            });
            return;
          }
          for (int take = 1; take <= remaining - (k - pos - 1); ++take) {
            parts[pos] = take;
            self(self, pos + 1, remaining - take);
          }
        };
        rec(rec, 0, budget);
      }
    }
  }

  std::vector<ExprPtr> out;
  for (auto& bucket : by_size) {
    // totals first, so grid searches report total witnesses when one exists
    std::sort(bucket.begin(), bucket.end(),
              [](const ExprPtr& a, const ExprPtr& b) {
                if (a->total() != b->total()) return a->total();
                return expr_less(a, b);
              });
    out.insert(out.end(), bucket.begin(), bucket.end());
  }
  return out;
}

}  // namespace hocrwl
