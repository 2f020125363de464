#include "hocrwl/analysis.hpp"

#include <algorithm>

#include "hocrwl/parser.hpp"

namespace hocrwl {

Observation observe(const Program& p, const ExprPtr& e, ObsKind kind,
                    const SearchBudget& budget) {
  DenotationSet d = denote(p, e, budget);
  Observation o;
  o.kind = kind;
  o.exhausted = d.complete_at_bound();
  for (const auto& t : d.elements()) {
    if (!t->total()) continue;
    if (kind == ObsKind::FO && !is_fo_pattern(t, p.sig)) continue;
    o.values.push_back(t);
  }
  return o;
}

namespace {

// Iterates all n-tuples over a fixed universe in lexicographic index order.
class TupleGrid {
public:
  TupleGrid(const std::vector<ExprPtr>& universe, int n)
      : universe_(universe), index_(static_cast<std::size_t>(n), 0) {
    if (universe.empty() && n > 0) done_ = true;
  }

  bool done() const { return done_; }

  std::vector<ExprPtr> current() const {
    std::vector<ExprPtr> out;
    out.reserve(index_.size());
    for (auto i : index_) out.push_back(universe_[i]);
    return out;
  }

  void advance() {
    std::size_t i = index_.size();
    while (i > 0) {
      --i;
      if (++index_[i] < universe_.size()) return;
      index_[i] = 0;
    }
    done_ = true;
  }

private:
  const std::vector<ExprPtr>& universe_;
  std::vector<std::size_t> index_;
  bool done_ = false;
};

ExprPtr apply_args(const ExprPtr& e, const std::vector<ExprPtr>& args) {
  ExprPtr out = e;
  for (const auto& a : args) out = Expr::apply(out, a);
  return out;
}

}  // namespace

ExtEquivVerdict ext_equiv(const Program& p, const ExprPtr& e,
                          const ExprPtr& e2, int n,
                          const SearchBudget& budget) {
  if (n < 0) throw Error("ext_equiv: negative arity");
  ExtEquivVerdict v;
  std::vector<ExprPtr> universe =
      enumerate_patterns(p.sig, budget.max_pattern_size);
  for (TupleGrid grid(universe, n); !grid.done(); grid.advance()) {
    auto args = grid.current();
    DenotationSet da = denote(p, apply_args(e, args), budget);
    DenotationSet db = denote(p, apply_args(e2, args), budget);
    v.all_complete &= da.complete_at_bound() && db.complete_at_bound();
    if (same_elements(da, db)) continue;
    v.equivalent = false;
    v.witness_args = std::move(args);
    for (const auto& t : da.elements())
      if (!db.contains(t)) {
        v.witness_value = t;
        v.value_in_first = true;
        return v;
      }
    for (const auto& t : db.elements())
      if (!da.contains(t)) {
        v.witness_value = t;
        v.value_in_first = false;
        return v;
      }
  }
  return v;
}

ExtSemantics ext_semantics(const Program& p, const ExprPtr& e, int n,
                           const SearchBudget& budget) {
  if (n < 0) throw Error("ext_semantics: negative arity");
  ExtSemantics out;
  out.arity = n;
  std::vector<ExprPtr> universe =
      enumerate_patterns(p.sig, budget.max_pattern_size);
  for (TupleGrid grid(universe, n); !grid.done(); grid.advance()) {
    auto args = grid.current();
    DenotationSet d = denote(p, apply_args(e, args), budget);
    out.table.emplace_back(std::move(args), std::move(d));
  }
  return out;
}

bool ext_semantics_equal(const ExtSemantics& a, const ExtSemantics& b) {
  if (a.arity != b.arity || a.table.size() != b.table.size()) return false;
  for (std::size_t i = 0; i < a.table.size(); ++i) {
    const auto& [args_a, da] = a.table[i];
    const auto& [args_b, db] = b.table[i];
    if (args_a.size() != args_b.size()) return false;
    for (std::size_t k = 0; k < args_a.size(); ++k)
      if (!equal(args_a[k], args_b[k])) return false;
    if (!same_elements(da, db)) return false;
  }
  return true;
}

CompositionalityVerdict check_compositionality(const Program& p,
                                               const ExprPtr& e,
                                               const ContextPtr& c,
                                               const SearchBudget& budget) {
  DenotationSet left = denote(p, apply_context(c, e), budget);
  DenotationSet inner = denote(p, e, budget);

  std::vector<ExprPtr> union_elems;
  ExprSet union_set;
  bool right_complete = inner.complete_at_bound();
  for (const auto& t : inner.elements()) {
    DenotationSet dt = denote(p, apply_context(c, t), budget);
    right_complete &= dt.complete_at_bound();
    for (const auto& u : dt.elements())
      if (union_set.insert(u).second) union_elems.push_back(u);
  }

  CompositionalityVerdict verdict;
  verdict.strict = left.complete_at_bound() && right_complete;

  auto diff = [](const std::vector<ExprPtr>& xs, auto&& contains) {
    std::vector<ExprPtr> out;
    for (const auto& x : xs)
      if (!contains(x)) out.push_back(x);
    return sorted_patterns(std::move(out));
  };

  if (verdict.strict) {
    verdict.only_left = diff(left.elements(),
                             [&](const ExprPtr& x) { return union_set.count(x) != 0; });
    verdict.only_right = diff(union_elems,
                              [&](const ExprPtr& x) { return left.contains(x); });
    verdict.holds = verdict.only_left.empty() && verdict.only_right.empty();
    return verdict;
  }

  // Budget-cut searches: retry each inclusion against the containing side at
  // twice the unfolding depth, so missing elements that are pure budget
  // artifacts do not show up as counterexamples.
  SearchBudget doubled = budget.with_or_depth(budget.max_or_depth * 2);

  DenotationSet left2 = denote(p, apply_context(c, e), doubled);
  verdict.only_right = diff(union_elems,
                            [&](const ExprPtr& x) { return left2.contains(x); });

  DenotationSet inner2 = denote(p, e, doubled);
  ExprSet union2;
  for (const auto& t : inner2.elements()) {
    DenotationSet dt = denote(p, apply_context(c, t), doubled);
    for (const auto& u : dt.elements()) union2.insert(u);
  }
  verdict.only_left = diff(left.elements(),
                           [&](const ExprPtr& x) { return union2.count(x) != 0; });

  verdict.holds = verdict.only_left.empty() && verdict.only_right.empty();
  return verdict;
}

namespace {

// Single-spine contexts with one hole, pattern fillers and bounded nesting.
// Within each nesting level the spine length grows outermost, so short
// contexts over every head are tried before long ones and cheap witnesses
// surface early.
class ContextEnumerator {
public:
  ContextEnumerator(const Program& p, const SearchBudget& budget, int max_depth)
      : prog_(p), max_depth_(max_depth) {
    fillers_ = enumerate_patterns(p.sig, budget.max_pattern_size);
    heads_.insert(heads_.end(), p.sig.functions().begin(),
                  p.sig.functions().end());
    heads_.insert(heads_.end(), p.sig.constructors().begin(),
                  p.sig.constructors().end());
    for (const auto& [name, arity] : heads_) {
      (void)name;
      int slots = prog_.sig.is_function(name) ? arity + 1 : arity;
      max_spine_ = std::max(max_spine_, slots);
    }
  }

  // Visits contexts by increasing nesting depth; stops when the visitor
  // returns false.
  template <class F>
  bool enumerate(F&& visit) {
    if (!visit(Context::hole())) return false;
    std::vector<ContextPtr> previous{Context::hole()};
    for (int depth = 1; depth <= max_depth_; ++depth) {
      std::vector<ContextPtr> level;
      for (int k = 1; k <= max_spine_; ++k)
        for (const auto& inner : previous)
          if (!spines_around(inner, k, level, visit)) return false;
      previous = std::move(level);
      if (previous.empty()) break;
    }
    return true;
  }

private:
  // All contexts `h a1 .. [inner] .. ak` with exactly k spine arguments.
  template <class F>
  bool spines_around(const ContextPtr& inner, int k,
                     std::vector<ContextPtr>& out, F&& visit) {
    for (const auto& [name, arity] : heads_) {
      // at most one over-application slot beyond a function's arity
      int max_args = prog_.sig.is_function(name) ? arity + 1 : arity;
      if (k > max_args) continue;
      for (int hole_pos = 0; hole_pos < k; ++hole_pos) {
        int fill_count = k - 1;
        if (fill_count > 0 && fillers_.empty()) continue;
        std::vector<std::size_t> idx(static_cast<std::size_t>(fill_count), 0);
        while (true) {
          ContextPtr c = build(name, k, hole_pos, idx, inner);
          out.push_back(c);
          if (!visit(c)) return false;
          std::size_t i = idx.size();
          bool advanced = false;
          while (i > 0) {
            --i;
            if (++idx[i] < fillers_.size()) {
              advanced = true;
              break;
            }
            idx[i] = 0;
          }
          if (!advanced) break;
        }
      }
    }
    return true;
  }

  ContextPtr build(const std::string& head, int k, int hole_pos,
                   const std::vector<std::size_t>& filler_idx,
                   const ContextPtr& inner) const {
    ExprPtr fun = Expr::symbol(head);
    std::size_t f = 0;
    for (int i = 0; i < hole_pos; ++i)
      fun = Expr::apply(fun, fillers_[filler_idx[f++]]);
    ContextPtr c = Context::apply_right(fun, inner);
    for (int i = hole_pos + 1; i < k; ++i)
      c = Context::apply_left(c, fillers_[filler_idx[f++]]);
    return c;
  }

  const Program& prog_;
  int max_depth_;
  int max_spine_ = 0;
  std::vector<ExprPtr> fillers_;
  std::vector<std::pair<std::string, int>> heads_;
};

}  // namespace

UnsoundnessResult unsoundness_witness(const Program& p, const ExprPtr& e,
                                      const ExprPtr& e2, int n, ObsKind kind,
                                      const SearchBudget& budget,
                                      std::size_t max_contexts) {
  UnsoundnessResult res;
  res.equiv = ext_equiv(p, e, e2, n, budget);
  if (!res.equiv.equivalent) {
    res.status = UnsoundnessStatus::NotApplicable;
    return res;
  }

  auto observe_values = [&](const ExprPtr& x) {
    Observation o = observe(p, x, kind, budget);
    ExprSet set;
    for (const auto& t : o.values) set.insert(t);
    return std::make_pair(std::move(o.values), std::move(set));
  };

  ContextEnumerator contexts(p, budget, 3);
  contexts.enumerate([&](const ContextPtr& c) {
    if (res.contexts_tried >= max_contexts) return false;
    ++res.contexts_tried;
    auto [va, sa] = observe_values(apply_context(c, e));
    auto [vb, sb] = observe_values(apply_context(c, e2));
    std::vector<ExprPtr> split;
    ExprPtr first;
    bool in_first = false;
    for (const auto& t : va)
      if (!sb.count(t)) {
        if (!first) {
          first = t;
          in_first = true;
        }
        split.push_back(t);
      }
    for (const auto& t : vb)
      if (!sa.count(t)) {
        if (!first) first = t;
        split.push_back(t);
      }
    if (split.empty()) return true;
    res.status = UnsoundnessStatus::WitnessFound;
    res.context = c;
    res.split = sorted_patterns(std::move(split));
    res.first_value = first;
    res.value_in_first = in_first;
    return false;
  });
  return res;
}

nlohmann::json observation_to_json(const ExprPtr& e, const Observation& o) {
  nlohmann::json j;
  j["expr"] = print_expr(e);
  j["kind"] = o.kind == ObsKind::FO ? "FO" : "HO";
  nlohmann::json values = nlohmann::json::array();
  for (const auto& t : o.values) values.push_back(print_expr(t));
  j["values"] = values;
  j["exhausted"] = o.exhausted;
  return j;
}

nlohmann::json ext_equiv_to_json(const ExtEquivVerdict& v) {
  nlohmann::json j;
  if (v.equivalent) {
    j["verdict"] = "equivalent-at-bound";
    j["all_complete"] = v.all_complete;
    return j;
  }
  j["verdict"] = "distinguished";
  nlohmann::json args = nlohmann::json::array();
  for (const auto& a : v.witness_args) args.push_back(print_expr(a));
  j["witness_args"] = args;
  j["witness_value"] = print_expr(v.witness_value);
  j["value_in_first"] = v.value_in_first;
  return j;
}

}  // namespace hocrwl
