#include "hocrwl/letrw.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <unordered_set>

#include "hocrwl/parser.hpp"

namespace hocrwl {

namespace {

std::size_t hash_combine(std::size_t a, std::size_t b) {
  return a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
}

}  // namespace

LetPtr LetExpr::variable(std::string name) {
  auto e = std::shared_ptr<LetExpr>(new LetExpr());
  e->kind_ = LetKind::Variable;
  e->name_ = std::move(name);
  e->hash_ = hash_combine(0x77aa, std::hash<std::string>{}(e->name_));
  return e;
}

LetPtr LetExpr::symbol(std::string name) {
  auto e = std::shared_ptr<LetExpr>(new LetExpr());
  e->kind_ = LetKind::Symbol;
  e->name_ = std::move(name);
  e->hash_ = hash_combine(0x3c2d, std::hash<std::string>{}(e->name_));
  return e;
}

const LetPtr& LetExpr::bottom() {
  static const LetPtr instance = [] {
    auto e = std::shared_ptr<LetExpr>(new LetExpr());
    e->kind_ = LetKind::Bottom;
    e->hash_ = 0x51f3;
    return e;
  }();
  return instance;
}

LetPtr LetExpr::apply(LetPtr fun, LetPtr arg) {
  auto e = std::shared_ptr<LetExpr>(new LetExpr());
  e->kind_ = LetKind::Apply;
  e->hash_ = hash_combine(hash_combine(0x60b1, fun->hash()), arg->hash());
  e->size_ = fun->size() + arg->size() + 1;
  e->has_let_ = fun->has_let() || arg->has_let();
  e->a_ = std::move(fun);
  e->b_ = std::move(arg);
  return e;
}

LetPtr LetExpr::let(std::string binder, LetPtr bound, LetPtr body) {
  auto e = std::shared_ptr<LetExpr>(new LetExpr());
  e->kind_ = LetKind::Let;
  e->name_ = std::move(binder);
  e->hash_ = hash_combine(
      hash_combine(hash_combine(0x8e47, std::hash<std::string>{}(e->name_)),
                   bound->hash()),
      body->hash());
  e->size_ = bound->size() + body->size() + 1;
  e->has_let_ = true;
  e->a_ = std::move(bound);
  e->b_ = std::move(body);
  return e;
}

bool let_equal(const LetPtr& a, const LetPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->hash() != b->hash() || a->kind() != b->kind() || a->size() != b->size())
    return false;
  switch (a->kind()) {
    case LetKind::Bottom:
      return true;
    case LetKind::Variable:
    case LetKind::Symbol:
      return a->name() == b->name();
    case LetKind::Apply:
      return let_equal(a->fun(), b->fun()) && let_equal(a->arg(), b->arg());
    case LetKind::Let:
      return a->name() == b->name() && let_equal(a->bound(), b->bound()) &&
             let_equal(a->body(), b->body());
  }
  return false;
}

LetPtr from_expr(const ExprPtr& e) {
  switch (e->kind()) {
    case ExprKind::Variable:
      return LetExpr::variable(e->name());
    case ExprKind::Symbol:
      return LetExpr::symbol(e->name());
    case ExprKind::Bottom:
      return LetExpr::bottom();
    case ExprKind::Apply:
      return LetExpr::apply(from_expr(e->fun()), from_expr(e->arg()));
  }
  throw Error("corrupt expression");
}

ExprPtr to_expr(const LetPtr& e) {
  switch (e->kind()) {
    case LetKind::Variable:
      return Expr::variable(e->name());
    case LetKind::Symbol:
      return Expr::symbol(e->name());
    case LetKind::Bottom:
      return Expr::bottom();
    case LetKind::Apply:
      return Expr::apply(to_expr(e->fun()), to_expr(e->arg()));
    case LetKind::Let:
      throw Error("to_expr: expression contains a let binding");
  }
  throw Error("corrupt expression");
}

bool occurs_free(const LetPtr& e, const std::string& var) {
  switch (e->kind()) {
    case LetKind::Variable:
      return e->name() == var;
    case LetKind::Apply:
      return occurs_free(e->fun(), var) || occurs_free(e->arg(), var);
    case LetKind::Let:
      if (occurs_free(e->bound(), var)) return true;
      if (e->name() == var) return false;  // shadowed in the body
      return occurs_free(e->body(), var);
    default:
      return false;
  }
}

namespace {

struct LetSpine {
  LetPtr head;
  std::vector<LetPtr> args;
};

LetSpine let_decompose(const LetPtr& e) {
  LetSpine s;
  LetPtr cur = e;
  while (cur->kind() == LetKind::Apply) {
    s.args.push_back(cur->arg());
    cur = cur->fun();
  }
  s.head = cur;
  std::reverse(s.args.begin(), s.args.end());
  return s;
}

LetPtr let_compose(LetPtr head, const std::vector<LetPtr>& args) {
  LetPtr cur = std::move(head);
  for (const auto& a : args) cur = LetExpr::apply(cur, a);
  return cur;
}

LetPtr substitute_var(const LetPtr& e, const std::string& var,
                      const LetPtr& value) {
  switch (e->kind()) {
    case LetKind::Variable:
      return e->name() == var ? value : e;
    case LetKind::Apply: {
      auto f = substitute_var(e->fun(), var, value);
      auto a = substitute_var(e->arg(), var, value);
      if (f.get() == e->fun().get() && a.get() == e->arg().get()) return e;
      return LetExpr::apply(std::move(f), std::move(a));
    }
    case LetKind::Let: {
      auto b = substitute_var(e->bound(), var, value);
      auto body = e->name() == var ? e->body()
                                   : substitute_var(e->body(), var, value);
      if (b.get() == e->bound().get() && body.get() == e->body().get())
        return e;
      return LetExpr::let(e->name(), std::move(b), std::move(body));
    }
    default:
      return e;
  }
}

int max_binder_index(const LetPtr& e) {
  int best = -1;
  auto rec = [&](auto&& self, const LetPtr& cur) -> void {
    switch (cur->kind()) {
      case LetKind::Apply:
        self(self, cur->fun());
        self(self, cur->arg());
        return;
      case LetKind::Let: {
        const std::string& n = cur->name();
        if (n.size() > 1 && n[0] == '$') {
          int idx = 0;
          bool num = true;
          for (std::size_t i = 1; i < n.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(n[i]))) {
              num = false;
              break;
            }
            idx = idx * 10 + (n[i] - '0');
          }
          if (num) best = std::max(best, idx);
        }
        self(self, cur->bound());
        self(self, cur->body());
        return;
      }
      default:
        return;
    }
  };
  rec(rec, e);
  return best;
}

}  // namespace

bool is_let_pattern(const LetPtr& e, const Signature& sig) {
  if (e->has_let()) return false;
  switch (e->kind()) {
    case LetKind::Variable:
    case LetKind::Bottom:
      return true;
    default:
      break;
  }
  LetSpine s = let_decompose(e);
  if (s.head->kind() != LetKind::Symbol) return s.head->kind() == LetKind::Variable && s.args.empty();
  int ar = sig.arity(s.head->name());
  int m = static_cast<int>(s.args.size());
  bool head_ok = sig.is_constructor(s.head->name()) ? m <= ar : m < ar;
  if (!head_ok) return false;
  for (const auto& a : s.args)
    if (!is_let_pattern(a, sig)) return false;
  return true;
}

bool is_total_let(const LetPtr& e) {
  switch (e->kind()) {
    case LetKind::Bottom:
      return false;
    case LetKind::Apply:
      return is_total_let(e->fun()) && is_total_let(e->arg());
    case LetKind::Let:
      return is_total_let(e->bound()) && is_total_let(e->body());
    default:
      return true;
  }
}

namespace {

LetPtr canonical_rec(const LetPtr& e, int& counter,
                     std::map<std::string, std::string>& active) {
  switch (e->kind()) {
    case LetKind::Variable: {
      auto it = active.find(e->name());
      return it == active.end() ? e : LetExpr::variable(it->second);
    }
    case LetKind::Apply: {
      auto f = canonical_rec(e->fun(), counter, active);
      auto a = canonical_rec(e->arg(), counter, active);
      return LetExpr::apply(std::move(f), std::move(a));
    }
    case LetKind::Let: {
      auto b = canonical_rec(e->bound(), counter, active);
      std::string fresh = "$" + std::to_string(counter++);
      auto saved = active.find(e->name());
      std::optional<std::string> previous;
      if (saved != active.end()) previous = saved->second;
      active[e->name()] = fresh;
      auto body = canonical_rec(e->body(), counter, active);
      if (previous)
        active[e->name()] = *previous;
      else
        active.erase(e->name());
      return LetExpr::let(std::move(fresh), std::move(b), std::move(body));
    }
    default:
      return e;
  }
}

}  // namespace

LetPtr canonical_lets(const LetPtr& e) {
  int counter = 0;
  std::map<std::string, std::string> active;
  return canonical_rec(e, counter, active);
}

namespace {

void print_let_rec(const LetPtr& e, std::string& out, bool parens) {
  switch (e->kind()) {
    case LetKind::Variable:
    case LetKind::Symbol:
      out += e->name();
      return;
    case LetKind::Bottom:
      out += "_|_";
      return;
    case LetKind::Apply: {
      if (parens) out += '(';
      LetSpine s = let_decompose(e);
      print_let_rec(s.head, out, s.head->kind() == LetKind::Let);
      for (const auto& a : s.args) {
        out += ' ';
        print_let_rec(a, out,
                      a->kind() == LetKind::Apply || a->kind() == LetKind::Let);
      }
      if (parens) out += ')';
      return;
    }
    case LetKind::Let: {
      if (parens) out += '(';
      out += "let " + e->name() + " = ";
      print_let_rec(e->bound(), out, false);
      out += " in ";
      print_let_rec(e->body(), out, false);
      if (parens) out += ')';
      return;
    }
  }
}

struct RawStep {
  const char* rule;
  std::vector<int> path;
  LetPtr replacement;
};

LetPtr replace_at(const LetPtr& e, const std::vector<int>& path,
                  std::size_t pos, const LetPtr& replacement) {
  if (pos == path.size()) return replacement;
  int branch = path[pos];
  switch (e->kind()) {
    case LetKind::Apply:
      if (branch == 0)
        return LetExpr::apply(replace_at(e->fun(), path, pos + 1, replacement),
                              e->arg());
      return LetExpr::apply(e->fun(),
                            replace_at(e->arg(), path, pos + 1, replacement));
    case LetKind::Let:
      if (branch == 0)
        return LetExpr::let(e->name(),
                            replace_at(e->bound(), path, pos + 1, replacement),
                            e->body());
      return LetExpr::let(e->name(), e->bound(),
                          replace_at(e->body(), path, pos + 1, replacement));
    default:
      throw Error("bad rewrite path");
  }
}

class Stepper {
public:
  Stepper(const Program& p, const LetPtr& root)
      : prog_(p), root_(root), fresh_(max_binder_index(root) + 1) {}

  std::vector<StepSuccessor> run() {
    std::vector<int> path;
    collect(root_, false, path);
    std::vector<StepSuccessor> out;
    out.reserve(raw_.size());
    for (const auto& r : raw_)
      out.push_back({r.rule, r.path, replace_at(root_, r.path, 0, r.replacement)});
    return out;
  }

private:
  void emit(const char* rule, const std::vector<int>& path, LetPtr repl) {
    raw_.push_back({rule, path, std::move(repl)});
  }

  void collect(const LetPtr& node, bool in_fun_position,
               std::vector<int>& path) {
    switch (node->kind()) {
      case LetKind::Symbol: {
        // nullary function symbols are redexes on their own
        if (prog_.sig.is_function(node->name()) &&
            prog_.sig.arity(node->name()) == 0) {
          LetSpine s;
          s.head = node;
          try_fapp(s, path);
        }
        return;
      }
      case LetKind::Apply: {
        LetSpine s = let_decompose(node);
        if (s.head->kind() == LetKind::Symbol &&
            prog_.sig.is_function(s.head->name())) {
          int ar = prog_.sig.arity(s.head->name());
          int m = static_cast<int>(s.args.size());
          if (m == ar) try_fapp(s, path);
          // Sharing: a non-pattern argument in parameter position is bound
          // before any rule can fire, so its value is chosen once. Only
          // maximal spines are wrapped, which keeps lets out of function
          // positions.
          if (!in_fun_position && ar >= 1 && m >= ar) {
            for (int i = 0; i < ar; ++i) {
              if (is_let_pattern(s.args[i], prog_.sig)) continue;
              std::string binder = "$" + std::to_string(fresh_);
              std::vector<LetPtr> args = s.args;
              args[i] = LetExpr::variable(binder);
              emit("LetIn", path,
                   LetExpr::let(binder, s.args[i], let_compose(s.head, args)));
            }
          }
        }
        path.push_back(0);
        collect(node->fun(), true, path);
        path.back() = 1;
        collect(node->arg(), false, path);
        path.pop_back();
        return;
      }
      case LetKind::Let: {
        if (is_let_pattern(node->bound(), prog_.sig))
          emit("Bind", path,
               substitute_var(node->body(), node->name(), node->bound()));
        if (!occurs_free(node->body(), node->name()))
          emit("Elim", path, node->body());
        if (node->bound()->kind() == LetKind::Let) {
          const LetPtr& inner = node->bound();
          if (!occurs_free(node->body(), inner->name()))
            emit("Flat", path,
                 LetExpr::let(inner->name(), inner->bound(),
                              LetExpr::let(node->name(), inner->body(),
                                           node->body())));
        }
        path.push_back(0);
        collect(node->bound(), false, path);
        path.back() = 1;
        collect(node->body(), false, path);
        path.pop_back();
        return;
      }
      default:
        return;
    }
  }

  void try_fapp(const LetSpine& s, const std::vector<int>& path) {
    for (const auto& a : s.args)
      if (!is_let_pattern(a, prog_.sig)) return;
    std::vector<ExprPtr> args;
    args.reserve(s.args.size());
    for (const auto& a : s.args) args.push_back(to_expr(a));

    for (const ProgramRule* rule : prog_.rules_for(s.head->name())) {
      if (!rule_extra_variables(*rule).empty())
        throw Error("let-rewriting requires rules without extra variables");
      PSubstitution theta;
      bool ok = true;
      for (std::size_t i = 0; i < args.size() && ok; ++i) {
        auto m = match_pattern(rule->params[i], args[i]);
        if (!m) {
          ok = false;
          break;
        }
        theta = PSubstitution::merge(theta, *m);
      }
      if (!ok) continue;
      emit("Fapp", path, from_expr(apply_substitution(rule->rhs, theta)));
    }
  }

  const Program& prog_;
  LetPtr root_;
  int fresh_;
  std::vector<RawStep> raw_;
};

}  // namespace

std::string print_letexpr(const LetPtr& e) {
  std::string out;
  print_let_rec(e, out, false);
  return out;
}

std::vector<StepSuccessor> step(const Program& p, const LetPtr& e) {
  return Stepper(p, e).run();
}

ReachResult reachable_patterns(const Program& p, const ExprPtr& e,
                               int max_steps, std::size_t max_states) {
  ReachResult res;
  std::unordered_set<LetPtr, LetHash, LetEq> visited;
  std::deque<std::pair<LetPtr, int>> queue;
  ExprSet collected;

  LetPtr start = canonical_lets(from_expr(e));
  visited.insert(start);
  queue.emplace_back(start, 0);

  std::vector<ExprPtr> patterns;
  while (!queue.empty()) {
    auto [state, depth] = queue.front();
    queue.pop_front();

    if (is_let_pattern(state, p.sig)) {
      if (is_total_let(state)) {
        ExprPtr t = to_expr(state);
        if (collected.insert(t).second) patterns.push_back(t);
      }
      continue;  // patterns are normal forms
    }

    auto succs = step(p, state);
    for (const auto& s : succs) {
      LetPtr canon = canonical_lets(s.state);
      if (visited.count(canon)) continue;
      if (depth >= max_steps) {
        res.exhausted = false;  // frontier cut by the step bound
        continue;
      }
      if (visited.size() >= max_states) {
        res.exhausted = false;  // frontier cut by the state cap
        continue;
      }
      visited.insert(canon);
      queue.emplace_back(std::move(canon), depth + 1);
    }
  }

  res.states_explored = visited.size();
  res.patterns = sorted_patterns(std::move(patterns));
  return res;
}

Trace random_trace(const Program& p, const ExprPtr& e, std::uint64_t seed,
                   int max_steps) {
  Trace trace;
  trace.initial = from_expr(e);
  std::mt19937_64 rng(seed);
  LetPtr current = trace.initial;
  for (int i = 0; i < max_steps; ++i) {
    auto succs = step(p, current);
    if (succs.empty()) break;
    auto& pick = succs[rng() % succs.size()];
    trace.steps.push_back({pick.rule, pick.path, pick.state});
    current = pick.state;
  }
  return trace;
}

std::string format_path(const std::vector<int>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(path[i]);
  }
  return out;
}

nlohmann::json trace_to_json(const Trace& trace) {
  nlohmann::json j;
  j["initial"] = print_letexpr(trace.initial);
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : trace.steps)
    steps.push_back({{"rule", s.rule},
                     {"position", format_path(s.path)},
                     {"state", print_letexpr(s.state)}});
  j["steps"] = steps;
  return j;
}

}  // namespace hocrwl
