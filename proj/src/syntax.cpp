#include "hocrwl/syntax.hpp"

#include <algorithm>

namespace hocrwl {

namespace {

std::size_t hash_combine(std::size_t a, std::size_t b) {
  return a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
}

std::size_t hash_string(const std::string& s) {
  return std::hash<std::string>{}(s);
}

}  // namespace

ExprPtr Expr::variable(std::string name) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Variable;
  e->name_ = std::move(name);
  e->hash_ = hash_combine(0x56a1, hash_string(e->name_));
  return e;
}

ExprPtr Expr::symbol(std::string name) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Symbol;
  e->name_ = std::move(name);
  e->hash_ = hash_combine(0x9c0f, hash_string(e->name_));
  return e;
}

ExprPtr Expr::apply(ExprPtr fun, ExprPtr arg) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Apply;
  e->hash_ = hash_combine(hash_combine(0x417b, fun->hash()), arg->hash());
  e->size_ = fun->size() + arg->size() + 1;
  e->total_ = fun->total() && arg->total();
  e->fun_ = std::move(fun);
  e->arg_ = std::move(arg);
  return e;
}

const ExprPtr& Expr::bottom() {
  static const ExprPtr instance = [] {
    auto e = std::shared_ptr<Expr>(new Expr());
    e->kind_ = ExprKind::Bottom;
    e->hash_ = 0x2b07;
    e->total_ = false;
    return e;
  }();
  return instance;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->hash() != b->hash() || a->kind() != b->kind() || a->size() != b->size())
    return false;
  switch (a->kind()) {
    case ExprKind::Bottom:
      return true;
    case ExprKind::Variable:
    case ExprKind::Symbol:
      return a->name() == b->name();
    case ExprKind::Apply:
      return equal(a->fun(), b->fun()) && equal(a->arg(), b->arg());
  }
  return false;
}

Spine decompose(const ExprPtr& e) {
  Spine s;
  ExprPtr cur = e;
  while (cur->kind() == ExprKind::Apply) {
    s.args.push_back(cur->arg());
    cur = cur->fun();
  }
  s.head = cur;
  std::reverse(s.args.begin(), s.args.end());
  return s;
}

ExprPtr compose(ExprPtr head, std::span<const ExprPtr> args) {
  ExprPtr cur = std::move(head);
  for (const auto& a : args) cur = Expr::apply(cur, a);
  return cur;
}

namespace {

void collect_variables(const ExprPtr& e, std::vector<std::string>& out,
                       std::set<std::string>& seen) {
  switch (e->kind()) {
    case ExprKind::Variable:
      if (seen.insert(e->name()).second) out.push_back(e->name());
      return;
    case ExprKind::Apply:
      collect_variables(e->fun(), out, seen);
      collect_variables(e->arg(), out, seen);
      return;
    default:
      return;
  }
}

}  // namespace

std::vector<std::string> variables_of(const ExprPtr& e) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  collect_variables(e, out, seen);
  return out;
}

bool occurs(const ExprPtr& e, const std::string& var) {
  switch (e->kind()) {
    case ExprKind::Variable:
      return e->name() == var;
    case ExprKind::Apply:
      return occurs(e->fun(), var) || occurs(e->arg(), var);
    default:
      return false;
  }
}

namespace {

ExprPtr rename_rec(const ExprPtr& e,
                   std::map<std::string, ExprPtr>& mapping,
                   std::vector<std::string>& order,
                   const std::string& prefix) {
  switch (e->kind()) {
    case ExprKind::Variable: {
      auto it = mapping.find(e->name());
      if (it == mapping.end()) {
        auto fresh = Expr::variable(prefix + std::to_string(order.size()));
        order.push_back(e->name());
        it = mapping.emplace(e->name(), std::move(fresh)).first;
      }
      return it->second;
    }
    case ExprKind::Apply: {
      auto f = rename_rec(e->fun(), mapping, order, prefix);
      auto a = rename_rec(e->arg(), mapping, order, prefix);
      return Expr::apply(std::move(f), std::move(a));
    }
    default:
      return e;
  }
}

}  // namespace

std::pair<ExprPtr, std::vector<std::string>> canonicalize_variables(
    const ExprPtr& e, const std::string& prefix) {
  std::map<std::string, ExprPtr> mapping;
  std::vector<std::string> order;
  auto renamed = rename_rec(e, mapping, order, prefix);
  return {std::move(renamed), std::move(order)};
}

namespace {

int expr_compare(const ExprPtr& a, const ExprPtr& b) {
  if (a->size() != b->size()) return a->size() < b->size() ? -1 : 1;
  auto rank = [](ExprKind k) {
    switch (k) {
      case ExprKind::Bottom: return 0;
      case ExprKind::Variable: return 1;
      case ExprKind::Symbol: return 2;
      case ExprKind::Apply: return 3;
    }
    return 4;
  };
  if (rank(a->kind()) != rank(b->kind()))
    return rank(a->kind()) < rank(b->kind()) ? -1 : 1;
  switch (a->kind()) {
    case ExprKind::Bottom:
      return 0;
    case ExprKind::Variable:
    case ExprKind::Symbol:
      return a->name().compare(b->name());
    case ExprKind::Apply: {
      int c = expr_compare(a->fun(), b->fun());
      return c != 0 ? c : expr_compare(a->arg(), b->arg());
    }
  }
  return 0;
}

}  // namespace

bool expr_less(const ExprPtr& a, const ExprPtr& b) {
  return expr_compare(a, b) < 0;
}

std::vector<ExprPtr> sorted_patterns(std::vector<ExprPtr> elems) {
  std::sort(elems.begin(), elems.end(), expr_less);
  return elems;
}

// ---------------------------------------------------------------------------

void Signature::add_constructor(const std::string& name, int arity) {
  if (arity < 0) throw Error("negative arity for constructor " + name);
  if (name.empty() || name == "_|_")
    throw Error("reserved or empty constructor name");
  if (func_arity_.count(name))
    throw Error("symbol '" + name + "' already declared as a function");
  auto it = ctor_arity_.find(name);
  if (it != ctor_arity_.end()) {
    if (it->second != arity)
      throw Error("conflicting arities for constructor " + name);
    return;
  }
  ctor_arity_.emplace(name, arity);
  ctors_.emplace_back(name, arity);
}

void Signature::add_function(const std::string& name, int arity) {
  if (arity < 0) throw Error("negative arity for function " + name);
  if (name.empty() || name == "_|_")
    throw Error("reserved or empty function name");
  if (ctor_arity_.count(name))
    throw Error("symbol '" + name + "' already declared as a constructor");
  auto it = func_arity_.find(name);
  if (it != func_arity_.end()) {
    if (it->second != arity)
      throw Error("conflicting arities for function " + name);
    return;
  }
  func_arity_.emplace(name, arity);
  funcs_.emplace_back(name, arity);
}

bool Signature::contains(const std::string& name) const {
  return ctor_arity_.count(name) || func_arity_.count(name);
}

bool Signature::is_constructor(const std::string& name) const {
  return ctor_arity_.count(name) != 0;
}

bool Signature::is_function(const std::string& name) const {
  return func_arity_.count(name) != 0;
}

std::optional<int> Signature::find_arity(const std::string& name) const {
  if (auto it = ctor_arity_.find(name); it != ctor_arity_.end())
    return it->second;
  if (auto it = func_arity_.find(name); it != func_arity_.end())
    return it->second;
  return std::nullopt;
}

int Signature::arity(const std::string& name) const {
  auto a = find_arity(name);
  if (!a) throw Error("undeclared symbol '" + name + "'");
  return *a;
}

bool is_pattern(const ExprPtr& e, const Signature& sig) {
  switch (e->kind()) {
    case ExprKind::Variable:
    case ExprKind::Bottom:
      return true;
    default:
      break;
  }
  Spine s = decompose(e);
  switch (s.head->kind()) {
    case ExprKind::Variable:
      return false;  // applied variables are not patterns
    case ExprKind::Bottom:
      return s.args.empty();
    case ExprKind::Symbol: {
      int ar = sig.arity(s.head->name());
      int m = static_cast<int>(s.args.size());
      bool head_ok = sig.is_constructor(s.head->name()) ? m <= ar : m < ar;
      if (!head_ok) return false;
      for (const auto& a : s.args)
        if (!is_pattern(a, sig)) return false;
      return true;
    }
    case ExprKind::Apply:
      return false;  // unreachable: decompose never yields Apply heads
  }
  return false;
}

bool is_fo_pattern(const ExprPtr& e, const Signature& sig) {
  switch (e->kind()) {
    case ExprKind::Variable:
    case ExprKind::Bottom:
      return true;
    default:
      break;
  }
  Spine s = decompose(e);
  if (s.head->kind() != ExprKind::Symbol) return false;
  if (!sig.contains(s.head->name()))
    throw Error("undeclared symbol '" + s.head->name() + "'");
  if (!sig.is_constructor(s.head->name())) return false;
  if (static_cast<int>(s.args.size()) != sig.arity(s.head->name())) return false;
  for (const auto& a : s.args)
    if (!is_fo_pattern(a, sig)) return false;
  return true;
}

// ---------------------------------------------------------------------------

const ContextPtr& Context::hole() {
  static const ContextPtr instance = std::shared_ptr<Context>(new Context());
  return instance;
}

ContextPtr Context::apply_left(ContextPtr inner, ExprPtr arg) {
  auto c = std::shared_ptr<Context>(new Context());
  c->kind_ = ContextKind::ApplyLeft;
  c->inner_ = std::move(inner);
  c->expr_ = std::move(arg);
  return c;
}

ContextPtr Context::apply_right(ExprPtr fun, ContextPtr inner) {
  auto c = std::shared_ptr<Context>(new Context());
  c->kind_ = ContextKind::ApplyRight;
  c->inner_ = std::move(inner);
  c->expr_ = std::move(fun);
  return c;
}

ExprPtr apply_context(const ContextPtr& c, const ExprPtr& e) {
  switch (c->kind()) {
    case ContextKind::Hole:
      return e;
    case ContextKind::ApplyLeft:
      return Expr::apply(apply_context(c->inner(), e), c->expr());
    case ContextKind::ApplyRight:
      return Expr::apply(c->expr(), apply_context(c->inner(), e));
  }
  throw Error("corrupt context");
}

// ---------------------------------------------------------------------------

void PSubstitution::bind(const std::string& var, ExprPtr value) {
  auto [it, inserted] = map_.emplace(var, std::move(value));
  if (!inserted) throw Error("variable '" + var + "' already bound");
}

const ExprPtr* PSubstitution::find(const std::string& var) const {
  auto it = map_.find(var);
  return it == map_.end() ? nullptr : &it->second;
}

PSubstitution PSubstitution::merge(const PSubstitution& a,
                                   const PSubstitution& b) {
  PSubstitution out = a;
  for (const auto& [var, value] : b.map_) out.bind(var, value);
  return out;
}

ExprPtr apply_substitution(const ExprPtr& e, const PSubstitution& theta) {
  if (theta.empty()) return e;
  switch (e->kind()) {
    case ExprKind::Variable:
      if (const ExprPtr* v = theta.find(e->name())) return *v;
      return e;
    case ExprKind::Apply: {
      auto f = apply_substitution(e->fun(), theta);
      auto a = apply_substitution(e->arg(), theta);
      if (f.get() == e->fun().get() && a.get() == e->arg().get()) return e;
      return Expr::apply(std::move(f), std::move(a));
    }
    default:
      return e;
  }
}

namespace {

bool match_rec(const ExprPtr& pattern, const ExprPtr& value,
               PSubstitution& theta) {
  if (pattern->kind() == ExprKind::Variable) {
    if (const ExprPtr* bound = theta.find(pattern->name()))
      return equal(*bound, value);
    theta.bind(pattern->name(), value);
    return true;
  }
  if (pattern->kind() != value->kind()) return false;
  switch (pattern->kind()) {
    case ExprKind::Bottom:
      return true;
    case ExprKind::Symbol:
      return pattern->name() == value->name();
    case ExprKind::Apply:
      return match_rec(pattern->fun(), value->fun(), theta) &&
             match_rec(pattern->arg(), value->arg(), theta);
    default:
      return false;
  }
}

}  // namespace

std::optional<PSubstitution> match_pattern(const ExprPtr& pattern,
                                           const ExprPtr& value) {
  PSubstitution theta;
  if (!match_rec(pattern, value, theta)) return std::nullopt;
  return theta;
}

// ---------------------------------------------------------------------------

ExprPtr rule_lhs(const ProgramRule& r) {
  return compose(Expr::symbol(r.function), r.params);
}

std::vector<std::string> rule_param_variables(const ProgramRule& r) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& p : r.params) collect_variables(p, out, seen);
  return out;
}

std::vector<std::string> rule_extra_variables(const ProgramRule& r) {
  std::set<std::string> params;
  for (const auto& v : rule_param_variables(r)) params.insert(v);
  std::vector<std::string> out;
  for (const auto& v : variables_of(r.rhs))
    if (!params.count(v)) out.push_back(v);
  return out;
}

bool rules_alpha_equal(const ProgramRule& a, const ProgramRule& b) {
  if (a.function != b.function || a.params.size() != b.params.size())
    return false;
  // Pack params and rhs into one expression so one renaming covers both.
  auto pack = [](const ProgramRule& r) {
    ExprPtr e = Expr::symbol(r.function);
    for (const auto& p : r.params) e = Expr::apply(e, p);
    return Expr::apply(e, r.rhs);
  };
  auto [ca, _oa] = canonicalize_variables(pack(a), "%");
  auto [cb, _ob] = canonicalize_variables(pack(b), "%");
  return equal(ca, cb);
}

std::vector<const ProgramRule*> Program::rules_for(
    const std::string& function) const {
  std::vector<const ProgramRule*> out;
  for (const auto& r : rules)
    if (r.function == function) out.push_back(&r);
  return out;
}

std::vector<Diagnostic> validate_program(const Program& p) {
  std::vector<Diagnostic> out;
  auto report = [&](DiagnosticKind kind, std::size_t index,
                    const std::string& symbol, std::string message) {
    out.push_back({kind, index, symbol, std::move(message)});
  };
  auto check_declared = [&](const ExprPtr& e, std::size_t index) {
    bool ok = true;
    auto rec = [&](auto&& self, const ExprPtr& cur) -> void {
      switch (cur->kind()) {
        case ExprKind::Symbol:
          if (!p.sig.contains(cur->name())) {
            report(DiagnosticKind::UndeclaredSymbol, index, cur->name(),
                   "undeclared symbol '" + cur->name() + "'");
            ok = false;
          }
          return;
        case ExprKind::Apply:
          self(self, cur->fun());
          self(self, cur->arg());
          return;
        default:
          return;
      }
    };
    rec(rec, e);
    return ok;
  };

  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const ProgramRule& r = p.rules[i];
    if (!p.sig.is_function(r.function)) {
      report(DiagnosticKind::UndeclaredSymbol, i, r.function,
             "rule head '" + r.function + "' is not a declared function");
      continue;
    }
    if (static_cast<int>(r.params.size()) != p.sig.arity(r.function)) {
      report(DiagnosticKind::ArityMismatch, i, r.function,
             "rule for '" + r.function + "' has " +
                 std::to_string(r.params.size()) + " parameters, arity is " +
                 std::to_string(p.sig.arity(r.function)));
    }

    bool symbols_ok = check_declared(r.rhs, i);
    for (const auto& param : r.params) symbols_ok &= check_declared(param, i);
    if (!symbols_ok) continue;

    for (const auto& param : r.params) {
      if (!param->total())
        report(DiagnosticKind::BottomInParam, i, "",
               "rule parameter contains the undefined value");
      else if (!is_pattern(param, p.sig))
        report(DiagnosticKind::ParamNotPattern, i, "",
               "rule parameter is not a pattern");
      else if (p.flags.left_fo_required && !is_fo_pattern(param, p.sig))
        report(DiagnosticKind::HoPatternParam, i, "",
               "higher-order pattern parameter in a left-FO program");
    }

    std::set<std::string> seen;
    for (const auto& param : r.params)
      for (const auto& v : variables_of(param))
        if (!seen.insert(v).second)
          report(DiagnosticKind::NonLinearParams, i, v,
                 "variable '" + v + "' occurs twice in the left-hand side");

    if (!p.flags.extra_variables_allowed)
      for (const auto& v : rule_extra_variables(r))
        report(DiagnosticKind::ExtraVariable, i, v,
               "extra variable '" + v + "' in right-hand side");
  }
  return out;
}

}  // namespace hocrwl
