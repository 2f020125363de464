#include "hocrwl/transforms.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "hocrwl/parser.hpp"

namespace hocrwl {

std::set<std::string> defs(std::span<const ProgramRule> rules) {
  std::set<std::string> out;
  for (const auto& r : rules) out.insert(r.function);
  return out;
}

namespace {

void collect_fs(const ExprPtr& e, const Signature& sig,
                std::set<std::string>& out) {
  switch (e->kind()) {
    case ExprKind::Symbol:
      if (sig.is_function(e->name())) out.insert(e->name());
      return;
    case ExprKind::Apply:
      collect_fs(e->fun(), sig, out);
      collect_fs(e->arg(), sig, out);
      return;
    default:
      return;
  }
}

}  // namespace

std::set<std::string> fs(const ExprPtr& e, const Signature& sig) {
  std::set<std::string> out;
  collect_fs(e, sig, out);
  return out;
}

std::set<std::string> fs_program(const Program& p) {
  std::set<std::string> out;
  for (const auto& r : p.rules) {
    out.insert(r.function);
    for (const auto& param : r.params) collect_fs(param, p.sig, out);
    collect_fs(r.rhs, p.sig, out);
  }
  return out;
}

std::variant<SafeExtension, Diagnostic> safe_extend(
    const Program& base, std::vector<ProgramRule> extension,
    const SignatureDelta& delta, std::span<const ExprPtr> protected_exprs) {
  SafeExtension se;
  se.base = base;
  se.delta = delta;
  se.merged = base;
  // Distinguisher rules may carry higher-order parameters; the merged
  // program is not required to stay left-FO.
  se.merged.flags.left_fo_required = false;

  for (const auto& [name, arity] : delta.constructors) {
    if (base.sig.contains(name))
      return Diagnostic{DiagnosticKind::UnsafeExtension, 0, name,
                        "extension symbol '" + name + "' already declared"};
    se.merged.sig.add_constructor(name, arity);
  }
  for (const auto& [name, arity] : delta.functions) {
    if (base.sig.contains(name))
      return Diagnostic{DiagnosticKind::UnsafeExtension, 0, name,
                        "extension symbol '" + name + "' already declared"};
    se.merged.sig.add_function(name, arity);
  }

  std::set<std::string> blocked = fs_program(base);
  for (const auto& e : protected_exprs) {
    auto used = fs(e, se.merged.sig);
    blocked.insert(used.begin(), used.end());
  }
  for (const auto& name : defs(extension))
    if (blocked.count(name))
      return Diagnostic{
          DiagnosticKind::UnsafeExtension, 0, name,
          "extension defines '" + name +
              "', which occurs in the base program or a protected expression"};

  for (auto& r : extension) se.merged.rules.push_back(r);
  se.extension = std::move(extension);

  auto diags = validate_program(se.merged);
  if (!diags.empty()) return diags.front();
  return se;
}

SafeExtInvariance safe_extension_invariance_check(const SafeExtension& se,
                                                  const ExprPtr& e,
                                                  const SearchBudget& budget) {
  DenotationSet base = denote(se.base, e, budget);
  DenotationSet merged = denote(se.merged, e, budget);
  SafeExtInvariance out;
  out.both_complete = base.complete_at_bound() && merged.complete_at_bound();
  for (const auto& t : merged.elements())
    if (!base.contains(t)) out.gained.push_back(t);
  for (const auto& t : base.elements())
    if (!merged.contains(t)) out.lost.push_back(t);
  out.gained = sorted_patterns(std::move(out.gained));
  out.lost = sorted_patterns(std::move(out.lost));
  out.equal = out.gained.empty() && out.lost.empty();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string mangle(const std::string& printed) {
  std::string s = printed;
  // render the undefined value as 'bot' inside generated names
  for (std::size_t pos; (pos = s.find("_|_")) != std::string::npos;)
    s.replace(pos, 3, "bot");
  std::string out;
  for (char c : s) {
    if (c == '(' || c == ')') continue;
    if (c == ' ') {
      out += '_';
      continue;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' ||
        c == '#')
      out += c;
    else
      out += '_';
  }
  return out;
}

// Deterministic fresh-name pool: '#'-prefixed candidates, padded with
// underscores until they escape the avoid set.
class FreshNames {
public:
  explicit FreshNames(std::set<std::string> avoid) : used_(std::move(avoid)) {}

  std::string reserve(std::string candidate) {
    while (used_.count(candidate)) candidate += "_";
    used_.insert(candidate);
    return candidate;
  }

private:
  std::set<std::string> used_;
};

class DistinguisherBuilder {
public:
  DistinguisherBuilder(HatVariant variant, const std::set<std::string>& avoid)
      : variant_(variant), names_(avoid) {}

  ExprPtr hat_of(const ExprPtr& t) {
    if (auto it = hat_memo_.find(t); it != hat_memo_.end()) return it->second;
    ExprPtr out;
    switch (t->kind()) {
      case ExprKind::Variable:
        out = t;
        break;
      case ExprKind::Bottom:
        out = Expr::symbol(bot_name());
        break;
      default: {
        Spine s = decompose(t);
        std::vector<ExprPtr> args;
        args.reserve(s.args.size());
        for (const auto& a : s.args) args.push_back(hat_of(a));
        ExprPtr head =
            variant_ == HatVariant::HO
                ? s.head
                : Expr::symbol(fo_constructor(s.head->name(),
                                              static_cast<int>(s.args.size())));
        out = compose(std::move(head), args);
        break;
      }
    }
    hat_memo_.emplace(t, out);
    return out;
  }

  // Registers the rules for t and every distinct subpattern, returning t's
  // rule symbol.
  std::string g_of(const ExprPtr& t) {
    if (auto it = g_memo_.find(t); it != g_memo_.end()) return it->second;
    std::string name;
    switch (t->kind()) {
      case ExprKind::Variable: {
        name = fresh_function("#g_" + mangle(t->name()));
        rules_.push_back({name, {Expr::variable("U")}, Expr::variable("U")});
        break;
      }
      case ExprKind::Bottom: {
        name = fresh_function("#g_bot");
        rules_.push_back(
            {name, {Expr::variable("X")}, Expr::symbol(bot_name())});
        break;
      }
      default: {
        Spine s = decompose(t);
        std::vector<std::string> child(s.args.size());
        for (std::size_t i = 0; i < s.args.size(); ++i)
          child[i] = g_of(s.args[i]);
        name = fresh_function("#g_" + mangle(print_expr(t)));

        std::vector<ExprPtr> lhs_vars, rhs_args;
        for (std::size_t i = 0; i < s.args.size(); ++i) {
          ExprPtr x = Expr::variable("X" + std::to_string(i + 1));
          lhs_vars.push_back(x);
          rhs_args.push_back(Expr::apply(Expr::symbol(child[i]), x));
        }
        ExprPtr rhs_head =
            variant_ == HatVariant::HO
                ? s.head
                : Expr::symbol(fo_constructor(s.head->name(),
                                              static_cast<int>(s.args.size())));
        rules_.push_back({name,
                          {compose(s.head, lhs_vars)},
                          compose(std::move(rhs_head), rhs_args)});
        break;
      }
    }
    g_memo_.emplace(t, name);
    return name;
  }

  Distinguisher finish(const ExprPtr& t, std::string root) {
    Distinguisher d;
    d.target = t;
    d.hat_target = hat_memo_.at(t);
    d.root_symbol = std::move(root);
    d.rules = std::move(rules_);
    d.delta = std::move(delta_);
    d.fresh_symbols = std::move(fresh_);
    d.variant = variant_;
    return d;
  }

private:
  std::string bot_name() {
    if (bot_.empty()) {
      bot_ = names_.reserve("#bot");
      delta_.constructors.emplace_back(bot_, 0);
      fresh_.insert(bot_);
    }
    return bot_;
  }

  std::string fo_constructor(const std::string& head, int m) {
    auto key = std::make_pair(head, m);
    if (auto it = fo_ctor_.find(key); it != fo_ctor_.end()) return it->second;
    std::string name =
        names_.reserve("#" + mangle(head) + "_" + std::to_string(m));
    delta_.constructors.emplace_back(name, m);
    fresh_.insert(name);
    fo_ctor_.emplace(key, name);
    return name;
  }

  std::string fresh_function(const std::string& candidate) {
    std::string name = names_.reserve(candidate);
    delta_.functions.emplace_back(name, 1);
    fresh_.insert(name);
    return name;
  }

  HatVariant variant_;
  FreshNames names_;
  std::vector<ProgramRule> rules_;
  SignatureDelta delta_;
  std::set<std::string> fresh_;
  ExprMap<ExprPtr> hat_memo_;
  ExprMap<std::string> g_memo_;
  std::map<std::pair<std::string, int>, std::string> fo_ctor_;
  std::string bot_;
};

std::set<std::string> signature_names(const Signature& sig) {
  std::set<std::string> out;
  for (const auto& [name, arity] : sig.constructors()) {
    (void)arity;
    out.insert(name);
  }
  for (const auto& [name, arity] : sig.functions()) {
    (void)arity;
    out.insert(name);
  }
  return out;
}

}  // namespace

ExprPtr hat(const ExprPtr& t, HatVariant variant,
            const std::set<std::string>& avoid) {
  DistinguisherBuilder b(variant, avoid);
  return b.hat_of(t);
}

Distinguisher gen_distinguisher(const ExprPtr& t, HatVariant variant,
                                const std::set<std::string>& avoid) {
  DistinguisherBuilder b(variant, avoid);
  b.hat_of(t);  // reserve marker names first so hat() agrees
  std::string root = b.g_of(t);
  return b.finish(t, std::move(root));
}

std::optional<DistinguishReport> distinguish(const Program& p, const ExprPtr& e,
                                             const ExprPtr& e2,
                                             const SearchBudget& budget,
                                             HatVariant variant) {
  DenotationSet d1 = denote(p, e, budget);
  DenotationSet d2 = denote(p, e2, budget);

  ExprPtr witness;
  bool in_first = false;
  for (const auto& t : d1.elements())
    if (!d2.contains(t)) {
      witness = t;
      in_first = true;
      break;
    }
  if (!witness)
    for (const auto& t : d2.elements())
      if (!d1.contains(t)) {
        witness = t;
        break;
      }
  if (!witness) return std::nullopt;

  Distinguisher dist =
      gen_distinguisher(witness, variant, signature_names(p.sig));
  std::vector<ExprPtr> protected_exprs{e, e2};
  auto extended = safe_extend(p, dist.rules, dist.delta, protected_exprs);
  if (std::holds_alternative<Diagnostic>(extended))
    throw Error("distinguisher extension rejected: " +
                std::get<Diagnostic>(extended).message);

  DistinguishReport report;
  report.witness = witness;
  report.witness_in_first = in_first;
  report.extension = std::get<SafeExtension>(std::move(extended));
  report.context = dist.root_symbol + " [ ]";
  // Enough extra unfolding depth for the structural marker rules.
  report.verify_budget =
      budget.with_or_depth(budget.max_or_depth + witness->size() + 1);

  ExprPtr root = Expr::symbol(dist.root_symbol);
  DenotationSet o1 = denote(report.extension.merged, Expr::apply(root, e),
                            report.verify_budget);
  DenotationSet o2 = denote(report.extension.merged, Expr::apply(root, e2),
                            report.verify_budget);
  report.hat_in_first_obs = o1.contains(dist.hat_target);
  report.hat_in_second_obs = o2.contains(dist.hat_target);
  report.distinguisher = std::move(dist);
  return report;
}

nlohmann::json distinguish_report_to_json(const DistinguishReport& r) {
  nlohmann::json j;
  j["witness"] = print_expr(r.witness);
  j["witness_in_first"] = r.witness_in_first;
  j["variant"] = r.distinguisher.variant == HatVariant::FO ? "FO" : "HO";
  j["context"] = r.context;
  j["hat_witness"] = print_expr(r.distinguisher.hat_target);
  j["hat_in_first_obs"] = r.hat_in_first_obs;
  j["hat_in_second_obs"] = r.hat_in_second_obs;
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& rule : r.distinguisher.rules)
    rules.push_back(print_rule(rule));
  j["extension_rules"] = rules;
  j["verify_or_depth"] = r.verify_budget.max_or_depth;
  return j;
}

}  // namespace hocrwl
