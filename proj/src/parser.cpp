#include "hocrwl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <sstream>

namespace hocrwl {

namespace {

enum class TokType { Ident, LParen, RParen, Plus, Bottom, Arrow, End };

struct Token {
  TokType type;
  std::string text;
  int line;
  int col;
};

bool ident_start(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '#';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' ||
         c == '#';
}

std::vector<Token> lex(std::string_view src, int first_line) {
  std::vector<Token> out;
  int line = first_line, col = 1;
  std::size_t i = 0;
  auto push = [&](TokType t, std::string text) {
    out.push_back({t, std::move(text), line, col});
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (c == '(') {
      push(TokType::LParen, "(");
      ++i;
      ++col;
      continue;
    }
    if (c == ')') {
      push(TokType::RParen, ")");
      ++i;
      ++col;
      continue;
    }
    if (c == '+') {
      push(TokType::Plus, "+");
      ++i;
      ++col;
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      push(TokType::Arrow, "->");
      i += 2;
      col += 2;
      continue;
    }
    if (c == '_' && src.substr(i, 3) == "_|_") {
      push(TokType::Bottom, "_|_");
      i += 3;
      col += 3;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      push(TokType::Ident, std::string(src.substr(i, j - i)));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line,
                     col);
  }
  out.push_back({TokType::End, "", line, col});
  return out;
}

bool is_variable_name(const std::string& name) {
  return !name.empty() && std::isupper(static_cast<unsigned char>(name[0]));
}

// Recursive-descent parser over a token stream. Identifier classification
// (variable vs symbol) is purely lexical; symbol validation against a
// signature happens afterwards, so the same parser serves both the inference
// pre-pass and fixed-signature expression parsing.
class ExprParser {
 public:
  ExprParser(const std::vector<Token>& toks, bool allow_bottom)
      : toks_(toks), allow_bottom_(allow_bottom) {}

  ExprPtr parse_full() {
    ExprPtr e = parse_sum();
    expect(TokType::End, "end of input");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }

  void expect(TokType t, const std::string& what) {
    if (peek().type != t) fail("expected " + what);
    ++pos_;
  }

  ExprPtr parse_sum() {
    ExprPtr e = parse_application();
    while (peek().type == TokType::Plus) {
      next();
      ExprPtr rhs = parse_application();
      e = Expr::apply(Expr::apply(Expr::symbol("plus"), std::move(e)),
                      std::move(rhs));
    }
    return e;
  }

  ExprPtr parse_application() {
    ExprPtr e = parse_atom_required();
    while (true) {
      std::optional<ExprPtr> a = parse_atom();
      if (!a) return e;
      e = Expr::apply(std::move(e), std::move(*a));
    }
  }

  ExprPtr parse_atom_required() {
    std::optional<ExprPtr> a = parse_atom();
    if (!a) fail("expected an expression");
    return *a;
  }

  std::optional<ExprPtr> parse_atom() {
    switch (peek().type) {
      case TokType::Ident: {
        const Token& t = next();
        if (is_variable_name(t.text)) return Expr::variable(t.text);
        return Expr::symbol(t.text);
      }
      case TokType::Bottom: {
        const Token& t = next();
        if (!allow_bottom_)
          throw ParseError("`_|_` is not allowed here", t.line, t.col);
        return Expr::bottom();
      }
      case TokType::LParen: {
        next();
        ExprPtr e = parse_sum();
        expect(TokType::RParen, "')'");
        return e;
      }
      default:
        return std::nullopt;
    }
  }

  const std::vector<Token>& toks_;
  bool allow_bottom_;
  std::size_t pos_ = 0;
};

ExprPtr parse_unchecked(std::string_view src, int line, bool allow_bottom) {
  auto toks = lex(src, line);
  return ExprParser(toks, allow_bottom).parse_full();
}

// Longest application observed for each symbol, used to infer constructor
// arities.
void observe_applications(const ExprPtr& e, std::map<std::string, int>& seen) {
  Spine s = decompose(e);
  if (s.head->kind() == ExprKind::Symbol) {
    int m = static_cast<int>(s.args.size());
    auto [it, inserted] = seen.emplace(s.head->name(), m);
    if (!inserted) it->second = std::max(it->second, m);
  }
  for (const auto& a : s.args) observe_applications(a, seen);
}

void check_symbols(const ExprPtr& e, const Signature& sig, int line) {
  Spine s = decompose(e);
  if (s.head->kind() == ExprKind::Symbol) {
    auto ar = sig.find_arity(s.head->name());
    if (!ar)
      throw ParseError("undeclared identifier '" + s.head->name() + "'", line,
                       1);
    if (sig.is_constructor(s.head->name()) &&
        static_cast<int>(s.args.size()) > *ar)
      throw ParseError("constructor '" + s.head->name() + "' applied to " +
                           std::to_string(s.args.size()) +
                           " arguments, arity is " + std::to_string(*ar),
                       line, 1);
  }
  for (const auto& a : s.args) check_symbols(a, sig, line);
}

struct RawRule {
  ExprPtr lhs;
  ExprPtr rhs;
  int line;
};

}  // namespace

Program parse_program(std::string_view src, ProgramFlags flags) {
  Program prog;
  prog.flags = flags;

  std::vector<RawRule> raw;
  std::vector<std::pair<std::string, std::string>> decls;  // kind, name/arity
  std::vector<int> decl_lines;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= src.size()) {
    std::size_t eol = src.find('\n', pos);
    std::string_view line = src.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos
                                           : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? src.size() + 1 : eol + 1;

    if (auto c = line.find("--"); c != std::string_view::npos)
      line = line.substr(0, c);
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) continue;
    std::size_t b = line.find_last_not_of(" \t\r");
    line = line.substr(a, b - a + 1);

    // Header declarations.
    if (line.starts_with("constructor ") || line.starts_with("function ")) {
      bool ctor = line.starts_with("constructor ");
      std::string_view rest = line.substr(ctor ? 12 : 9);
      std::size_t slash = rest.find('/');
      if (slash == std::string_view::npos)
        throw ParseError("expected NAME/ARITY in declaration", line_no, 1);
      std::string name(rest.substr(0, slash));
      name.erase(std::remove_if(name.begin(), name.end(),
                                [](char c) { return std::isspace(
                                      static_cast<unsigned char>(c)); }),
                 name.end());
      int arity;
      try {
        arity = std::stoi(std::string(rest.substr(slash + 1)));
      } catch (const std::exception&) {
        throw ParseError("bad arity in declaration", line_no, 1);
      }
      decls.emplace_back(ctor ? "constructor" : "function",
                         name + "/" + std::to_string(arity));
      decl_lines.push_back(line_no);
      continue;
    }

    // Rule line: split at the single top-level arrow.
    int depth = 0;
    std::vector<std::size_t> arrows;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      if (line[i] == '(') ++depth;
      else if (line[i] == ')') --depth;
      else if (depth == 0 && line[i] == '-' && line[i + 1] == '>')
        arrows.push_back(i);
    }
    if (arrows.size() != 1)
      throw ParseError("rule line must contain exactly one top-level `->`",
                       line_no, 1);
    RawRule r;
    r.line = line_no;
    r.lhs = parse_unchecked(line.substr(0, arrows[0]), line_no, false);
    r.rhs = parse_unchecked(line.substr(arrows[0] + 2), line_no, false);
    raw.push_back(std::move(r));
  }

  // Explicit declarations first; they override inference.
  for (std::size_t i = 0; i < decls.size(); ++i) {
    const auto& [kind, spec] = decls[i];
    std::size_t slash = spec.rfind('/');
    std::string name = spec.substr(0, slash);
    int arity = std::stoi(spec.substr(slash + 1));
    try {
      if (kind == "constructor")
        prog.sig.add_constructor(name, arity);
      else
        prog.sig.add_function(name, arity);
    } catch (const Error& e) {
      throw ParseError(e.what(), decl_lines[i], 1);
    }
  }

  // Function inference from rule heads.
  for (const auto& r : raw) {
    Spine lhs = decompose(r.lhs);
    if (lhs.head->kind() != ExprKind::Symbol)
      throw ParseError("rule head must be a function symbol", r.line, 1);
    const std::string& fname = lhs.head->name();
    int arity = static_cast<int>(lhs.args.size());
    if (prog.sig.is_constructor(fname))
      throw ParseError("rule head '" + fname + "' declared as a constructor",
                       r.line, 1);
    if (auto declared = prog.sig.find_arity(fname)) {
      if (*declared != arity)
        throw ParseError("rule for '" + fname + "' has " +
                             std::to_string(arity) + " parameters, arity is " +
                             std::to_string(*declared),
                         r.line, 1);
    } else {
      prog.sig.add_function(fname, arity);
    }
  }

  // Everything else becomes a constructor with the longest observed
  // application as its arity.
  std::map<std::string, int> observed;
  for (const auto& r : raw) {
    observe_applications(r.lhs, observed);
    observe_applications(r.rhs, observed);
  }
  for (const auto& [name, arity] : observed)
    if (!prog.sig.contains(name)) prog.sig.add_constructor(name, arity);

  for (auto& r : raw) {
    check_symbols(r.lhs, prog.sig, r.line);
    check_symbols(r.rhs, prog.sig, r.line);
    Spine lhs = decompose(r.lhs);
    prog.rules.push_back(
        {lhs.head->name(), std::move(lhs.args), std::move(r.rhs)});
  }

  auto diags = validate_program(prog);
  if (!diags.empty()) throw Error(format_diagnostics(diags));
  return prog;
}

ExprPtr parse_expr(std::string_view src, const Signature& sig,
                   ParseOptions opts) {
  ExprPtr e = parse_unchecked(src, 1, opts.allow_bottom);
  check_symbols(e, sig, 1);
  return e;
}

namespace {

void print_rec(const ExprPtr& e, std::string& out, bool parens) {
  switch (e->kind()) {
    case ExprKind::Variable:
    case ExprKind::Symbol:
      out += e->name();
      return;
    case ExprKind::Bottom:
      out += "_|_";
      return;
    case ExprKind::Apply: {
      if (parens) out += '(';
      Spine s = decompose(e);
      print_rec(s.head, out, false);
      for (const auto& a : s.args) {
        out += ' ';
        print_rec(a, out, a->kind() == ExprKind::Apply);
      }
      if (parens) out += ')';
      return;
    }
  }
}

}  // namespace

std::string print_expr(const ExprPtr& e) {
  std::string out;
  print_rec(e, out, false);
  return out;
}

std::string print_rule(const ProgramRule& r) {
  std::string out = r.function;
  for (const auto& p : r.params) {
    out += ' ';
    print_rec(p, out, p->kind() == ExprKind::Apply);
  }
  out += " -> ";
  print_rec(r.rhs, out, false);
  return out;
}

std::string print_program(const Program& p) {
  std::string out;
  for (const auto& [name, arity] : p.sig.constructors())
    out += "constructor " + name + "/" + std::to_string(arity) + "\n";
  for (const auto& [name, arity] : p.sig.functions())
    out += "function " + name + "/" + std::to_string(arity) + "\n";
  for (const auto& r : p.rules) out += print_rule(r) + "\n";
  return out;
}

std::string print_context(const ContextPtr& c) {
  // Render through a marker variable so spine flattening matches print_expr.
  // `%` can never be lexed, so the marker cannot collide with parsed names.
  static const std::string marker = "%HOLE%";
  ExprPtr e = apply_context(c, Expr::variable(marker));
  std::string s = print_expr(e);
  std::string out;
  std::size_t i = 0;
  while (true) {
    std::size_t j = s.find(marker, i);
    if (j == std::string::npos) {
      out += s.substr(i);
      return out;
    }
    out += s.substr(i, j - i);
    out += "[ ]";
    i = j + marker.size();
  }
}

std::string print_substitution(const PSubstitution& theta) {
  std::string out = "{";
  bool first = true;
  for (const auto& [var, value] : theta.mapping()) {
    if (!first) out += ", ";
    first = false;
    out += var + " / " + print_expr(value);
  }
  out += "}";
  return out;
}

const std::string& prelude_source() {
  static const std::string text =
      "-- standard prelude: Peano addition over 0/s\n"
      "plus 0 Y -> Y\n"
      "plus (s X) Y -> s (plus X Y)\n";
  return text;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::ostringstream out;
  out << "program validation failed:";
  for (const auto& d : diags)
    out << "\n  rule " << d.rule_index + 1 << ": " << d.message;
  return out.str();
}

}  // namespace hocrwl
