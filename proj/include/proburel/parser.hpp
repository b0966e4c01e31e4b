#ifndef PROBUREL_PARSER_HPP
#define PROBUREL_PARSER_HPP

#include <cctype>
#include <map>
#include <sstream>

#include "proburel/program.hpp"

namespace proburel {

struct SyntaxError : ParseError {
  SyntaxError(const std::string& msg, size_t line, size_t col)
      : ParseError("syntax error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  size_t line, col;
};

struct UnboundedDomain : std::runtime_error {
  explicit UnboundedDomain(const std::string& var)
      : std::runtime_error("unbounded domain for '" + var +
                           "': declare it as nat[0..K] or pass --tmax to bound the time window"),
        var(var) {}
  std::string var;
};

/// Variable declaration as written; `nat` without a bound stays unbounded
/// until a window is supplied.
struct RawDecl {
  enum class Kind { boolean, int_range, enumeration, nat };
  std::string name;
  Kind kind = Kind::boolean;
  long long lo = 0, hi = 0;
  bool bounded = true;  // false only for bare nat
  std::vector<std::string> labels;

  std::optional<long long> label_value(std::string_view s) const {
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == s) return static_cast<long long>(i);
    if (kind == Kind::boolean) {
      if (s == "true") return 1;
      if (s == "false") return 0;
    }
    return std::nullopt;
  }

  Domain domain(std::optional<long long> tmax) const {
    switch (kind) {
      case Kind::boolean:
        return Domain::boolean();
      case Kind::int_range:
        return Domain::int_range(lo, hi);
      case Kind::enumeration:
        return Domain::enumeration(labels);
      case Kind::nat:
        if (bounded) return Domain::int_range(lo, hi);
        if (tmax) return Domain::int_range(0, *tmax);
        throw UnboundedDomain(name);
    }
    throw UnboundedDomain(name);
  }
};

/// A parsed .ppl file: declarations, parameter bindings, statement body.
struct SourceProgram {
  std::vector<RawDecl> decls;
  std::vector<std::pair<std::string, std::optional<Rational>>> params;
  Program ast;

  /// Builds the state space, bounding bare-nat windows with tmax
  /// (tmax also overrides declared nat[0..K] bounds).
  SpacePtr space(std::optional<long long> tmax = std::nullopt) const {
    std::vector<std::pair<std::string, Domain>> ds;
    for (const auto& d : decls) {
      if (d.kind == RawDecl::Kind::nat && tmax)
        ds.emplace_back(d.name, Domain::int_range(0, *tmax));
      else
        ds.emplace_back(d.name, d.domain(tmax));
    }
    return make_space(std::move(ds));
  }

  /// Names of time-window variables (declared via nat).
  std::vector<std::string> nat_vars() const {
    std::vector<std::string> out;
    for (const auto& d : decls)
      if (d.kind == RawDecl::Kind::nat) out.push_back(d.name);
    return out;
  }
};

namespace detail {

// ---------------------------------------------------------------------------
// Lexer

struct Token {
  enum class Kind { ident, number, punct, end };
  Kind kind = Kind::end;
  std::string text;
  size_t line = 1, col = 1;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  size_t line = 1, col = 1, i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      size_t l0 = line, c0 = col;
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
      if (i + 1 >= src.size()) throw SyntaxError("unterminated comment", l0, c0);
      advance(2);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({Token::Kind::ident, std::string(src.substr(i, j - i)), line, col});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Token::Kind::number, std::string(src.substr(i, j - i)), line, col});
      advance(j - i);
      continue;
    }
    static const char* puncts[] = {":=", "..", "<=", ">=", "!=", "&&", "||"};
    bool matched = false;
    for (const char* p : puncts) {
      if (src.substr(i).starts_with(p)) {
        out.push_back({Token::Kind::punct, p, line, col});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string singles = "+-*/%^(){}[],;:=<>!'";
    if (singles.find(c) != std::string::npos) {
      out.push_back({Token::Kind::punct, std::string(1, c), line, col});
      advance(1);
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
  }
  out.push_back({Token::Kind::end, "", line, col});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::vector<Token> tokens, const std::vector<RawDecl>* decls,
         const std::vector<std::pair<std::string, std::optional<Rational>>>* params)
      : toks_(std::move(tokens)), decls_(decls), params_(params) {}

  // --- token plumbing ---
  const Token& peek(size_t ahead = 0) const {
    size_t k = pos_ + ahead;
    return k < toks_.size() ? toks_[k] : toks_.back();
  }
  bool at_punct(std::string_view p) const {
    return peek().kind == Token::Kind::punct && peek().text == p;
  }
  bool at_ident(std::string_view w) const {
    return peek().kind == Token::Kind::ident && peek().text == w;
  }
  bool accept_punct(std::string_view p) {
    if (!at_punct(p)) return false;
    ++pos_;
    return true;
  }
  bool accept_ident(std::string_view w) {
    if (!at_ident(w)) return false;
    ++pos_;
    return true;
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == Token::Kind::end ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(msg + ", got " + got, t.line, t.col);
  }
  bool at_end() const { return peek().kind == Token::Kind::end; }

  std::string expect_name(const char* what) {
    if (peek().kind != Token::Kind::ident) fail(std::string("expected ") + what);
    return toks_[pos_++].text;
  }

  long long expect_integer() {
    bool neg = accept_punct("-");
    if (peek().kind != Token::Kind::number) fail("expected integer");
    long long v = std::stoll(toks_[pos_++].text);
    return neg ? -v : v;
  }

  // --- declarations ---
  RawDecl parse_domain_decl(std::string name) {
    RawDecl d;
    d.name = std::move(name);
    if (accept_ident("bool")) {
      d.kind = RawDecl::Kind::boolean;
      d.lo = 0;
      d.hi = 1;
    } else if (accept_ident("nat")) {
      d.kind = RawDecl::Kind::nat;
      if (accept_punct("[")) {
        d.lo = expect_integer();
        expect_punct("..");
        d.hi = expect_integer();
        expect_punct("]");
        d.bounded = true;
        if (d.lo != 0) fail("nat windows start at 0");
      } else {
        d.bounded = false;
      }
    } else if (accept_punct("{")) {
      d.kind = RawDecl::Kind::enumeration;
      do {
        d.labels.push_back(expect_name("enum label"));
      } while (accept_punct(","));
      expect_punct("}");
      d.lo = 0;
      d.hi = static_cast<long long>(d.labels.size()) - 1;
    } else {
      d.kind = RawDecl::Kind::int_range;
      d.lo = expect_integer();
      expect_punct("..");
      d.hi = expect_integer();
      if (d.lo > d.hi) fail("empty integer range");
    }
    return d;
  }

  // --- identifier resolution ---
  const RawDecl* find_decl(std::string_view name) const {
    for (const auto& d : *decls_)
      if (d.name == name) return &d;
    return nullptr;
  }
  size_t decl_index(std::string_view name) const {
    for (size_t i = 0; i < decls_->size(); ++i)
      if ((*decls_)[i].name == name) return i;
    fail("unknown variable '" + std::string(name) + "'");
  }
  bool is_param(std::string_view name) const {
    for (const auto& [p, _] : *params_)
      if (p == name) return true;
    return false;
  }

  // --- expressions ---
  RelExpr parse_rexpr(const RawDecl* hint = nullptr) { return parse_add(hint); }

  RelExpr parse_add(const RawDecl* hint) {
    RelExpr e = parse_mul(hint);
    for (;;) {
      if (accept_punct("+"))
        e = rexpr::add(e, parse_mul(hint));
      else if (accept_punct("-"))
        e = rexpr::sub(e, parse_mul(hint));
      else
        return e;
    }
  }

  RelExpr parse_mul(const RawDecl* hint) {
    RelExpr e = parse_pow(hint);
    for (;;) {
      if (accept_punct("*"))
        e = rexpr::mul(e, parse_pow(hint));
      else if (accept_punct("/"))
        e = rexpr::div(e, parse_pow(hint));
      else if (accept_punct("%"))
        e = rexpr::mod(e, parse_pow(hint));
      else
        return e;
    }
  }

  RelExpr parse_pow(const RawDecl* hint) {
    RelExpr e = parse_unary(hint);
    if (accept_punct("^")) return rexpr::pow(e, parse_pow(hint));
    return e;
  }

  RelExpr parse_unary(const RawDecl* hint) {
    if (accept_punct("-")) {
      RelExpr e = parse_unary(hint);
      if (const auto* c = std::get_if<ExprConst>(&e.node()->v))
        return rexpr::constant(Rational(-c->value));
      return rexpr::sub(rexpr::constant(0), e);
    }
    return parse_atom(hint);
  }

  RelExpr parse_atom(const RawDecl* hint) {
    if (peek().kind == Token::Kind::number) {
      long long v = std::stoll(toks_[pos_++].text);
      return rexpr::constant(v);
    }
    if (accept_punct("(")) {
      RelExpr e = parse_rexpr(hint);
      expect_punct(")");
      return e;
    }
    if (accept_punct("[")) {
      Pred p = parse_pred();
      expect_punct("]");
      return rexpr::iverson(p);
    }
    if (at_ident("min") || at_ident("max")) {
      bool is_min = peek().text == "min";
      ++pos_;
      expect_punct("(");
      RelExpr a = parse_rexpr(hint);
      expect_punct(",");
      RelExpr b = parse_rexpr(hint);
      expect_punct(")");
      return is_min ? rexpr::min(a, b) : rexpr::max(a, b);
    }
    if (peek().kind == Token::Kind::ident) {
      std::string name = toks_[pos_++].text;
      bool primed = accept_punct("'");
      if (const RawDecl* d = find_decl(name)) {
        (void)d;
        return rexpr::var_by_index(decl_index(name), primed);
      }
      if (primed) fail("'" + name + "' is not a variable");
      if (is_param(name)) return rexpr::param(name);
      if (hint) {
        if (auto v = hint->label_value(name)) return rexpr::constant(*v);
      }
      if (name == "true" || name == "false") fail("boolean literal in arithmetic position");
      fail("unknown identifier '" + name + "'");
    }
    fail("expected expression");
  }

  // the declaration giving label context: a variable reference possibly
  // under unary minus is the only hint source
  const RawDecl* hint_of(const RelExpr& e) const {
    if (const auto* v = std::get_if<ExprVar>(&e.node()->v)) {
      const RawDecl& d = (*decls_)[v->var];
      if (d.kind == RawDecl::Kind::enumeration || d.kind == RawDecl::Kind::boolean) return &d;
    }
    return nullptr;
  }

  // --- predicates ---
  Pred parse_pred() { return parse_or(); }

  Pred parse_or() {
    Pred p = parse_and();
    while (accept_punct("||")) p = pred::disj(p, parse_and());
    return p;
  }

  Pred parse_and() {
    Pred p = parse_not();
    while (accept_punct("&&")) p = pred::conj(p, parse_not());
    return p;
  }

  Pred parse_not() {
    if (accept_punct("!")) return pred::negate(parse_not());
    return parse_pred_atom();
  }

  Pred parse_pred_atom() {
    if (accept_ident("true")) return pred::true_();
    if (accept_ident("false")) return pred::false_();
    // comparison first; fall back to a parenthesised predicate
    size_t snapshot = pos_;
    try {
      RelExpr lhs = parse_rexpr(nullptr);
      return finish_comparison(lhs);
    } catch (const SyntaxError&) {
      pos_ = snapshot;
    }
    if (accept_punct("(")) {
      Pred p = parse_pred();
      expect_punct(")");
      return p;
    }
    fail("expected predicate");
  }

  Pred finish_comparison(const RelExpr& lhs) {
    const RawDecl* hint = hint_of(lhs);
    if (accept_punct("=")) return pred::eq(lhs, parse_rexpr(hint));
    if (accept_punct("!=")) return pred::ne(lhs, parse_rexpr(hint));
    if (accept_punct("<=")) return pred::le(lhs, parse_rexpr(hint));
    if (accept_punct("<")) return pred::lt(lhs, parse_rexpr(hint));
    if (accept_punct(">=")) return pred::ge(lhs, parse_rexpr(hint));
    if (accept_punct(">")) return pred::gt(lhs, parse_rexpr(hint));
    if (accept_ident("in")) {
      std::vector<Rational> elems;
      for (long long v : parse_value_set(hint)) elems.push_back(Rational(v));
      return pred::in_set(lhs, std::move(elems));
    }
    // bare boolean variable
    if (const auto* v = std::get_if<ExprVar>(&lhs.node()->v)) {
      if ((*decls_)[v->var].kind == RawDecl::Kind::boolean)
        return pred::eq(lhs, rexpr::constant(1));
    }
    fail("expected comparison operator");
  }

  std::vector<long long> parse_value_set(const RawDecl* hint) {
    expect_punct("{");
    std::vector<long long> out;
    do {
      if (peek().kind == Token::Kind::ident) {
        std::string label = toks_[pos_++].text;
        std::optional<long long> v = hint ? hint->label_value(label) : std::nullopt;
        if (!v) fail("unknown set element '" + label + "'");
        out.push_back(*v);
      } else {
        long long lo = expect_integer();
        if (accept_punct("..")) {
          long long hi = expect_integer();
          if (lo > hi) fail("empty range in set");
          for (long long v = lo; v <= hi; ++v) out.push_back(v);
        } else {
          out.push_back(lo);
        }
      }
    } while (accept_punct(","));
    expect_punct("}");
    return out;
  }

  // --- statements ---
  Program parse_stmt() {
    Program p = parse_pchoice_stmt();
    while (accept_punct(";")) {
      if (at_end() || at_punct("}")) break;  // trailing semicolon
      p = prog::seq(p, parse_pchoice_stmt());
    }
    return p;
  }

  Program parse_pchoice_stmt() {
    Program left = parse_primary_stmt();
    if (at_ident("pc") && peek(1).kind == Token::Kind::punct && peek(1).text == "{") {
      pos_ += 2;
      RelExpr w = parse_rexpr(nullptr);
      expect_punct("}");
      if (!initial_only(w)) fail("choice weight must only use initial-state variables");
      Program right = parse_pchoice_stmt();
      return prog::pchoice(w, left, right);
    }
    return left;
  }

  Program parse_primary_stmt() {
    if (accept_ident("skip")) return prog::skip();
    if (accept_ident("if")) {
      expect_punct("(");
      Pred g = parse_pred();
      expect_punct(")");
      if (!initial_only(g)) fail("conditional guard must only use initial-state variables");
      expect_punct("{");
      Program t = parse_stmt();
      expect_punct("}");
      if (!accept_ident("else")) fail("expected 'else'");
      expect_punct("{");
      Program e = parse_stmt();
      expect_punct("}");
      return prog::cchoice(g, t, e);
    }
    if (accept_ident("while")) {
      expect_punct("(");
      Pred g = parse_pred();
      expect_punct(")");
      if (!initial_only(g)) fail("loop guard must only use initial-state variables");
      expect_punct("{");
      Program b = parse_stmt();
      expect_punct("}");
      return prog::while_(g, b);
    }
    if (accept_punct("{")) {
      Program p = parse_stmt();
      expect_punct("}");
      while (at_punct("||")) {
        ++pos_;
        expect_punct("(");
        RelExpr like = parse_rexpr(nullptr);
        expect_punct(")");
        p = prog::observe(p, like);
      }
      return p;
    }
    // assignment
    std::string name = expect_name("statement");
    size_t var = decl_index(name);
    expect_punct(":=");
    const RawDecl& d = (*decls_)[var];
    const RawDecl* hint =
        d.kind == RawDecl::Kind::enumeration || d.kind == RawDecl::Kind::boolean ? &d : nullptr;
    if (at_ident("rand") && peek(1).kind == Token::Kind::punct && peek(1).text == "(") {
      pos_ += 2;
      std::vector<long long> values = parse_value_set(&d);
      expect_punct(")");
      return Program(std::make_shared<StmtNode>(StmtNode{StmtUniform{var, std::move(values)}}));
    }
    RelExpr e = parse_rexpr(hint);
    if (!initial_only(e)) fail("assignment to '" + name + "' must only use initial-state variables");
    return Program(std::make_shared<StmtNode>(StmtNode{StmtAssign{var, e}}));
  }

  size_t pos_ = 0;
  std::vector<Token> toks_;
  const std::vector<RawDecl>* decls_;
  const std::vector<std::pair<std::string, std::optional<Rational>>>* params_;
};

}  // namespace detail

/// Parses a .ppl source: declarations block, then the statement body.
inline SourceProgram parse_program(std::string_view text) {
  SourceProgram src;
  auto tokens = detail::lex(text);
  detail::Parser p(std::move(tokens), &src.decls, &src.params);
  for (;;) {
    if (p.accept_ident("var")) {
      std::string name = p.expect_name("variable name");
      for (const auto& d : src.decls)
        if (d.name == name) p.fail("duplicate variable '" + name + "'");
      p.expect_punct(":");
      src.decls.push_back(p.parse_domain_decl(name));
      p.expect_punct(";");
      continue;
    }
    if (p.accept_ident("param")) {
      std::string name = p.expect_name("parameter name");
      std::optional<Rational> def;
      if (p.accept_punct("=")) {
        bool neg = p.accept_punct("-");
        long long num = p.expect_integer();
        long long den = 1;
        if (p.accept_punct("/")) den = p.expect_integer();
        def = make_rational(neg ? -num : num, den);
      }
      src.params.emplace_back(name, def);
      p.expect_punct(";");
      continue;
    }
    break;
  }
  if (src.decls.empty()) p.fail("expected at least one variable declaration");
  src.ast = p.parse_stmt();
  if (!p.at_end()) p.fail("unexpected trailing input");
  return src;
}

/// Parses a standalone relational expression (.expr candidate files)
/// against the declarations and parameters of a source program.
inline RelExpr parse_expression(std::string_view text, const SourceProgram& ctx) {
  auto tokens = detail::lex(text);
  detail::Parser p(std::move(tokens), &ctx.decls, &ctx.params);
  RelExpr e = p.parse_rexpr(nullptr);
  if (!p.at_end()) p.fail("unexpected trailing input");
  return e;
}

// ---------------------------------------------------------------------------
// Parameter binding

namespace detail {

inline ExprPtr bind_expr(const ExprPtr& e, const std::map<std::string, Rational>& env);

inline PredPtr bind_pred(const PredPtr& p, const std::map<std::string, Rational>& env) {
  return std::visit(
      [&](const auto& n) -> PredPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PredConst>) return p;
        else if constexpr (std::is_same_v<T, PredCmp>)
          return std::make_shared<PredNode>(PredNode{PredCmp{n.op, bind_expr(n.lhs, env), bind_expr(n.rhs, env)}});
        else if constexpr (std::is_same_v<T, PredAnd>)
          return std::make_shared<PredNode>(PredNode{PredAnd{bind_pred(n.lhs, env), bind_pred(n.rhs, env)}});
        else if constexpr (std::is_same_v<T, PredOr>)
          return std::make_shared<PredNode>(PredNode{PredOr{bind_pred(n.lhs, env), bind_pred(n.rhs, env)}});
        else if constexpr (std::is_same_v<T, PredNot>)
          return std::make_shared<PredNode>(PredNode{PredNot{bind_pred(n.p, env)}});
        else
          return std::make_shared<PredNode>(PredNode{PredInSet{bind_expr(n.e, env), n.elems}});
      },
      p->v);
}

inline ExprPtr bind_expr(const ExprPtr& e, const std::map<std::string, Rational>& env) {
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprConst> || std::is_same_v<T, ExprVar>) {
          return e;
        } else if constexpr (std::is_same_v<T, ExprParam>) {
          auto it = env.find(n.name);
          if (it == env.end()) throw TypeError("unbound parameter '" + n.name + "'");
          return std::make_shared<ExprNode>(ExprNode{ExprConst{it->second}});
        } else if constexpr (std::is_same_v<T, ExprBin>) {
          return std::make_shared<ExprNode>(ExprNode{ExprBin{n.op, bind_expr(n.lhs, env), bind_expr(n.rhs, env)}});
        } else if constexpr (std::is_same_v<T, ExprMinMax>) {
          return std::make_shared<ExprNode>(
              ExprNode{ExprMinMax{n.is_min, bind_expr(n.lhs, env), bind_expr(n.rhs, env)}});
        } else {
          return std::make_shared<ExprNode>(ExprNode{ExprIverson{bind_pred(n.pred, env)}});
        }
      },
      e->v);
}

inline StmtPtr bind_stmt(const StmtPtr& s, const std::map<std::string, Rational>& env) {
  return std::visit(
      [&](const auto& n) -> StmtPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, StmtSkip> || std::is_same_v<T, StmtUniform>) {
          return s;
        } else if constexpr (std::is_same_v<T, StmtAssign>) {
          return std::make_shared<StmtNode>(StmtNode{StmtAssign{n.var, RelExpr(bind_expr(n.expr.node(), env))}});
        } else if constexpr (std::is_same_v<T, StmtPChoice>) {
          return std::make_shared<StmtNode>(StmtNode{StmtPChoice{
              RelExpr(bind_expr(n.weight.node(), env)), bind_stmt(n.left, env), bind_stmt(n.right, env)}});
        } else if constexpr (std::is_same_v<T, StmtCChoice>) {
          return std::make_shared<StmtNode>(StmtNode{StmtCChoice{Pred(bind_pred(n.guard.node(), env)),
                                                                 bind_stmt(n.then_branch, env),
                                                                 bind_stmt(n.else_branch, env)}});
        } else if constexpr (std::is_same_v<T, StmtSeq>) {
          return std::make_shared<StmtNode>(
              StmtNode{StmtSeq{bind_stmt(n.first, env), bind_stmt(n.second, env)}});
        } else if constexpr (std::is_same_v<T, StmtObserve>) {
          return std::make_shared<StmtNode>(
              StmtNode{StmtObserve{bind_stmt(n.body, env), RelExpr(bind_expr(n.likelihood.node(), env))}});
        } else {
          return std::make_shared<StmtNode>(
              StmtNode{StmtWhile{Pred(bind_pred(n.guard.node(), env)), bind_stmt(n.body, env)}});
        }
      },
      s->v);
}

}  // namespace detail

/// Substitutes rational parameter values into a program.
inline Program bind_params(const Program& p, const std::map<std::string, Rational>& env) {
  return Program(detail::bind_stmt(p.node(), env));
}

inline RelExpr bind_params(const RelExpr& e, const std::map<std::string, Rational>& env) {
  return RelExpr(detail::bind_expr(e.node(), env));
}

/// Effective parameter environment: declared defaults overridden by CLI
/// bindings; every parameter must end up bound.
inline std::map<std::string, Rational> resolve_params(const SourceProgram& src,
                                                      const std::map<std::string, Rational>& overrides) {
  std::map<std::string, Rational> env;
  for (const auto& [name, def] : src.params)
    if (def) env[name] = *def;
  for (const auto& [name, val] : overrides) {
    bool known = false;
    for (const auto& [pname, _] : src.params) known = known || pname == name;
    if (!known) throw ParseError("unknown parameter '" + name + "'");
    env[name] = val;
  }
  for (const auto& [name, _] : src.params)
    if (!env.count(name)) throw ParseError("parameter '" + name + "' has no value; pass --param " + name + "=a/b");
  return env;
}

// ---------------------------------------------------------------------------
// Structural equality (parse/print round trips)

namespace detail {

inline bool expr_eq(const ExprPtr& a, const ExprPtr& b);

inline bool pred_eq(const PredPtr& a, const PredPtr& b) {
  if (a->v.index() != b->v.index()) return false;
  if (const auto* x = std::get_if<PredConst>(&a->v)) return x->value == std::get<PredConst>(b->v).value;
  if (const auto* x = std::get_if<PredCmp>(&a->v)) {
    const auto& y = std::get<PredCmp>(b->v);
    return x->op == y.op && expr_eq(x->lhs, y.lhs) && expr_eq(x->rhs, y.rhs);
  }
  if (const auto* x = std::get_if<PredAnd>(&a->v)) {
    const auto& y = std::get<PredAnd>(b->v);
    return pred_eq(x->lhs, y.lhs) && pred_eq(x->rhs, y.rhs);
  }
  if (const auto* x = std::get_if<PredOr>(&a->v)) {
    const auto& y = std::get<PredOr>(b->v);
    return pred_eq(x->lhs, y.lhs) && pred_eq(x->rhs, y.rhs);
  }
  if (const auto* x = std::get_if<PredNot>(&a->v)) return pred_eq(x->p, std::get<PredNot>(b->v).p);
  const auto& x = std::get<PredInSet>(a->v);
  const auto& y = std::get<PredInSet>(b->v);
  return expr_eq(x.e, y.e) && x.elems == y.elems;
}

inline bool expr_eq(const ExprPtr& a, const ExprPtr& b) {
  if (a->v.index() != b->v.index()) return false;
  if (const auto* x = std::get_if<ExprConst>(&a->v)) return x->value == std::get<ExprConst>(b->v).value;
  if (const auto* x = std::get_if<ExprVar>(&a->v)) {
    const auto& y = std::get<ExprVar>(b->v);
    return x->var == y.var && x->primed == y.primed;
  }
  if (const auto* x = std::get_if<ExprParam>(&a->v)) return x->name == std::get<ExprParam>(b->v).name;
  if (const auto* x = std::get_if<ExprBin>(&a->v)) {
    const auto& y = std::get<ExprBin>(b->v);
    return x->op == y.op && expr_eq(x->lhs, y.lhs) && expr_eq(x->rhs, y.rhs);
  }
  if (const auto* x = std::get_if<ExprMinMax>(&a->v)) {
    const auto& y = std::get<ExprMinMax>(b->v);
    return x->is_min == y.is_min && expr_eq(x->lhs, y.lhs) && expr_eq(x->rhs, y.rhs);
  }
  return pred_eq(std::get<ExprIverson>(a->v).pred, std::get<ExprIverson>(b->v).pred);
}

inline bool stmt_eq(const StmtPtr& a, const StmtPtr& b) {
  if (a->v.index() != b->v.index()) return false;
  if (std::holds_alternative<StmtSkip>(a->v)) return true;
  if (const auto* x = std::get_if<StmtAssign>(&a->v)) {
    const auto& y = std::get<StmtAssign>(b->v);
    return x->var == y.var && expr_eq(x->expr.node(), y.expr.node());
  }
  if (const auto* x = std::get_if<StmtUniform>(&a->v)) {
    const auto& y = std::get<StmtUniform>(b->v);
    return x->var == y.var && x->values == y.values;
  }
  if (const auto* x = std::get_if<StmtPChoice>(&a->v)) {
    const auto& y = std::get<StmtPChoice>(b->v);
    return expr_eq(x->weight.node(), y.weight.node()) && stmt_eq(x->left, y.left) &&
           stmt_eq(x->right, y.right);
  }
  if (const auto* x = std::get_if<StmtCChoice>(&a->v)) {
    const auto& y = std::get<StmtCChoice>(b->v);
    return pred_eq(x->guard.node(), y.guard.node()) && stmt_eq(x->then_branch, y.then_branch) &&
           stmt_eq(x->else_branch, y.else_branch);
  }
  if (const auto* x = std::get_if<StmtSeq>(&a->v)) {
    const auto& y = std::get<StmtSeq>(b->v);
    return stmt_eq(x->first, y.first) && stmt_eq(x->second, y.second);
  }
  if (const auto* x = std::get_if<StmtObserve>(&a->v)) {
    const auto& y = std::get<StmtObserve>(b->v);
    return stmt_eq(x->body, y.body) && expr_eq(x->likelihood.node(), y.likelihood.node());
  }
  const auto& x = std::get<StmtWhile>(a->v);
  const auto& y = std::get<StmtWhile>(b->v);
  return pred_eq(x.guard.node(), y.guard.node()) && stmt_eq(x.body, y.body);
}

}  // namespace detail

inline bool structurally_equal(const RelExpr& a, const RelExpr& b) {
  return detail::expr_eq(a.node(), b.node());
}
inline bool structurally_equal(const Pred& a, const Pred& b) {
  return detail::pred_eq(a.node(), b.node());
}
inline bool structurally_equal(const Program& a, const Program& b) {
  return detail::stmt_eq(a.node(), b.node());
}

// ---------------------------------------------------------------------------
// Pretty printing

namespace detail {

class Printer {
 public:
  explicit Printer(const std::vector<RawDecl>& decls) : decls_(decls) {}

  std::string value_name(const RawDecl& d, const Rational& v) const {
    if (is_integer(v)) {
      long long n = static_cast<long long>(numerator(v));
      if (d.kind == RawDecl::Kind::enumeration && n >= 0 &&
          n < static_cast<long long>(d.labels.size()))
        return d.labels[static_cast<size_t>(n)];
      if (d.kind == RawDecl::Kind::boolean && (n == 0 || n == 1)) return n ? "true" : "false";
    }
    return format_rational(v);
  }

  const RawDecl* hint_of(const ExprPtr& e) const {
    if (const auto* v = std::get_if<ExprVar>(&e->v)) {
      const RawDecl& d = decls_[v->var];
      if (d.kind == RawDecl::Kind::enumeration || d.kind == RawDecl::Kind::boolean) return &d;
    }
    return nullptr;
  }

  // precedence: 1 add, 2 mul, 3 pow, 4 atom
  std::string expr(const ExprPtr& e, int parent_prec, const RawDecl* hint) const {
    return std::visit(
        [&](const auto& n) -> std::string {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ExprConst>) {
            std::string s = hint ? value_name(*hint, n.value) : format_rational(n.value);
            bool needs_paren = (n.value < 0 || !is_integer(n.value)) && parent_prec > 1;
            return needs_paren ? "(" + s + ")" : s;
          } else if constexpr (std::is_same_v<T, ExprVar>) {
            return decls_[n.var].name + (n.primed ? "'" : "");
          } else if constexpr (std::is_same_v<T, ExprParam>) {
            return n.name;
          } else if constexpr (std::is_same_v<T, ExprBin>) {
            int prec;
            const char* op;
            switch (n.op) {
              case BinOp::add: prec = 1; op = " + "; break;
              case BinOp::sub: prec = 1; op = " - "; break;
              case BinOp::mul: prec = 2; op = "*"; break;
              case BinOp::div: prec = 2; op = "/"; break;
              case BinOp::mod: prec = 2; op = "%"; break;
              default: prec = 3; op = "^"; break;
            }
            std::string s = expr(n.lhs, prec, hint) + op + expr(n.rhs, prec + 1, hint);
            return prec < parent_prec ? "(" + s + ")" : s;
          } else if constexpr (std::is_same_v<T, ExprMinMax>) {
            return std::string(n.is_min ? "min" : "max") + "(" + expr(n.lhs, 0, hint) + ", " +
                   expr(n.rhs, 0, hint) + ")";
          } else {
            return "[" + pred(n.pred, 0) + "]";
          }
        },
        e->v);
  }

  // precedence: 1 or, 2 and, 3 not/atom
  std::string pred(const PredPtr& p, int parent_prec) const {
    return std::visit(
        [&](const auto& n) -> std::string {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, PredConst>) {
            return n.value ? "true" : "false";
          } else if constexpr (std::is_same_v<T, PredCmp>) {
            const RawDecl* hint = hint_of(n.lhs);
            const char* op;
            switch (n.op) {
              case CmpOp::eq: op = " = "; break;
              case CmpOp::ne: op = " != "; break;
              case CmpOp::lt: op = " < "; break;
              case CmpOp::le: op = " <= "; break;
              case CmpOp::gt: op = " > "; break;
              default: op = " >= "; break;
            }
            return expr(n.lhs, 0, nullptr) + op + expr(n.rhs, 0, hint);
          } else if constexpr (std::is_same_v<T, PredAnd>) {
            std::string s = pred(n.lhs, 2) + " && " + pred(n.rhs, 2);
            return 2 < parent_prec ? "(" + s + ")" : s;
          } else if constexpr (std::is_same_v<T, PredOr>) {
            std::string s = pred(n.lhs, 1) + " || " + pred(n.rhs, 1);
            return 1 < parent_prec ? "(" + s + ")" : s;
          } else if constexpr (std::is_same_v<T, PredNot>) {
            return "!(" + pred(n.p, 0) + ")";
          } else {
            const RawDecl* hint = hint_of(n.e);
            std::string s = expr(n.e, 0, nullptr) + " in {";
            for (size_t i = 0; i < n.elems.size(); ++i) {
              if (i) s += ", ";
              s += hint ? value_name(*hint, n.elems[i]) : format_rational(n.elems[i]);
            }
            return s + "}";
          }
        },
        p->v);
  }

  std::string stmt(const StmtPtr& s) const {
    return std::visit(
        [&](const auto& n) -> std::string {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, StmtSkip>) {
            return "skip";
          } else if constexpr (std::is_same_v<T, StmtAssign>) {
            const RawDecl& d = decls_[n.var];
            const RawDecl* hint =
                d.kind == RawDecl::Kind::enumeration || d.kind == RawDecl::Kind::boolean ? &d : nullptr;
            return d.name + " := " + expr(n.expr.node(), 0, hint);
          } else if constexpr (std::is_same_v<T, StmtUniform>) {
            const RawDecl& d = decls_[n.var];
            std::string s = d.name + " := rand({";
            for (size_t i = 0; i < n.values.size(); ++i) {
              if (i) s += ", ";
              s += value_name(d, Rational(n.values[i]));
            }
            return s + "})";
          } else if constexpr (std::is_same_v<T, StmtPChoice>) {
            return braced(n.left) + " pc{" + expr(n.weight.node(), 0, nullptr) + "} " + braced(n.right);
          } else if constexpr (std::is_same_v<T, StmtCChoice>) {
            return "if (" + pred(n.guard.node(), 0) + ") { " + stmt(n.then_branch) + " } else { " +
                   stmt(n.else_branch) + " }";
          } else if constexpr (std::is_same_v<T, StmtSeq>) {
            return stmt(n.first) + ";\n" + stmt(n.second);
          } else if constexpr (std::is_same_v<T, StmtObserve>) {
            return "{\n" + stmt(n.body) + "\n} || (" + expr(n.likelihood.node(), 0, nullptr) + ")";
          } else {
            return "while (" + pred(n.guard.node(), 0) + ") {\n" + stmt(n.body) + "\n}";
          }
        },
        s->v);
  }

  // pchoice operands reparse identically only when grouped
  std::string braced(const StmtPtr& s) const {
    bool atomic = std::holds_alternative<StmtSkip>(s->v) || std::holds_alternative<StmtAssign>(s->v) ||
                  std::holds_alternative<StmtUniform>(s->v);
    return atomic ? stmt(s) : "{ " + stmt(s) + " }";
  }

 private:
  const std::vector<RawDecl>& decls_;
};

}  // namespace detail

/// Renders a program back to concrete syntax; reparsing yields an
/// identical tree.
inline std::string pretty(const SourceProgram& src) {
  std::ostringstream out;
  for (const auto& d : src.decls) {
    out << "var " << d.name << " : ";
    switch (d.kind) {
      case RawDecl::Kind::boolean:
        out << "bool";
        break;
      case RawDecl::Kind::int_range:
        out << d.lo << ".." << d.hi;
        break;
      case RawDecl::Kind::nat:
        out << "nat";
        if (d.bounded) out << "[" << d.lo << ".." << d.hi << "]";
        break;
      case RawDecl::Kind::enumeration: {
        out << "{";
        for (size_t i = 0; i < d.labels.size(); ++i) out << (i ? ", " : "") << d.labels[i];
        out << "}";
        break;
      }
    }
    out << ";\n";
  }
  for (const auto& [name, def] : src.params) {
    out << "param " << name;
    if (def) out << " = " << format_rational(*def);
    out << ";\n";
  }
  out << detail::Printer(src.decls).stmt(src.ast.node()) << "\n";
  return out.str();
}

}  // namespace proburel

#endif
