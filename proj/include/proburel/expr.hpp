#ifndef PROBUREL_EXPR_HPP
#define PROBUREL_EXPR_HPP

#include <memory>
#include <variant>
#include <vector>

#include "proburel/state.hpp"

namespace proburel {

struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised by the few expression forms that are not total (natural powers
/// with a negative exponent reached outside a zero guard).
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Pred;
class RelExpr;

namespace detail {

enum class BinOp { add, sub, mul, div, mod, pow };
enum class CmpOp { eq, ne, lt, le, gt, ge };

struct ExprNode;
struct PredNode;
using ExprPtr = std::shared_ptr<const ExprNode>;
using PredPtr = std::shared_ptr<const PredNode>;

struct ExprConst {
  Rational value;
};
struct ExprVar {
  size_t var;
  bool primed;
};
struct ExprParam {
  std::string name;  // unresolved parameter; rejected at eval
};
struct ExprBin {
  BinOp op;
  ExprPtr lhs, rhs;
};
struct ExprMinMax {
  bool is_min;
  ExprPtr lhs, rhs;
};
struct ExprIverson {
  PredPtr pred;
};

struct ExprNode {
  std::variant<ExprConst, ExprVar, ExprParam, ExprBin, ExprMinMax, ExprIverson> v;
};

struct PredConst {
  bool value;
};
struct PredCmp {
  CmpOp op;
  ExprPtr lhs, rhs;
};
struct PredAnd {
  PredPtr lhs, rhs;
};
struct PredOr {
  PredPtr lhs, rhs;
};
struct PredNot {
  PredPtr p;
};
struct PredInSet {
  ExprPtr e;
  std::vector<Rational> elems;
};

struct PredNode {
  std::variant<PredConst, PredCmp, PredAnd, PredOr, PredNot, PredInSet> v;
};

}  // namespace detail

/// Boolean relation over an (initial, final) state pair.
class Pred {
 public:
  Pred() = default;
  explicit Pred(detail::PredPtr node) : node_(std::move(node)) {}
  const detail::PredPtr& node() const { return node_; }
  bool valid() const { return node_ != nullptr; }

 private:
  detail::PredPtr node_;
};

/// Real-valued relational expression over an (initial, final) state pair.
/// Iverson brackets embed predicates as 0/1 arithmetic.
class RelExpr {
 public:
  RelExpr() = default;
  explicit RelExpr(detail::ExprPtr node) : node_(std::move(node)) {}
  const detail::ExprPtr& node() const { return node_; }
  bool valid() const { return node_ != nullptr; }

 private:
  detail::ExprPtr node_;
};

namespace rexpr {

inline RelExpr constant(Rational r) {
  return RelExpr(std::make_shared<detail::ExprNode>(detail::ExprNode{detail::ExprConst{std::move(r)}}));
}
inline RelExpr constant(long long n) { return constant(Rational(n)); }

inline RelExpr var(const StateSpace& space, std::string_view name, bool primed) {
  return RelExpr(std::make_shared<detail::ExprNode>(
      detail::ExprNode{detail::ExprVar{space.var_index(name), primed}}));
}
inline RelExpr initial(const StateSpace& space, std::string_view name) { return var(space, name, false); }
inline RelExpr final(const StateSpace& space, std::string_view name) { return var(space, name, true); }
inline RelExpr var_by_index(size_t idx, bool primed) {
  return RelExpr(std::make_shared<detail::ExprNode>(detail::ExprNode{detail::ExprVar{idx, primed}}));
}
inline RelExpr param(std::string name) {
  return RelExpr(std::make_shared<detail::ExprNode>(detail::ExprNode{detail::ExprParam{std::move(name)}}));
}

inline RelExpr bin(detail::BinOp op, RelExpr a, RelExpr b) {
  return RelExpr(std::make_shared<detail::ExprNode>(detail::ExprNode{detail::ExprBin{op, a.node(), b.node()}}));
}
inline RelExpr add(RelExpr a, RelExpr b) { return bin(detail::BinOp::add, a, b); }
inline RelExpr sub(RelExpr a, RelExpr b) { return bin(detail::BinOp::sub, a, b); }
inline RelExpr mul(RelExpr a, RelExpr b) { return bin(detail::BinOp::mul, a, b); }
inline RelExpr div(RelExpr a, RelExpr b) { return bin(detail::BinOp::div, a, b); }
inline RelExpr mod(RelExpr a, RelExpr b) { return bin(detail::BinOp::mod, a, b); }
inline RelExpr pow(RelExpr a, RelExpr b) { return bin(detail::BinOp::pow, a, b); }
inline RelExpr min(RelExpr a, RelExpr b) {
  return RelExpr(std::make_shared<detail::ExprNode>(detail::ExprNode{detail::ExprMinMax{true, a.node(), b.node()}}));
}
inline RelExpr max(RelExpr a, RelExpr b) {
  return RelExpr(std::make_shared<detail::ExprNode>(detail::ExprNode{detail::ExprMinMax{false, a.node(), b.node()}}));
}
inline RelExpr iverson(Pred p) {
  return RelExpr(std::make_shared<detail::ExprNode>(detail::ExprNode{detail::ExprIverson{p.node()}}));
}

}  // namespace rexpr

namespace pred {

inline Pred constant(bool b) {
  return Pred(std::make_shared<detail::PredNode>(detail::PredNode{detail::PredConst{b}}));
}
inline Pred true_() { return constant(true); }
inline Pred false_() { return constant(false); }

inline Pred cmp(detail::CmpOp op, RelExpr a, RelExpr b) {
  return Pred(std::make_shared<detail::PredNode>(detail::PredNode{detail::PredCmp{op, a.node(), b.node()}}));
}
inline Pred eq(RelExpr a, RelExpr b) { return cmp(detail::CmpOp::eq, a, b); }
inline Pred ne(RelExpr a, RelExpr b) { return cmp(detail::CmpOp::ne, a, b); }
inline Pred lt(RelExpr a, RelExpr b) { return cmp(detail::CmpOp::lt, a, b); }
inline Pred le(RelExpr a, RelExpr b) { return cmp(detail::CmpOp::le, a, b); }
inline Pred gt(RelExpr a, RelExpr b) { return cmp(detail::CmpOp::gt, a, b); }
inline Pred ge(RelExpr a, RelExpr b) { return cmp(detail::CmpOp::ge, a, b); }

inline Pred conj(Pred a, Pred b) {
  return Pred(std::make_shared<detail::PredNode>(detail::PredNode{detail::PredAnd{a.node(), b.node()}}));
}
inline Pred disj(Pred a, Pred b) {
  return Pred(std::make_shared<detail::PredNode>(detail::PredNode{detail::PredOr{a.node(), b.node()}}));
}
inline Pred negate(Pred p) {
  return Pred(std::make_shared<detail::PredNode>(detail::PredNode{detail::PredNot{p.node()}}));
}
inline Pred in_set(RelExpr e, std::vector<Rational> elems) {
  return Pred(std::make_shared<detail::PredNode>(detail::PredNode{detail::PredInSet{e.node(), std::move(elems)}}));
}

}  // namespace pred

namespace detail {

struct PairCtx {
  const StateSpace* space;
  std::span<const long long> ini;
  std::span<const long long> fin;
};

inline Rational eval_node(const ExprPtr& e, const PairCtx& ctx);

inline bool eval_pred_node(const PredPtr& p, const PairCtx& ctx) {
  if (!p) throw TypeError("empty predicate");
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PredConst>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, PredCmp>) {
          Rational a = eval_node(n.lhs, ctx);
          Rational b = eval_node(n.rhs, ctx);
          switch (n.op) {
            case CmpOp::eq: return a == b;
            case CmpOp::ne: return a != b;
            case CmpOp::lt: return a < b;
            case CmpOp::le: return a <= b;
            case CmpOp::gt: return a > b;
            case CmpOp::ge: return a >= b;
          }
          return false;
        } else if constexpr (std::is_same_v<T, PredAnd>) {
          return eval_pred_node(n.lhs, ctx) && eval_pred_node(n.rhs, ctx);
        } else if constexpr (std::is_same_v<T, PredOr>) {
          return eval_pred_node(n.lhs, ctx) || eval_pred_node(n.rhs, ctx);
        } else if constexpr (std::is_same_v<T, PredNot>) {
          return !eval_pred_node(n.p, ctx);
        } else {
          Rational v = eval_node(n.e, ctx);
          for (const Rational& x : n.elems)
            if (x == v) return true;
          return false;
        }
      },
      p->v);
}

inline Rational eval_node(const ExprPtr& e, const PairCtx& ctx) {
  if (!e) throw TypeError("empty expression");
  return std::visit(
      [&](const auto& n) -> Rational {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprConst>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, ExprVar>) {
          return Rational(n.primed ? ctx.fin[n.var] : ctx.ini[n.var]);
        } else if constexpr (std::is_same_v<T, ExprParam>) {
          throw TypeError("unbound parameter '" + n.name + "'");
        } else if constexpr (std::is_same_v<T, ExprBin>) {
          Rational a = eval_node(n.lhs, ctx);
          switch (n.op) {
            case BinOp::add: return a + eval_node(n.rhs, ctx);
            case BinOp::sub: return a - eval_node(n.rhs, ctx);
            case BinOp::mul:
              // A zero left factor short-circuits; guards written to the
              // left keep partial operations (powers) unreached.
              if (a == 0) return Rational(0);
              return a * eval_node(n.rhs, ctx);
            case BinOp::div: return div0(a, eval_node(n.rhs, ctx));
            case BinOp::mod: return mod0(a, eval_node(n.rhs, ctx));
            case BinOp::pow: {
              Rational ex = eval_node(n.rhs, ctx);
              if (!is_integer(ex) || ex < 0)
                throw EvalError("power with non-natural exponent " + format_rational(ex));
              return pow_nat(a, static_cast<unsigned long>(numerator(ex)));
            }
          }
          return Rational(0);
        } else if constexpr (std::is_same_v<T, ExprMinMax>) {
          Rational a = eval_node(n.lhs, ctx);
          Rational b = eval_node(n.rhs, ctx);
          if (n.is_min) return a <= b ? a : b;
          return a <= b ? b : a;
        } else {
          return eval_pred_node(n.pred, ctx) ? Rational(1) : Rational(0);
        }
      },
      e->v);
}

}  // namespace detail

/// Total evaluation at an (initial, final) pair. Division follows the
/// a/b = 0 when b = 0 convention.
inline Rational eval(const RelExpr& e, const State& s, const State& s_final) {
  detail::PairCtx ctx{s.space().get(), s.values(), s_final.values()};
  return detail::eval_node(e.node(), ctx);
}

inline Rational eval_pair(const RelExpr& e, const StateSpace& space, std::span<const long long> ini,
                          std::span<const long long> fin) {
  detail::PairCtx ctx{&space, ini, fin};
  return detail::eval_node(e.node(), ctx);
}

inline bool eval(const Pred& p, const State& s, const State& s_final) {
  detail::PairCtx ctx{s.space().get(), s.values(), s_final.values()};
  return detail::eval_pred_node(p.node(), ctx);
}

inline bool eval_pair(const Pred& p, const StateSpace& space, std::span<const long long> ini,
                      std::span<const long long> fin) {
  detail::PairCtx ctx{&space, ini, fin};
  return detail::eval_pred_node(p.node(), ctx);
}

namespace detail {

enum class VarUse { none, initial_only, final_only, mixed };

inline VarUse merge_use(VarUse a, VarUse b) {
  if (a == VarUse::none) return b;
  if (b == VarUse::none) return a;
  if (a == b) return a;
  return VarUse::mixed;
}

inline VarUse uses_of(const ExprPtr& e);

inline VarUse uses_of(const PredPtr& p) {
  return std::visit(
      [&](const auto& n) -> VarUse {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PredConst>) return VarUse::none;
        else if constexpr (std::is_same_v<T, PredCmp>) return merge_use(uses_of(n.lhs), uses_of(n.rhs));
        else if constexpr (std::is_same_v<T, PredAnd>) return merge_use(uses_of(n.lhs), uses_of(n.rhs));
        else if constexpr (std::is_same_v<T, PredOr>) return merge_use(uses_of(n.lhs), uses_of(n.rhs));
        else if constexpr (std::is_same_v<T, PredNot>) return uses_of(n.p);
        else return uses_of(n.e);
      },
      p->v);
}

inline VarUse uses_of(const ExprPtr& e) {
  return std::visit(
      [&](const auto& n) -> VarUse {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprConst>) return VarUse::none;
        else if constexpr (std::is_same_v<T, ExprVar>) return n.primed ? VarUse::final_only : VarUse::initial_only;
        else if constexpr (std::is_same_v<T, ExprParam>) return VarUse::none;
        else if constexpr (std::is_same_v<T, ExprBin>) return merge_use(uses_of(n.lhs), uses_of(n.rhs));
        else if constexpr (std::is_same_v<T, ExprMinMax>) return merge_use(uses_of(n.lhs), uses_of(n.rhs));
        else return uses_of(n.pred);
      },
      e->v);
}

}  // namespace detail

inline bool initial_only(const RelExpr& e) {
  auto u = detail::uses_of(e.node());
  return u == detail::VarUse::none || u == detail::VarUse::initial_only;
}
inline bool final_only(const RelExpr& e) {
  auto u = detail::uses_of(e.node());
  return u == detail::VarUse::none || u == detail::VarUse::final_only;
}
inline bool initial_only(const Pred& p) {
  auto u = detail::uses_of(p.node());
  return u == detail::VarUse::none || u == detail::VarUse::initial_only;
}
inline bool final_only(const Pred& p) {
  auto u = detail::uses_of(p.node());
  return u == detail::VarUse::none || u == detail::VarUse::final_only;
}

// ---------------------------------------------------------------------------
// Substitution

namespace detail {

struct Subst {
  // var index -> value, separately for initial and final occurrences
  const std::vector<std::optional<long long>>* ini;
  const std::vector<std::optional<long long>>* fin;
};

inline ExprPtr subst_node(const ExprPtr& e, const Subst& s);

inline PredPtr subst_node(const PredPtr& p, const Subst& s) {
  return std::visit(
      [&](const auto& n) -> PredPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PredConst>) return p;
        else if constexpr (std::is_same_v<T, PredCmp>)
          return std::make_shared<PredNode>(PredNode{PredCmp{n.op, subst_node(n.lhs, s), subst_node(n.rhs, s)}});
        else if constexpr (std::is_same_v<T, PredAnd>)
          return std::make_shared<PredNode>(PredNode{PredAnd{subst_node(n.lhs, s), subst_node(n.rhs, s)}});
        else if constexpr (std::is_same_v<T, PredOr>)
          return std::make_shared<PredNode>(PredNode{PredOr{subst_node(n.lhs, s), subst_node(n.rhs, s)}});
        else if constexpr (std::is_same_v<T, PredNot>)
          return std::make_shared<PredNode>(PredNode{PredNot{subst_node(n.p, s)}});
        else
          return std::make_shared<PredNode>(PredNode{PredInSet{subst_node(n.e, s), n.elems}});
      },
      p->v);
}

inline ExprPtr subst_node(const ExprPtr& e, const Subst& s) {
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprConst> || std::is_same_v<T, ExprParam>) {
          return e;
        } else if constexpr (std::is_same_v<T, ExprVar>) {
          const auto* table = n.primed ? s.fin : s.ini;
          if (table && (*table)[n.var])
            return std::make_shared<ExprNode>(ExprNode{ExprConst{Rational(*(*table)[n.var])}});
          return e;
        } else if constexpr (std::is_same_v<T, ExprBin>) {
          return std::make_shared<ExprNode>(ExprNode{ExprBin{n.op, subst_node(n.lhs, s), subst_node(n.rhs, s)}});
        } else if constexpr (std::is_same_v<T, ExprMinMax>) {
          return std::make_shared<ExprNode>(
              ExprNode{ExprMinMax{n.is_min, subst_node(n.lhs, s), subst_node(n.rhs, s)}});
        } else {
          return std::make_shared<ExprNode>(ExprNode{ExprIverson{subst_node(n.pred, s)}});
        }
      },
      e->v);
}

inline RelExpr fold_if_closed(RelExpr e, const StateSpace& space) {
  if (uses_of(e.node()) != VarUse::none) return e;
  try {
    std::vector<long long> dummy(space.var_count(), 0);
    for (size_t v = 0; v < space.var_count(); ++v) dummy[v] = space.domain(v).lo();
    PairCtx ctx{&space, dummy, dummy};
    return rexpr::constant(eval_node(e.node(), ctx));
  } catch (const EvalError&) {
    return e;  // leave partial nodes (negative powers) unfolded
  } catch (const TypeError&) {
    return e;  // unbound parameters
  }
}

}  // namespace detail

/// Replaces every final-variable reference by its value in v0.
inline RelExpr subst_final(const RelExpr& e, const State& v0) {
  std::vector<std::optional<long long>> fin(v0.space()->var_count());
  for (size_t v = 0; v < fin.size(); ++v) fin[v] = v0.value(v);
  detail::Subst s{nullptr, &fin};
  return detail::fold_if_closed(RelExpr(detail::subst_node(e.node(), s)), *v0.space());
}

/// Replaces every initial-variable reference by its value in v0.
inline RelExpr subst_initial(const RelExpr& e, const State& v0) {
  std::vector<std::optional<long long>> ini(v0.space()->var_count());
  for (size_t v = 0; v < ini.size(); ++v) ini[v] = v0.value(v);
  detail::Subst s{&ini, nullptr};
  return detail::fold_if_closed(RelExpr(detail::subst_node(e.node(), s)), *v0.space());
}

/// Substitutes only x' by val; other primed variables stay symbolic.
inline RelExpr subst_var_final(const RelExpr& e, const StateSpace& space, std::string_view x, long long val) {
  std::vector<std::optional<long long>> fin(space.var_count());
  fin[space.var_index(x)] = val;
  detail::Subst s{nullptr, &fin};
  return detail::fold_if_closed(RelExpr(detail::subst_node(e.node(), s)), space);
}

// ---------------------------------------------------------------------------
// Iverson bracket rewriting

namespace detail {

inline ExprPtr rewrite_expr(const ExprPtr& e);

// Decomposes an Iverson bracket of a compound predicate into arithmetic
// over brackets of simpler predicates.
inline ExprPtr rewrite_iverson(const PredPtr& p) {
  auto wrap = [](PredPtr q) { return std::make_shared<ExprNode>(ExprNode{ExprIverson{std::move(q)}}); };
  auto cnst = [](long long k) { return std::make_shared<ExprNode>(ExprNode{ExprConst{Rational(k)}}); };
  auto bin = [](BinOp op, ExprPtr a, ExprPtr b) {
    return std::make_shared<ExprNode>(ExprNode{ExprBin{op, std::move(a), std::move(b)}});
  };
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PredConst>) {
          return cnst(n.value ? 1 : 0);  // ib_true / ib_false
        } else if constexpr (std::is_same_v<T, PredNot>) {
          return bin(BinOp::sub, cnst(1), rewrite_iverson(n.p));  // ib_neg
        } else if constexpr (std::is_same_v<T, PredAnd>) {
          return bin(BinOp::mul, rewrite_iverson(n.lhs), rewrite_iverson(n.rhs));  // ib_conj
        } else if constexpr (std::is_same_v<T, PredOr>) {
          ExprPtr a = rewrite_iverson(n.lhs);
          ExprPtr b = rewrite_iverson(n.rhs);
          // ib_disj
          return bin(BinOp::sub, bin(BinOp::add, a, b), bin(BinOp::mul, a, b));
        } else if constexpr (std::is_same_v<T, PredCmp>) {
          return wrap(std::make_shared<PredNode>(
              PredNode{PredCmp{n.op, rewrite_expr(n.lhs), rewrite_expr(n.rhs)}}));
        } else {
          return wrap(std::make_shared<PredNode>(PredNode{PredInSet{rewrite_expr(n.e), n.elems}}));
        }
      },
      p->v);
}

inline ExprPtr rewrite_expr(const ExprPtr& e) {
  auto bin = [](BinOp op, ExprPtr a, ExprPtr b) {
    return std::make_shared<ExprNode>(ExprNode{ExprBin{op, std::move(a), std::move(b)}});
  };
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprConst> || std::is_same_v<T, ExprVar> ||
                      std::is_same_v<T, ExprParam>) {
          return e;
        } else if constexpr (std::is_same_v<T, ExprBin>) {
          return bin(n.op, rewrite_expr(n.lhs), rewrite_expr(n.rhs));
        } else if constexpr (std::is_same_v<T, ExprMinMax>) {
          ExprPtr x = rewrite_expr(n.lhs);
          ExprPtr y = rewrite_expr(n.rhs);
          auto ivgt = std::make_shared<ExprNode>(ExprNode{ExprIverson{
              std::make_shared<PredNode>(PredNode{PredCmp{CmpOp::gt, x, y}})}});
          auto ivle = std::make_shared<ExprNode>(ExprNode{ExprIverson{
              std::make_shared<PredNode>(PredNode{PredCmp{CmpOp::le, x, y}})}});
          if (n.is_min)  // ib_min: x*[x<=y] + y*[x>y]
            return bin(BinOp::add, bin(BinOp::mul, x, ivle), bin(BinOp::mul, y, ivgt));
          // ib_max: x*[x>y] + y*[x<=y]
          return bin(BinOp::add, bin(BinOp::mul, x, ivgt), bin(BinOp::mul, y, ivle));
        } else {
          return rewrite_iverson(n.pred);
        }
      },
      e->v);
}

}  // namespace detail

/// Applies the bracket law catalog (negation, conjunction, disjunction,
/// min, max) as semantics-preserving rewrites. The result agrees with the
/// input on every state pair.
inline RelExpr iverson_rewrite(const RelExpr& e) {
  return RelExpr(detail::rewrite_expr(e.node()));
}

}  // namespace proburel

#endif
