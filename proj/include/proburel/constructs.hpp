#ifndef PROBUREL_CONSTRUCTS_HPP
#define PROBUREL_CONSTRUCTS_HPP

#include "proburel/kernel.hpp"

namespace proburel {

struct WeightOutOfRange : std::runtime_error {
  WeightOutOfRange(StateId s, const Rational& w)
      : std::runtime_error("choice weight " + format_rational(w) + " outside [0,1] at initial state " +
                           std::to_string(s)),
        initial(s) {}
  StateId initial;
};

struct EmptySet : std::runtime_error {
  EmptySet() : std::runtime_error("uniform choice over an empty set") {}
};

// ---------------------------------------------------------------------------
// Construct semantics over kernels

/// Identity kernel: changes no variables, terminates immediately.
inline Kernel sem_skip(const SpacePtr& space) { return Kernel::identity(space); }

/// One-point distribution of the final state. Rows whose assigned value
/// escapes the variable's domain are poisoned rather than failing eagerly;
/// the error surfaces only if mass reaches them.
inline Kernel sem_assign(const SpacePtr& space, std::string_view var, const RelExpr& e) {
  if (!initial_only(e)) throw TypeError("assignment expression must only use initial-state variables");
  size_t v = space->var_index(var);
  Kernel k(space, KernelKind::prfun);
  std::vector<long long> ini;
  for (StateId s = 0; s < space->state_count(); ++s) {
    space->decode(s, ini);
    Rational val = eval_pair(e, *space, ini, ini);
    if (!is_integer(val) || !space->domain(v).contains(static_cast<long long>(numerator(val)))) {
      long long approx = is_integer(val) ? static_cast<long long>(numerator(val)) : 0;
      k.poison(s, RowError{std::string(var), approx});
      continue;
    }
    StateId t = space->with_value(s, v, static_cast<long long>(numerator(val)));
    k.set(s, t, Rational(1));
  }
  return k;
}

namespace detail {

inline void check_prfun(const Kernel& k, const char* who) {
  if (k.kind() != KernelKind::prfun)
    throw std::invalid_argument(std::string(who) + " expects unit-valued (prfun) kernels");
}

// Clamps and, in debug builds, insists the clamp was a no-op: for
// (sub)distribution inputs saturation can only come from a bug.
inline Rational clamp_checked(const Rational& v) {
  assert(v >= 0 && v <= 1);
  if (v < 0) return Rational(0);
  if (v > 1) return Rational(1);
  return v;
}

/// Per-initial-state truth table of an initial-state predicate.
inline std::vector<bool> guard_table(const SpacePtr& space, const Pred& b) {
  if (!initial_only(b)) throw TypeError("guard must only use initial-state variables");
  std::vector<bool> table(space->state_count());
  std::vector<long long> ini;
  for (StateId s = 0; s < space->state_count(); ++s) {
    space->decode(s, ini);
    table[s] = eval_pair(b, *space, ini, ini);
  }
  return table;
}

inline void seq_row(const Kernel& P, StateId s, const Kernel& Q, Kernel& out, bool clamp_prfun) {
  const auto& prow = P.row(s);
  if (prow.err) {
    out.poison(s, *prow.err);
    return;
  }
  if (prow.def != 0)
    throw std::invalid_argument("sequential composition needs a finitely supported left operand");
  Rational def_acc = 0;
  std::map<StateId, Rational> corr;
  for (const auto& [v0, w] : prow.w) {
    const auto& qrow = Q.row(v0);
    if (qrow.err) {
      out.poison(s, *qrow.err);
      return;
    }
    def_acc += w * qrow.def;
    for (const auto& [t, qv] : qrow.w) {
      Rational delta = w * (qv - qrow.def);
      if (delta != 0) corr[t] += delta;
    }
  }
  auto& o = out.row_mut(s);
  o.def = clamp_prfun ? clamp_checked(def_acc) : def_acc;
  for (const auto& [t, delta] : corr) {
    Rational v = def_acc + delta;
    o.set(t, clamp_prfun ? clamp_checked(v) : v);
  }
}

}  // namespace detail

/// Weighted sum w(s)*P + (1-w(s))*Q with per-initial-state weights.
inline Kernel sem_pchoice_weights(std::span<const Rational> w, const Kernel& P, const Kernel& Q) {
  detail::check_same_space(P, Q);
  detail::check_prfun(P, "pchoice");
  detail::check_prfun(Q, "pchoice");
  size_t n = P.states();
  Kernel out(P.space(), KernelKind::prfun);
  for (StateId s = 0; s < n; ++s) {
    const Rational& ws = w[s];
    if (ws < 0 || ws > 1) throw WeightOutOfRange(s, ws);
    const auto& ra = P.row(s);
    const auto& rb = Q.row(s);
    if (ra.err && ws > 0) {
      out.poison(s, *ra.err);
      continue;
    }
    if (rb.err && ws < 1) {
      out.poison(s, *rb.err);
      continue;
    }
    if (ra.err || rb.err) {  // zero-weight branch errors are unreachable
      const auto& live = ra.err ? rb : ra;
      auto& o = out.row_mut(s);
      o.def = live.def;
      o.w = live.w;
      continue;
    }
    auto& o = out.row_mut(s);
    Rational cw = Rational(1) - ws;
    o.def = detail::clamp_checked(ws * ra.def + cw * rb.def);
    bool rest = false;
    detail::walk_union(ra, rb, n, [&](StateId t, const Rational& va, const Rational& vb) {
      o.set(t, detail::clamp_checked(ws * va + cw * vb));
    }, rest);
  }
  return out;
}

/// Probabilistic choice with an initial-state weight expression.
inline Kernel sem_pchoice(const RelExpr& w, const Kernel& P, const Kernel& Q) {
  if (!initial_only(w)) throw TypeError("choice weight must only use initial-state variables");
  const auto& space = *P.space();
  std::vector<Rational> ws(P.states());
  std::vector<long long> ini;
  for (StateId s = 0; s < P.states(); ++s) {
    space.decode(s, ini);
    ws[s] = eval_pair(w, space, ini, ini);
  }
  return sem_pchoice_weights(ws, P, Q);
}

inline Kernel sem_pchoice(const Rational& w, const Kernel& P, const Kernel& Q) {
  std::vector<Rational> ws(P.states(), w);
  return sem_pchoice_weights(ws, P, Q);
}

/// Conditional choice under an initial-state guard: row-wise selection.
inline Kernel sem_cchoice(const Pred& b, const Kernel& P, const Kernel& Q) {
  detail::check_same_space(P, Q);
  auto table = detail::guard_table(P.space(), b);
  Kernel out(P.space(), KernelKind::prfun);
  for (StateId s = 0; s < P.states(); ++s) {
    const auto& src = table[s] ? P.row(s) : Q.row(s);
    if (src.err) {
      out.poison(s, *src.err);
      continue;
    }
    auto& o = out.row_mut(s);
    o.def = src.def;
    o.w = src.w;
  }
  return out;
}

/// Library-level conditional choice under a full relational guard,
/// selecting per (initial, final) pair.
inline Kernel cchoice_rel(const Pred& b, const Kernel& P, const Kernel& Q) {
  detail::check_same_space(P, Q);
  Kernel masked_p = mask_kernel(P, b);
  Kernel masked_q = mask_kernel(Q, pred::negate(b));
  Kernel out = add_kernels(masked_p, masked_q);
  return P.kind() == KernelKind::prfun && Q.kind() == KernelKind::prfun ? out.as_prfun() : out;
}

/// Conditional-probability chaining: sum over intermediate states of the
/// product of weights. Skip is the unit on both sides.
inline Kernel sem_seq(const Kernel& P, const Kernel& Q) {
  detail::check_same_space(P, Q);
  bool clamp = P.kind() == KernelKind::prfun && Q.kind() == KernelKind::prfun;
  Kernel out(P.space(), clamp ? KernelKind::prfun : KernelKind::rvfun);
  for (StateId s = 0; s < P.states(); ++s) detail::seq_row(P, s, Q, out, clamp);
  return out;
}

/// Joint probability: pointwise product renormalised per initial state.
/// Accepts arbitrary nonnegative likelihoods on either side.
inline Kernel sem_parallel(const Kernel& P, const Kernel& Q) {
  detail::check_same_space(P, Q);
  return clamp_kernel(normalize_final(pointwise_product(P, Q)));
}

/// Uniform distribution of `var` over a subset of its domain; the other
/// variables are unchanged. `empty_is_zero` selects the algebra-mode
/// behaviour (zero kernel) over the program-mode error.
inline Kernel sem_uniform(const SpacePtr& space, std::string_view var, std::span<const long long> values,
                          bool empty_is_zero = false) {
  if (values.empty()) {
    if (empty_is_zero) return Kernel::zero(space, KernelKind::prfun);
    throw EmptySet();
  }
  size_t v = space->var_index(var);
  for (long long val : values)
    if (!space->domain(v).contains(val)) throw OutOfDomain(space->var_name(v), val);
  for (size_t i = 0; i < values.size(); ++i)
    for (size_t j = i + 1; j < values.size(); ++j)
      if (values[i] == values[j]) throw DomainError("duplicate value in uniform choice set");
  Rational share(1, static_cast<long long>(values.size()));
  Kernel k(space, KernelKind::prfun);
  for (StateId s = 0; s < space->state_count(); ++s)
    for (long long val : values) k.set(s, space->with_value(s, v, val), share);
  return k;
}

}  // namespace proburel

#endif
