#ifndef PROBUREL_QUERY_HPP
#define PROBUREL_QUERY_HPP

#include "proburel/fixpoint.hpp"

namespace proburel {

/// Per-initial-state query values, with an optional bound on the error
/// introduced by a truncated time window.
struct InitialValuedResult {
  SpacePtr space;
  std::vector<std::optional<Rational>> values;  // empty optional: row unavailable (window edge)
  std::optional<Rational> truncation_residual;

  const Rational& at(StateId s) const {
    if (!values[s]) throw std::runtime_error("query value unavailable at " + space->state_name(s));
    return *values[s];
  }
};

/// Expected value of e after P: value(s) = sum over s' of P(s,s')*e(s').
inline InitialValuedResult expect(const Kernel& P, const RelExpr& e) {
  if (!final_only(e)) throw TypeError("expectation expression must only use final-state variables");
  const auto& space = *P.space();
  size_t n = P.states();
  std::vector<Rational> evals(n);
  Rational total_eval = 0;
  std::vector<long long> fin;
  for (StateId t = 0; t < n; ++t) {
    space.decode(t, fin);
    evals[t] = eval_pair(e, space, fin, fin);
    total_eval += evals[t];
  }
  InitialValuedResult res{P.space(), {}, std::nullopt};
  res.values.resize(n);
  for (StateId s = 0; s < n; ++s) {
    const auto& row = P.row(s);
    if (row.err) continue;
    Rational acc = 0;
    if (row.def != 0) {
      Rational covered = 0;
      for (const auto& [t, v] : row.w) {
        acc += v * evals[t];
        covered += evals[t];
      }
      acc += row.def * (total_eval - covered);
    } else {
      for (const auto& [t, v] : row.w) acc += v * evals[t];
    }
    res.values[s] = acc;
  }
  return res;
}

/// Probability that pred holds after P; expect with an Iverson bracket.
inline InitialValuedResult prob_of(const Kernel& P, const Pred& p) {
  if (!final_only(p)) throw TypeError("event must only use final-state variables");
  return expect(P, rexpr::iverson(p));
}

struct TableEntry {
  StateId final_state;
  Rational weight;
};

/// Final states with nonzero weight for one initial state, in
/// lexicographic order.
inline std::vector<TableEntry> distribution_table(const Kernel& P, const State& initial) {
  if (*P.space() != *initial.space()) throw SpaceMismatch();
  P.surface_error(initial.id());
  const auto& row = P.row(initial.id());
  std::vector<TableEntry> out;
  if (row.def != 0) {
    for (StateId t = 0; t < P.states(); ++t) {
      const Rational& v = row.at(t);
      if (v != 0) out.push_back({t, v});
    }
  } else {
    for (const auto& [t, v] : row.w) out.push_back({t, v});
  }
  return out;
}

/// Residual bound for a query over a loop truncated at a time window:
/// unabsorbed mass times the window maximum of |e|, plus a geometric tail
/// term when the decay ratio is certified and e tracks the incrementing
/// time variable (whose value keeps growing past the window).
inline Rational truncation_residual(const Rational& unabsorbed, const Rational& max_abs_e,
                                    const std::optional<Rational>& ratio, bool e_uses_time) {
  Rational bound = max_abs_e;
  if (e_uses_time && ratio && *ratio < 1) bound += Rational(1) / (Rational(1) - *ratio);
  return unabsorbed * bound;
}

/// Window maximum of |e| over final states.
inline Rational max_abs_over_states(const SpacePtr& space, const RelExpr& e) {
  Rational best = 0;
  std::vector<long long> fin;
  for (StateId t = 0; t < space->state_count(); ++t) {
    space->decode(t, fin);
    Rational v = eval_pair(e, *space, fin, fin);
    if (v < 0) v = -v;
    if (v > best) best = v;
  }
  return best;
}

}  // namespace proburel

#endif
