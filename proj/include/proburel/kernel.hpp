#ifndef PROBUREL_KERNEL_HPP
#define PROBUREL_KERNEL_HPP

#include <cassert>
#include <map>
#include <optional>

#include "proburel/expr.hpp"
#include "proburel/state.hpp"

namespace proburel {

struct SpaceMismatch : std::runtime_error {
  SpaceMismatch() : std::runtime_error("kernels over different state spaces") {}
};

struct NegativeWeight : std::runtime_error {
  NegativeWeight(StateId s, StateId t, const Rational& w)
      : std::runtime_error("negative weight " + format_rational(w) + " at pair (" + std::to_string(s) +
                           "," + std::to_string(t) + ")"),
        initial(s),
        final_(t) {}
  StateId initial, final_;
};

struct ZeroTotal : std::runtime_error {
  ZeroTotal() : std::runtime_error("normalisation of an all-zero kernel") {}
};

/// rvfun kernels carry arbitrary nonnegative weights (likelihoods);
/// prfun kernels are unit-valued (probabilistic programs).
enum class KernelKind { rvfun, prfun };

/// A row poisoned by an assignment that left its domain. The error
/// surfaces only if mass actually flows through the row.
struct RowError {
  std::string var;
  long long val = 0;
};

/// Tabulated semantics object: one row per initial state, each row a
/// finitely supported map from final states to exact weights. A row also
/// carries a default weight for every final state not explicitly listed,
/// which keeps top-of-lattice iterates (all-one kernels) compact. Entries
/// never equal the row default.
class Kernel {
 public:
  struct Row {
    Rational def;
    std::map<StateId, Rational> w;
    std::optional<RowError> err;

    const Rational& at(StateId t) const {
      auto it = w.find(t);
      return it == w.end() ? def : it->second;
    }
    void set(StateId t, const Rational& v) {
      if (v == def)
        w.erase(t);
      else
        w[t] = v;
    }
  };

  Kernel(SpacePtr space, KernelKind kind) : space_(std::move(space)), kind_(kind) {
    rows_.resize(space_->state_count());
  }

  static Kernel zero(SpacePtr space, KernelKind kind = KernelKind::prfun) {
    return Kernel(std::move(space), kind);
  }

  static Kernel constant(SpacePtr space, const Rational& c, KernelKind kind) {
    Kernel k(std::move(space), kind);
    for (auto& r : k.rows_) r.def = c;
    return k;
  }

  static Kernel top(SpacePtr space) { return constant(std::move(space), Rational(1), KernelKind::prfun); }

  static Kernel identity(SpacePtr space) {
    Kernel k(std::move(space), KernelKind::prfun);
    for (StateId s = 0; s < k.rows_.size(); ++s) k.rows_[s].w[s] = 1;
    return k;
  }

  const SpacePtr& space() const { return space_; }
  KernelKind kind() const { return kind_; }
  size_t states() const { return rows_.size(); }

  const Row& row(StateId s) const { return rows_[s]; }
  Row& row_mut(StateId s) { return rows_[s]; }

  const Rational& at(StateId s, StateId t) const {
    surface_error(s);
    return rows_[s].at(t);
  }

  void set(StateId s, StateId t, const Rational& v) { rows_[s].set(t, v); }
  void poison(StateId s, RowError e) {
    rows_[s] = Row{};
    rows_[s].err = std::move(e);
  }

  bool has_error_rows() const {
    for (const auto& r : rows_)
      if (r.err) return true;
    return false;
  }

  std::vector<StateId> error_rows() const {
    std::vector<StateId> out;
    for (StateId s = 0; s < rows_.size(); ++s)
      if (rows_[s].err) out.push_back(s);
    return out;
  }

  void surface_error(StateId s) const {
    if (rows_[s].err) throw OutOfDomain(rows_[s].err->var, rows_[s].err->val);
  }

  Rational row_sum(StateId s) const {
    surface_error(s);
    const Row& r = rows_[s];
    Rational sum = r.def * Rational(static_cast<long long>(states() - r.w.size()));
    for (const auto& [t, v] : r.w) sum += v;
    return sum;
  }

  /// Reinterprets prfun weights as plain nonnegative reals.
  Kernel as_rvfun() const {
    Kernel k = *this;
    k.kind_ = KernelKind::rvfun;
    return k;
  }

  /// Casts to prfun, verifying every weight already lies in [0,1].
  Kernel as_prfun() const {
    Kernel k = *this;
    for (StateId s = 0; s < rows_.size(); ++s) {
      const Row& r = rows_[s];
      if (r.err) continue;
      auto check = [&](const Rational& v) {
        if (v < 0 || v > 1)
          throw std::invalid_argument("weight " + format_rational(v) + " outside [0,1] in prfun cast");
      };
      if (r.w.size() < states()) check(r.def);
      for (const auto& [t, v] : r.w) check(v);
    }
    k.kind_ = KernelKind::prfun;
    return k;
  }

 private:
  SpacePtr space_;
  KernelKind kind_;
  std::vector<Row> rows_;
};

namespace detail {

inline void check_same_space(const Kernel& a, const Kernel& b) {
  if (*a.space() != *b.space()) throw SpaceMismatch();
}

/// Merge-walks two rows, invoking f(final, va, vb) for every final state
/// where either side stores an explicit entry; `rest` tells the caller
/// whether some final states fall back to the two defaults.
template <typename F>
void walk_union(const Kernel::Row& a, const Kernel::Row& b, size_t n_states, F&& f, bool& rest) {
  auto ia = a.w.begin();
  auto ib = b.w.begin();
  size_t seen = 0;
  while (ia != a.w.end() || ib != b.w.end()) {
    ++seen;
    if (ib == b.w.end() || (ia != a.w.end() && ia->first < ib->first)) {
      f(ia->first, ia->second, b.def);
      ++ia;
    } else if (ia == a.w.end() || ib->first < ia->first) {
      f(ib->first, a.def, ib->second);
      ++ib;
    } else {
      f(ia->first, ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  rest = seen < n_states;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Construction from expressions

/// rows[s][t] = eval(e, s, t); zeros omitted. Rejects negative weights.
inline Kernel tabulate(const SpacePtr& space, const RelExpr& e) {
  Kernel k(space, KernelKind::rvfun);
  size_t n = space->state_count();
  std::vector<long long> ini, fin;
  for (StateId s = 0; s < n; ++s) {
    space->decode(s, ini);
    for (StateId t = 0; t < n; ++t) {
      space->decode(t, fin);
      Rational v = eval_pair(e, *space, ini, fin);
      if (v < 0) throw NegativeWeight(s, t, v);
      if (v != 0) k.set(s, t, v);
    }
  }
  return k;
}

/// Tabulates a single row: the function t -> eval(e, s0, t).
inline Kernel::Row tabulate_row(const SpacePtr& space, const RelExpr& e, StateId s0) {
  Kernel::Row row;
  std::vector<long long> ini, fin;
  space->decode(s0, ini);
  for (StateId t = 0; t < space->state_count(); ++t) {
    space->decode(t, fin);
    Rational v = eval_pair(e, *space, ini, fin);
    if (v < 0) throw NegativeWeight(s0, t, v);
    if (v != 0) row.w[t] = v;
  }
  return row;
}

// ---------------------------------------------------------------------------
// Classification (distribution predicates)

struct Classification {
  bool is_prob = false;
  bool is_final_dist = false;
  bool is_final_subdist = false;
  bool final_reachable = false;
  std::vector<Rational> row_sums;
  std::vector<StateId> boundary_rows;  // rows poisoned by domain escapes
};

/// Exact row sums and the distribution predicates. Poisoned rows are
/// excluded from the verdicts and listed separately.
inline Classification classify(const Kernel& k) {
  Classification c;
  c.is_prob = true;
  c.is_final_dist = true;
  c.is_final_subdist = true;
  c.final_reachable = true;
  size_t n = k.states();
  c.row_sums.resize(n);
  for (StateId s = 0; s < n; ++s) {
    const auto& row = k.row(s);
    if (row.err) {
      c.boundary_rows.push_back(s);
      continue;
    }
    Rational sum = row.def * Rational(static_cast<long long>(n - row.w.size()));
    bool has_positive = row.def > 0 && row.w.size() < n;
    auto see = [&](const Rational& v) {
      if (v < 0 || v > 1) c.is_prob = false;
      if (v > 0) has_positive = true;
    };
    if (row.w.size() < n) see(row.def);
    for (const auto& [t, v] : row.w) {
      see(v);
      sum += v;
    }
    c.row_sums[s] = sum;
    if (sum != 1) c.is_final_dist = false;
    if (sum <= 0 || sum > 1) c.is_final_subdist = false;
    if (!has_positive) c.final_reachable = false;
  }
  c.is_final_dist = c.is_final_dist && c.is_prob;
  c.is_final_subdist = c.is_final_subdist && c.is_prob;
  return c;
}

// ---------------------------------------------------------------------------
// Conversions and normalisations

/// Clamps every weight into [0,1]; identity on kernels already
/// probabilistic. Result is prfun-kind. Idempotent.
inline Kernel clamp_kernel(const Kernel& k) {
  Kernel out(k.space(), KernelKind::prfun);
  auto clamp = [](const Rational& v) -> Rational {
    if (v < 0) return Rational(0);
    if (v > 1) return Rational(1);
    return v;
  };
  for (StateId s = 0; s < k.states(); ++s) {
    const auto& row = k.row(s);
    if (row.err) {
      out.poison(s, *row.err);
      continue;
    }
    auto& o = out.row_mut(s);
    o.def = clamp(row.def);
    for (const auto& [t, v] : row.w) o.set(t, clamp(v));
  }
  return out;
}

/// Divides each row by its own sum; all-zero rows stay zero (division
/// convention). For nonnegative reachable input the result is a final
/// distribution.
inline Kernel normalize_final(const Kernel& k) {
  Kernel out(k.space(), KernelKind::prfun);
  size_t n = k.states();
  for (StateId s = 0; s < n; ++s) {
    const auto& row = k.row(s);
    if (row.err) {
      out.poison(s, *row.err);
      continue;
    }
    Rational sum = row.def * Rational(static_cast<long long>(n - row.w.size()));
    for (const auto& [t, v] : row.w) sum += v;
    if (sum == 0) continue;
    auto& o = out.row_mut(s);
    o.def = row.def / sum;
    for (const auto& [t, v] : row.w) o.set(t, v / sum);
  }
  return out;
}

/// Divides every weight by the grand total over all pairs.
inline Kernel normalize_global(const Kernel& k) {
  size_t n = k.states();
  Rational total = 0;
  for (StateId s = 0; s < n; ++s) {
    k.surface_error(s);
    total += k.row_sum(s);
  }
  if (total == 0) throw ZeroTotal();
  Kernel out(k.space(), KernelKind::prfun);
  for (StateId s = 0; s < n; ++s) {
    const auto& row = k.row(s);
    auto& o = out.row_mut(s);
    o.def = row.def / total;
    for (const auto& [t, v] : row.w) o.set(t, v / total);
  }
  return out;
}

/// Renormalises over the final values of one variable: each weight is
/// divided by the sum over x' of the weights at the final states agreeing
/// with s' everywhere else. Zero-sum groups become zero.
inline Kernel normalize_alpha(std::string_view x, const Kernel& k) {
  const auto& space = *k.space();
  size_t var = space.var_index(x);
  size_t n = k.states();
  // stride of x' in the final-state index
  size_t stride = 1;
  for (size_t v = space.var_count(); v-- > var + 1;) stride *= space.domain(v).size();
  size_t card = space.domain(var).size();

  auto group_base = [&](StateId t) {
    size_t idx = (t / stride) % card;
    return t - static_cast<StateId>(idx * stride);
  };

  Kernel out(k.space(), KernelKind::prfun);
  for (StateId s = 0; s < n; ++s) {
    const auto& row = k.row(s);
    if (row.err) {
      out.poison(s, *row.err);
      continue;
    }
    std::map<StateId, Rational> group_sum;
    if (row.def != 0) {
      // dense fallback: every group contains card members
      for (StateId t = 0; t < n; ++t) group_sum[group_base(t)] += row.at(t);
    } else {
      for (const auto& [t, v] : row.w) group_sum[group_base(t)] += v;
    }
    auto& o = out.row_mut(s);
    if (row.def != 0) {
      for (StateId t = 0; t < n; ++t) {
        const Rational& g = group_sum[group_base(t)];
        if (g != 0) o.set(t, row.at(t) / g);
      }
    } else {
      for (const auto& [t, v] : row.w) {
        const Rational& g = group_sum[group_base(t)];
        if (g != 0) o.set(t, v / g);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison

/// Exact semantic equality: weights agree on every pair. Rows with domain
/// escapes never compare equal.
inline bool kernels_equal(const Kernel& a, const Kernel& b) {
  detail::check_same_space(a, b);
  size_t n = a.states();
  for (StateId s = 0; s < n; ++s) {
    const auto& ra = a.row(s);
    const auto& rb = b.row(s);
    if (ra.err || rb.err) return false;
    bool rest = false;
    bool ok = true;
    detail::walk_union(ra, rb, n, [&](StateId, const Rational& va, const Rational& vb) {
      if (va != vb) ok = false;
    }, rest);
    if (!ok) return false;
    if (rest && ra.def != rb.def) return false;
  }
  return true;
}

/// Pointwise a <= b on every pair.
inline bool kernel_le(const Kernel& a, const Kernel& b) {
  detail::check_same_space(a, b);
  size_t n = a.states();
  for (StateId s = 0; s < n; ++s) {
    const auto& ra = a.row(s);
    const auto& rb = b.row(s);
    if (ra.err || rb.err) return false;
    bool rest = false;
    bool ok = true;
    detail::walk_union(ra, rb, n, [&](StateId, const Rational& va, const Rational& vb) {
      if (va > vb) ok = false;
    }, rest);
    if (!ok) return false;
    if (rest && ra.def > rb.def) return false;
  }
  return true;
}

/// Largest |a - b| over all pairs, skipping rows poisoned on either side.
inline Rational sup_distance(const Kernel& a, const Kernel& b) {
  detail::check_same_space(a, b);
  size_t n = a.states();
  Rational best = 0;
  auto bump = [&](const Rational& x, const Rational& y) {
    Rational d = x >= y ? x - y : y - x;
    if (d > best) best = d;
  };
  for (StateId s = 0; s < n; ++s) {
    const auto& ra = a.row(s);
    const auto& rb = b.row(s);
    if (ra.err || rb.err) continue;
    bool rest = false;
    detail::walk_union(ra, rb, n, [&](StateId, const Rational& va, const Rational& vb) { bump(va, vb); },
                       rest);
    if (rest) bump(ra.def, rb.def);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Pointwise algebra (library level; used by the construct semantics and
// the law suite)

/// ca*a + cb*b pointwise, as rvfun.
inline Kernel add_kernels(const Kernel& a, const Kernel& b, const Rational& ca = Rational(1),
                          const Rational& cb = Rational(1)) {
  detail::check_same_space(a, b);
  Kernel out(a.space(), KernelKind::rvfun);
  size_t n = a.states();
  for (StateId s = 0; s < n; ++s) {
    const auto& ra = a.row(s);
    const auto& rb = b.row(s);
    if (ra.err) {
      out.poison(s, *ra.err);
      continue;
    }
    if (rb.err) {
      out.poison(s, *rb.err);
      continue;
    }
    auto& o = out.row_mut(s);
    o.def = ca * ra.def + cb * rb.def;
    bool rest = false;
    detail::walk_union(ra, rb, n, [&](StateId t, const Rational& va, const Rational& vb) {
      o.set(t, ca * va + cb * vb);
    }, rest);
  }
  return out;
}

inline Kernel scale_kernel(const Kernel& a, const Rational& c) {
  Kernel out(a.space(), KernelKind::rvfun);
  for (StateId s = 0; s < a.states(); ++s) {
    const auto& ra = a.row(s);
    if (ra.err) {
      out.poison(s, *ra.err);
      continue;
    }
    auto& o = out.row_mut(s);
    o.def = c * ra.def;
    for (const auto& [t, v] : ra.w) o.set(t, c * v);
  }
  return out;
}

/// Pointwise product, as rvfun.
inline Kernel pointwise_product(const Kernel& a, const Kernel& b) {
  detail::check_same_space(a, b);
  Kernel out(a.space(), KernelKind::rvfun);
  size_t n = a.states();
  for (StateId s = 0; s < n; ++s) {
    const auto& ra = a.row(s);
    const auto& rb = b.row(s);
    if (ra.err) {
      out.poison(s, *ra.err);
      continue;
    }
    if (rb.err) {
      out.poison(s, *rb.err);
      continue;
    }
    auto& o = out.row_mut(s);
    o.def = ra.def * rb.def;
    bool rest = false;
    detail::walk_union(ra, rb, n, [&](StateId t, const Rational& va, const Rational& vb) {
      o.set(t, va * vb);
    }, rest);
  }
  return out;
}

/// Zeroes every pair where the relation does not hold.
inline Kernel mask_kernel(const Kernel& k, const Pred& rel) {
  const auto& space = *k.space();
  Kernel out(k.space(), k.kind());
  size_t n = k.states();
  std::vector<long long> ini, fin;
  for (StateId s = 0; s < n; ++s) {
    const auto& row = k.row(s);
    if (row.err) {
      out.poison(s, *row.err);
      continue;
    }
    space.decode(s, ini);
    auto& o = out.row_mut(s);
    if (row.def == 0) {
      for (const auto& [t, v] : row.w) {
        space.decode(t, fin);
        if (eval_pair(rel, space, ini, fin)) o.set(t, v);
      }
    } else {
      for (StateId t = 0; t < n; ++t) {
        space.decode(t, fin);
        if (eval_pair(rel, space, ini, fin)) o.set(t, row.at(t));
      }
    }
  }
  return out;
}

}  // namespace proburel

#endif
