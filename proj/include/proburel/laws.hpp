#ifndef PROBUREL_LAWS_HPP
#define PROBUREL_LAWS_HPP

#include <functional>
#include <random>

#include "proburel/program.hpp"

namespace proburel {

struct UnknownLaw : std::runtime_error {
  explicit UnknownLaw(const std::string& id) : std::runtime_error("unknown law '" + id + "'") {}
};

struct LawResult {
  std::string id;
  std::string statement;
  size_t cases = 0;
  bool passed = true;
  std::string counterexample;  // failing (seed, case) plus a note
};

namespace laws {

/// Deterministic case-level randomness: every draw derives from
/// (law id, suite seed, case index) alone.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {  // splitmix64
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  size_t below(size_t n) { return n ? static_cast<size_t>(next() % n) : 0; }
  long long range(long long lo, long long hi) {
    return lo + static_cast<long long>(below(static_cast<size_t>(hi - lo + 1)));
  }
  bool flip() { return below(2) == 0; }

  /// Rational in [0,1] with denominator at most 12.
  Rational unit_weight() {
    long long den = range(1, 12);
    return Rational(range(0, den), den);
  }
  /// Rational in (0,1].
  Rational positive_unit() {
    long long den = range(1, 12);
    return Rational(range(1, den), den);
  }
  /// Nonnegative rational up to 3.
  Rational nonneg() {
    long long den = range(1, 12);
    return Rational(range(0, 3 * den), den);
  }

 private:
  uint64_t state_;
};

inline uint64_t mix_seed(const std::string& id, uint64_t seed, size_t case_idx) {
  uint64_t h = 1469598103934665603ull;
  for (char c : id) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  h ^= seed + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= (case_idx + 1) * 0xd1b54a32d192ed03ull;
  return h;
}

/// Generates the random material the law checks consume: small spaces,
/// kernels of the three kinds, predicates, weight vectors.
class Gen {
 public:
  explicit Gen(uint64_t seed) : rng(seed) {}

  Rng rng;

  SpacePtr space(size_t max_vars = 2, size_t max_dom = 4) {
    static const char* names[] = {"x", "y", "z", "w"};
    size_t nvars = 1 + rng.below(max_vars);
    std::vector<std::pair<std::string, Domain>> decls;
    for (size_t v = 0; v < nvars; ++v) {
      if (rng.below(4) == 0)
        decls.emplace_back(names[v], Domain::boolean());
      else
        decls.emplace_back(names[v], Domain::int_range(0, rng.range(1, static_cast<long long>(max_dom) - 1)));
    }
    return make_space(std::move(decls));
  }

  /// Exact row sums 1 by construction (random positive splits).
  Kernel dist_kernel(const SpacePtr& sp, bool full_support = false) {
    size_t n = sp->state_count();
    Kernel k(sp, KernelKind::prfun);
    for (StateId s = 0; s < n; ++s) {
      size_t support = full_support ? n : 1 + rng.below(std::min<size_t>(n, 4));
      std::vector<StateId> finals = pick_distinct(n, support);
      std::vector<Rational> weights(support);
      Rational total = 0;
      for (auto& w : weights) {
        w = Rational(rng.range(1, 12));
        total += w;
      }
      for (size_t i = 0; i < support; ++i) k.set(s, finals[i], weights[i] / total);
    }
    return k;
  }

  /// Row sums in (0,1].
  Kernel subdist_kernel(const SpacePtr& sp) {
    Kernel d = dist_kernel(sp);
    Kernel out(sp, KernelKind::prfun);
    for (StateId s = 0; s < d.states(); ++s) {
      Rational f = rng.positive_unit();
      for (const auto& [t, v] : d.row(s).w) out.set(s, t, v * f);
    }
    return out;
  }

  /// Nonnegative weights, possibly above 1.
  Kernel rvfun_kernel(const SpacePtr& sp, bool full_support = false) {
    size_t n = sp->state_count();
    Kernel k(sp, KernelKind::rvfun);
    for (StateId s = 0; s < n; ++s) {
      size_t support = full_support ? n : rng.below(std::min<size_t>(n, 5));
      std::vector<StateId> finals = pick_distinct(n, support);
      for (StateId t : finals) {
        Rational v = full_support ? rng.nonneg() + Rational(1, 12) : rng.nonneg();
        if (v != 0) k.set(s, t, v);
      }
    }
    return k;
  }

  /// Random predicate AST; optionally over both unprimed and primed vars.
  Pred predicate(const SpacePtr& sp, bool allow_primed, size_t depth = 2) {
    if (depth == 0 || rng.below(3) == 0) return atom(sp, allow_primed);
    switch (rng.below(3)) {
      case 0: return pred::conj(predicate(sp, allow_primed, depth - 1), predicate(sp, allow_primed, depth - 1));
      case 1: return pred::disj(predicate(sp, allow_primed, depth - 1), predicate(sp, allow_primed, depth - 1));
      default: return pred::negate(predicate(sp, allow_primed, depth - 1));
    }
  }

  /// Random arithmetic expression over state variables.
  RelExpr arith(const SpacePtr& sp, bool allow_primed, size_t depth = 2) {
    if (depth == 0 || rng.below(3) == 0) {
      if (rng.flip()) return rexpr::constant(rng.range(-2, 4));
      return var_ref(sp, allow_primed);
    }
    RelExpr a = arith(sp, allow_primed, depth - 1);
    RelExpr b = arith(sp, allow_primed, depth - 1);
    switch (rng.below(3)) {
      case 0: return rexpr::add(a, b);
      case 1: return rexpr::sub(a, b);
      default: return rexpr::mul(a, b);
    }
  }

  /// Per-initial-state unit weights.
  std::vector<Rational> weights(const SpacePtr& sp) {
    std::vector<Rational> w(sp->state_count());
    for (auto& x : w) x = rng.unit_weight();
    return w;
  }

  RelExpr var_ref(const SpacePtr& sp, bool allow_primed) {
    size_t v = rng.below(sp->var_count());
    bool primed = allow_primed && rng.flip();
    return rexpr::var_by_index(v, primed);
  }

  std::vector<StateId> pick_distinct(size_t n, size_t count) {
    std::vector<StateId> all(n);
    for (size_t i = 0; i < n; ++i) all[i] = static_cast<StateId>(i);
    for (size_t i = 0; i < count && i + 1 < n; ++i) {
      size_t j = i + rng.below(n - i);
      std::swap(all[i], all[j]);
    }
    all.resize(std::min(count, n));
    return all;
  }

 private:
  Pred atom(const SpacePtr& sp, bool allow_primed) {
    switch (rng.below(5)) {
      case 0: return pred::constant(rng.flip());
      case 1: {
        std::vector<Rational> elems;
        size_t k = 1 + rng.below(3);
        for (size_t i = 0; i < k; ++i) elems.push_back(Rational(rng.range(0, 3)));
        return pred::in_set(var_ref(sp, allow_primed), std::move(elems));
      }
      default: {
        detail::CmpOp ops[] = {detail::CmpOp::eq, detail::CmpOp::ne, detail::CmpOp::lt,
                               detail::CmpOp::le, detail::CmpOp::gt, detail::CmpOp::ge};
        RelExpr lhs = var_ref(sp, allow_primed);
        RelExpr rhs = rng.flip() ? rexpr::constant(rng.range(0, 3)) : var_ref(sp, allow_primed);
        return pred::cmp(ops[rng.below(6)], lhs, rhs);
      }
    }
  }
};

struct Violation {
  std::string note;
};

inline void demand(bool ok, const std::string& note) {
  if (!ok) throw Violation{note};
}

inline void demand_equal(const Kernel& a, const Kernel& b, const std::string& note) {
  demand(kernels_equal(a, b), note);
}

// Enumerates evaluation of e over all state pairs.
template <typename F>
void each_pair(const SpacePtr& sp, F&& f) {
  std::vector<long long> ini, fin;
  for (StateId s = 0; s < sp->state_count(); ++s) {
    sp->decode(s, ini);
    for (StateId t = 0; t < sp->state_count(); ++t) {
      sp->decode(t, fin);
      f(ini, fin);
    }
  }
}

struct Entry {
  std::string id;
  std::string statement;
  std::function<void(Gen&)> check;
};

inline const std::vector<Entry>& catalog();

/// A variable with a random nonempty subset of its domain.
inline std::pair<std::string, std::vector<long long>> pick_subset(Gen& g, const SpacePtr& sp) {
  size_t v = g.rng.below(sp->var_count());
  const Domain& d = sp->domain(v);
  size_t count = 1 + g.rng.below(d.size());
  std::vector<long long> values;
  for (size_t i = 0; i < d.size(); ++i) values.push_back(d.value_at(i));
  for (size_t i = 0; i + 1 < values.size(); ++i) {
    size_t j = i + g.rng.below(values.size() - i);
    std::swap(values[i], values[j]);
  }
  values.resize(count);
  std::sort(values.begin(), values.end());
  return {sp->var_name(v), std::move(values)};
}

}  // namespace laws

/// Runs one law for `cases` seeded cases; exact equality throughout.
inline LawResult check_law(const std::string& id, size_t cases, uint64_t seed) {
  const laws::Entry* entry = nullptr;
  for (const auto& e : laws::catalog())
    if (e.id == id) entry = &e;
  if (!entry) throw UnknownLaw(id);
  LawResult res{entry->id, entry->statement, cases, true, ""};
  for (size_t c = 0; c < cases; ++c) {
    laws::Gen gen(laws::mix_seed(id, seed, c));
    try {
      entry->check(gen);
    } catch (const laws::Violation& v) {
      res.passed = false;
      res.counterexample = "case " + std::to_string(c) + " (seed " + std::to_string(seed) + "): " + v.note;
      break;
    }
  }
  return res;
}

inline std::vector<LawResult> check_all_laws(size_t cases, uint64_t seed) {
  std::vector<LawResult> out;
  for (const auto& e : laws::catalog()) out.push_back(check_law(e.id, cases, seed));
  return out;
}

inline std::vector<std::string> law_ids() {
  std::vector<std::string> out;
  for (const auto& e : laws::catalog()) out.push_back(e.id);
  return out;
}

namespace laws {

inline const std::vector<Entry>& catalog() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> es;
    auto law = [&](std::string id, std::string stmt, std::function<void(Gen&)> fn) {
      es.push_back({std::move(id), std::move(stmt), std::move(fn)});
    };

    // ----- Iverson bracket laws -----
    law("ib_false", "[false] = 0", [](Gen& g) {
      auto sp = g.space();
      each_pair(sp, [&](auto& i, auto& f) {
        demand(eval_pair(rexpr::iverson(pred::false_()), *sp, i, f) == 0, "[false] != 0");
      });
    });
    law("ib_true", "[true] = 1", [](Gen& g) {
      auto sp = g.space();
      each_pair(sp, [&](auto& i, auto& f) {
        demand(eval_pair(rexpr::iverson(pred::true_()), *sp, i, f) == 1, "[true] != 1");
      });
    });
    law("ib_probabilistic", "0 <= [P] <= 1", [](Gen& g) {
      auto sp = g.space();
      RelExpr b = rexpr::iverson(g.predicate(sp, true));
      each_pair(sp, [&](auto& i, auto& f) {
        Rational v = eval_pair(b, *sp, i, f);
        demand(v == 0 || v == 1, "bracket outside {0,1}");
      });
    });
    law("ib_monotone", "P => Q implies [Q] >= [P]", [](Gen& g) {
      auto sp = g.space();
      Pred q = g.predicate(sp, true);
      Pred p = pred::conj(q, g.predicate(sp, true));  // p implies q
      each_pair(sp, [&](auto& i, auto& f) {
        demand(eval_pair(rexpr::iverson(pred::negate(p)), *sp, i, f) == 1 ||
                   eval_pair(rexpr::iverson(q), *sp, i, f) == 1,
               "monotonicity broken");
        demand(eval_pair(rexpr::iverson(q), *sp, i, f) >= eval_pair(rexpr::iverson(p), *sp, i, f),
               "[Q] < [P]");
      });
    });
    law("ib_neg", "[!P] = 1 - [P]", [](Gen& g) {
      auto sp = g.space();
      Pred p = g.predicate(sp, true);
      RelExpr lhs = rexpr::iverson(pred::negate(p));
      RelExpr rw = iverson_rewrite(lhs);
      each_pair(sp, [&](auto& i, auto& f) {
        Rational expect = Rational(1) - eval_pair(rexpr::iverson(p), *sp, i, f);
        demand(eval_pair(lhs, *sp, i, f) == expect, "negation law");
        demand(eval_pair(rw, *sp, i, f) == expect, "rewrite changed meaning");
      });
    });
    law("ib_conj", "[P && Q] = [P]*[Q]", [](Gen& g) {
      auto sp = g.space();
      Pred p = g.predicate(sp, true), q = g.predicate(sp, true);
      RelExpr lhs = rexpr::iverson(pred::conj(p, q));
      RelExpr rw = iverson_rewrite(lhs);
      each_pair(sp, [&](auto& i, auto& f) {
        Rational expect =
            eval_pair(rexpr::iverson(p), *sp, i, f) * eval_pair(rexpr::iverson(q), *sp, i, f);
        demand(eval_pair(lhs, *sp, i, f) == expect, "conjunction law");
        demand(eval_pair(rw, *sp, i, f) == expect, "rewrite changed meaning");
      });
    });
    law("ib_disj", "[P || Q] = [P]+[Q]-[P]*[Q]", [](Gen& g) {
      auto sp = g.space();
      Pred p = g.predicate(sp, true), q = g.predicate(sp, true);
      RelExpr lhs = rexpr::iverson(pred::disj(p, q));
      RelExpr rw = iverson_rewrite(lhs);
      each_pair(sp, [&](auto& i, auto& f) {
        Rational a = eval_pair(rexpr::iverson(p), *sp, i, f);
        Rational b = eval_pair(rexpr::iverson(q), *sp, i, f);
        demand(eval_pair(lhs, *sp, i, f) == a + b - a * b, "disjunction law");
        demand(eval_pair(rw, *sp, i, f) == a + b - a * b, "rewrite changed meaning");
      });
    });
    law("ib_inter", "[e in A∩B] = [e in A]*[e in B]", [](Gen& g) {
      auto sp = g.space();
      RelExpr e = g.var_ref(sp, true);
      std::vector<Rational> a, b, both;
      for (long long v = 0; v <= 4; ++v) {
        bool in_a = g.rng.flip(), in_b = g.rng.flip();
        if (in_a) a.push_back(Rational(v));
        if (in_b) b.push_back(Rational(v));
        if (in_a && in_b) both.push_back(Rational(v));
      }
      each_pair(sp, [&](auto& i, auto& f) {
        Rational lhs = eval_pair(rexpr::iverson(pred::in_set(e, both)), *sp, i, f);
        Rational rhs = eval_pair(rexpr::iverson(pred::in_set(e, a)), *sp, i, f) *
                       eval_pair(rexpr::iverson(pred::in_set(e, b)), *sp, i, f);
        demand(lhs == rhs, "intersection law");
      });
    });
    law("ib_plus", "[e in A]+[e in B] = [e in A∩B]+[e in A∪B]", [](Gen& g) {
      auto sp = g.space();
      RelExpr e = g.var_ref(sp, true);
      std::vector<Rational> a, b, inter, uni;
      for (long long v = 0; v <= 4; ++v) {
        bool in_a = g.rng.flip(), in_b = g.rng.flip();
        if (in_a) a.push_back(Rational(v));
        if (in_b) b.push_back(Rational(v));
        if (in_a && in_b) inter.push_back(Rational(v));
        if (in_a || in_b) uni.push_back(Rational(v));
      }
      each_pair(sp, [&](auto& i, auto& f) {
        Rational lhs = eval_pair(rexpr::iverson(pred::in_set(e, a)), *sp, i, f) +
                       eval_pair(rexpr::iverson(pred::in_set(e, b)), *sp, i, f);
        Rational rhs = eval_pair(rexpr::iverson(pred::in_set(e, inter)), *sp, i, f) +
                       eval_pair(rexpr::iverson(pred::in_set(e, uni)), *sp, i, f);
        demand(lhs == rhs, "inclusion-exclusion law");
      });
    });
    law("ib_max", "max(x,y) = x*[x>y] + y*[x<=y]", [](Gen& g) {
      auto sp = g.space();
      RelExpr x = g.arith(sp, true), y = g.arith(sp, true);
      RelExpr m = rexpr::max(x, y);
      RelExpr rw = iverson_rewrite(m);
      each_pair(sp, [&](auto& i, auto& f) {
        Rational a = eval_pair(x, *sp, i, f), b = eval_pair(y, *sp, i, f);
        Rational expect = a <= b ? b : a;
        demand(eval_pair(m, *sp, i, f) == expect, "max mismatch");
        demand(eval_pair(rw, *sp, i, f) == expect, "max rewrite changed meaning");
      });
    });
    law("ib_min", "min(x,y) = x*[x<=y] + y*[x>y]", [](Gen& g) {
      auto sp = g.space();
      RelExpr x = g.arith(sp, true), y = g.arith(sp, true);
      RelExpr m = rexpr::min(x, y);
      RelExpr rw = iverson_rewrite(m);
      each_pair(sp, [&](auto& i, auto& f) {
        Rational a = eval_pair(x, *sp, i, f), b = eval_pair(y, *sp, i, f);
        Rational expect = a <= b ? a : b;
        demand(eval_pair(m, *sp, i, f) == expect, "min mismatch");
        demand(eval_pair(rw, *sp, i, f) == expect, "min rewrite changed meaning");
      });
    });
    law("ib_summation", "sum over {P} of f = sum of f*[P]", [](Gen& g) {
      auto sp = g.space();
      RelExpr f = g.arith(sp, true);
      Pred p = g.predicate(sp, true);
      Rational filtered = 0, weighted = 0;
      RelExpr fp = rexpr::mul(f, rexpr::iverson(p));
      each_pair(sp, [&](auto& i, auto& fi) {
        if (eval_pair(p, *sp, i, fi)) filtered += eval_pair(f, *sp, i, fi);
        weighted += eval_pair(fp, *sp, i, fi);
      });
      demand(filtered == weighted, "summation law");
    });

    // ----- top and bottom -----
    law("top_bot", "0 <= P <= 1; P*0 = 0; P*1 = P; P+0 = P; P-0 = P", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.dist_kernel(sp);
      demand(kernel_le(Kernel::zero(sp), p), "P below bottom");
      demand(kernel_le(p, Kernel::top(sp)), "P above top");
      demand_equal(pointwise_product(p, Kernel::zero(sp)), Kernel::zero(sp).as_rvfun(), "P*0 != 0");
      demand_equal(pointwise_product(p, Kernel::top(sp)), p.as_rvfun(), "P*1 != P");
      demand_equal(add_kernels(p, Kernel::zero(sp)), p.as_rvfun(), "P+0 != P");
      demand_equal(add_kernels(p, Kernel::zero(sp), Rational(1), Rational(-1)), p.as_rvfun(),
                   "P-0 != P");
    });

    // ----- skip and assignment -----
    law("pskip_id", "skip = (x := x)", [](Gen& g) {
      auto sp = g.space();
      size_t v = g.rng.below(sp->var_count());
      demand_equal(sem_skip(sp), sem_assign(sp, sp->var_name(v), rexpr::var_by_index(v, false)),
                   "skip != x := x");
    });
    law("pskip_final_dist", "isfinaldist(skip)", [](Gen& g) {
      auto sp = g.space();
      demand(classify(sem_skip(sp)).is_final_dist, "skip not a distribution");
    });
    law("passign_final_dist", "isfinaldist(x := e)", [](Gen& g) {
      auto sp = g.space();
      size_t v = g.rng.below(sp->var_count());
      const Domain& d = sp->domain(v);
      long long val = d.value_at(g.rng.below(d.size()));
      Kernel k = sem_assign(sp, sp->var_name(v), rexpr::constant(val));
      demand(classify(k).is_final_dist, "assignment not a distribution");
    });

    // ----- probabilistic choice -----
    law("pchoice_final_dist", "dist P, dist Q => dist (P pc{w} Q)", [](Gen& g) {
      auto sp = g.space();
      Kernel k = sem_pchoice_weights(g.weights(sp), g.dist_kernel(sp), g.dist_kernel(sp));
      demand(classify(k).is_final_dist, "choice lost distribution");
    });
    law("pchoice_commute", "(P pc{w} Q) = (Q pc{1-w} P)", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.dist_kernel(sp), q = g.dist_kernel(sp);
      auto w = g.weights(sp);
      std::vector<Rational> cw(w.size());
      for (size_t i = 0; i < w.size(); ++i) cw[i] = Rational(1) - w[i];
      demand_equal(sem_pchoice_weights(w, p, q), sem_pchoice_weights(cw, q, p), "quasi-commutativity");
    });
    law("pchoice_zero", "(P pc{0} Q) = Q", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.dist_kernel(sp), q = g.dist_kernel(sp);
      demand_equal(sem_pchoice(Rational(0), p, q), q, "zero weight");
    });
    law("pchoice_one", "(P pc{1} Q) = P", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.dist_kernel(sp), q = g.dist_kernel(sp);
      demand_equal(sem_pchoice(Rational(1), p, q), p, "unit weight");
    });
    law("pchoice_quasi_assoc",
        "(1-w1)(1-w2) = 1-r2 and w1 = r1*r2 imply (P pc{w1} (Q pc{w2} R)) = ((P pc{r1} Q) pc{r2} R)",
        [](Gen& g) {
          auto sp = g.space();
          Kernel p = g.dist_kernel(sp), q = g.dist_kernel(sp), r = g.dist_kernel(sp);
          size_t n = sp->state_count();
          std::vector<Rational> w1(n), w2(n), r1(n), r2(n);
          for (size_t i = 0; i < n; ++i) {
            w1[i] = g.rng.unit_weight();
            w2[i] = g.rng.unit_weight();
            r2[i] = Rational(1) - (Rational(1) - w1[i]) * (Rational(1) - w2[i]);
            r1[i] = r2[i] == 0 ? g.rng.unit_weight() : w1[i] / r2[i];
          }
          Kernel lhs = sem_pchoice_weights(w1, p, sem_pchoice_weights(w2, q, r));
          Kernel rhs = sem_pchoice_weights(r2, sem_pchoice_weights(r1, p, q), r);
          demand_equal(lhs, rhs, "quasi-associativity");
        });

    // ----- conditional choice -----
    law("cchoice_final_dist", "dist P, dist Q => dist (if b then P else Q)", [](Gen& g) {
      auto sp = g.space();
      Kernel k = sem_cchoice(g.predicate(sp, false), g.dist_kernel(sp), g.dist_kernel(sp));
      demand(classify(k).is_final_dist, "conditional lost distribution");
    });
    law("cchoice_id", "(if b then P else P) = P", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.dist_kernel(sp);
      demand_equal(sem_cchoice(g.predicate(sp, false), p, p), p, "conditional identity");
    });
    law("cchoice_pchoice", "(if b then P else Q) = (P pc{[b]} Q)", [](Gen& g) {
      auto sp = g.space();
      Pred b = g.predicate(sp, false);
      Kernel p = g.dist_kernel(sp), q = g.dist_kernel(sp);
      demand_equal(sem_cchoice(b, p, q), sem_pchoice(rexpr::iverson(b), p, q),
                   "conditional as weighted choice");
    });
    law("cchoice_mono", "P1<=P2, Q1<=Q2 => cchoice monotone", [](Gen& g) {
      auto sp = g.space();
      Pred b = g.predicate(sp, false);
      Kernel p2 = g.dist_kernel(sp), q2 = g.dist_kernel(sp);
      Kernel p1 = scale_kernel(p2, g.rng.unit_weight()).as_prfun();
      Kernel q1 = scale_kernel(q2, g.rng.unit_weight()).as_prfun();
      demand(kernel_le(sem_cchoice(b, p1, q1), sem_cchoice(b, p2, q2)), "conditional monotonicity");
    });

    // ----- sequential composition -----
    law("pseq_final_dist", "dist P, dist Q => dist (P ; Q)", [](Gen& g) {
      auto sp = g.space();
      demand(classify(sem_seq(g.dist_kernel(sp), g.dist_kernel(sp))).is_final_dist,
             "sequence lost distribution");
    });
    law("pseq_left_zero", "0 ; P = 0", [](Gen& g) {
      auto sp = g.space();
      demand_equal(sem_seq(Kernel::zero(sp), g.dist_kernel(sp)), Kernel::zero(sp), "left zero");
    });
    law("pseq_right_zero", "P ; 0 = 0", [](Gen& g) {
      auto sp = g.space();
      demand_equal(sem_seq(g.dist_kernel(sp), Kernel::zero(sp)), Kernel::zero(sp), "right zero");
    });
    law("pseq_left_unit", "skip ; P = P", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.subdist_kernel(sp);
      demand_equal(sem_seq(sem_skip(sp), p), p, "left unit");
    });
    law("pseq_right_unit", "P ; skip = P", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.subdist_kernel(sp);
      demand_equal(sem_seq(p, sem_skip(sp)), p, "right unit");
    });
    law("pseq_one", "dist P => P ; 1 = 1", [](Gen& g) {
      auto sp = g.space();
      demand_equal(sem_seq(g.dist_kernel(sp), Kernel::top(sp)), Kernel::top(sp), "sequence with top");
    });
    law("pseq_mono", "P1<=P2, Q1<=Q2 => (P1;Q1) <= (P2;Q2)", [](Gen& g) {
      auto sp = g.space();
      Kernel p2 = g.dist_kernel(sp), q2 = g.dist_kernel(sp);
      Kernel p1 = scale_kernel(p2, g.rng.unit_weight()).as_prfun();
      Kernel q1 = scale_kernel(q2, g.rng.unit_weight()).as_prfun();
      demand(kernel_le(sem_seq(p1, q1), sem_seq(p2, q2)), "sequence monotonicity");
    });
    law("pseq_assoc", "dist P,Q,R => P;(Q;R) = (P;Q);R", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.dist_kernel(sp), q = g.dist_kernel(sp), r = g.dist_kernel(sp);
      demand_equal(sem_seq(p, sem_seq(q, r)), sem_seq(sem_seq(p, q), r), "associativity");
    });
    law("pseq_assoc_subdist", "subdist P,Q,R => P;(Q;R) = (P;Q);R", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.subdist_kernel(sp), q = g.subdist_kernel(sp), r = g.subdist_kernel(sp);
      demand_equal(sem_seq(p, sem_seq(q, r)), sem_seq(sem_seq(p, q), r), "associativity (subdist)");
    });
    law("pseq_dist_cchoice", "subdist P => P;(b<|Q|>R) = P;([b]*Q) + P;([!b]*R)", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.subdist_kernel(sp), q = g.dist_kernel(sp), r = g.dist_kernel(sp);
      Pred b = g.predicate(sp, true);
      Kernel lhs = sem_seq(p, cchoice_rel(b, q, r));
      Kernel rhs = add_kernels(sem_seq(p, mask_kernel(q, b)), sem_seq(p, mask_kernel(r, pred::negate(b))));
      demand_equal(lhs.as_rvfun(), rhs, "distribution through conditional");
    });
    law("pseq_ibracket", "[r];[t] at (s,s') = clamp(sum over v0 of [r[v0/v'] && t[v0/v]])", [](Gen& g) {
      auto sp = g.space();
      Pred r = g.predicate(sp, true), t = g.predicate(sp, true);
      Kernel lhs = sem_seq(clamp_kernel(tabulate(sp, rexpr::iverson(r))),
                           clamp_kernel(tabulate(sp, rexpr::iverson(t))));
      size_t n = sp->state_count();
      std::vector<long long> si, sv, sf;
      for (StateId s = 0; s < n; ++s) {
        sp->decode(s, si);
        for (StateId f = 0; f < n; ++f) {
          sp->decode(f, sf);
          Rational acc = 0;
          for (StateId v0 = 0; v0 < n; ++v0) {
            sp->decode(v0, sv);
            if (eval_pair(r, *sp, si, sv) && eval_pair(t, *sp, sv, sf)) acc += 1;
          }
          if (acc > 1) acc = 1;  // conversion back to the unit interval
          demand(lhs.at(s, f) == acc, "bracket sequence law at " + sp->state_name(s));
        }
      }
    });
    law("pseq_ibracket_contradictory", "c1 != c2 => [x'=c1];[x=c2] = 0", [](Gen& g) {
      auto sp = g.space();
      size_t v = g.rng.below(sp->var_count());
      const Domain& d = sp->domain(v);
      if (d.size() < 2) return;
      long long c1 = d.value_at(0), c2 = d.value_at(1);
      Kernel lhs = sem_seq(
          clamp_kernel(tabulate(sp, rexpr::iverson(pred::eq(rexpr::var_by_index(v, true), rexpr::constant(c1))))),
          clamp_kernel(tabulate(sp, rexpr::iverson(pred::eq(rexpr::var_by_index(v, false), rexpr::constant(c2))))));
      demand_equal(lhs, Kernel::zero(sp), "contradictory intermediate state");
    });
    law("pseq_ibracket_agree", "[x=c0 && x'=c1];[x=c1 && x'=c2] = [x=c0 && x'=c2] (one variable)",
        [](Gen& g) {
          auto sp = make_space({{"x", Domain::int_range(0, 3)}});
          long long c0 = g.rng.range(0, 3), c1 = g.rng.range(0, 3), c2 = g.rng.range(0, 3);
          auto point = [&](long long a, long long b) {
            return clamp_kernel(tabulate(
                sp, rexpr::iverson(pred::conj(pred::eq(rexpr::var_by_index(0, false), rexpr::constant(a)),
                                              pred::eq(rexpr::var_by_index(0, true), rexpr::constant(b))))));
          };
          demand_equal(sem_seq(point(c0, c1), point(c1, c2)), point(c0, c2), "one-point chaining");
          // final state unspecified on the right
          Kernel rt = clamp_kernel(
              tabulate(sp, rexpr::iverson(pred::eq(rexpr::var_by_index(0, false), rexpr::constant(c1)))));
          Kernel expect = clamp_kernel(
              tabulate(sp, rexpr::iverson(pred::eq(rexpr::var_by_index(0, false), rexpr::constant(c0)))));
          demand_equal(sem_seq(point(c0, c1), rt), expect, "one-point with free final state");
        });

    // ----- uniform distributions -----
    law("uniform_emptyset", "uniform(x, {}) = 0", [](Gen& g) {
      auto sp = g.space();
      demand_equal(sem_uniform(sp, sp->var_name(0), {}, true), Kernel::zero(sp), "empty uniform");
    });
    law("uniform_prob", "isprob(uniform(x, A))", [](Gen& g) {
      auto sp = g.space();
      auto [var, values] = pick_subset(g, sp);
      demand(classify(sem_uniform(sp, var, values)).is_prob, "uniform not probabilistic");
    });
    law("uniform_final_dist", "A nonempty => isfinaldist(uniform(x, A))", [](Gen& g) {
      auto sp = g.space();
      auto [var, values] = pick_subset(g, sp);
      demand(classify(sem_uniform(sp, var, values)).is_final_dist, "uniform not a distribution");
    });
    law("uniform_uniform", "uniform(x,A) ; [x=v] = 1/|A| for v in A", [](Gen& g) {
      auto sp = g.space();
      auto [var, values] = pick_subset(g, sp);
      Kernel u = sem_uniform(sp, var, values);
      size_t v_idx = sp->var_index(var);
      for (long long v : values) {
        Kernel probe = clamp_kernel(
            tabulate(sp, rexpr::iverson(pred::eq(rexpr::var_by_index(v_idx, false), rexpr::constant(v)))));
        demand_equal(sem_seq(u, probe),
                     Kernel::constant(sp, Rational(1, static_cast<long long>(values.size())),
                                      KernelKind::prfun),
                     "share of " + std::to_string(v));
      }
    });
    law("uniform_form2", "uniform(x,A) = [union of x:=v] / card(A)", [](Gen& g) {
      auto sp = g.space();
      auto [var, values] = pick_subset(g, sp);
      size_t v_idx = sp->var_index(var);
      Kernel direct = sem_uniform(sp, var, values);
      Kernel built(sp, KernelKind::prfun);
      Rational share(1, static_cast<long long>(values.size()));
      for (StateId s = 0; s < sp->state_count(); ++s)
        for (long long v : values) built.set(s, sp->with_value(s, v_idx, v), share);
      demand_equal(direct, built, "second uniform form");
    });
    law("uniform_pseq", "uniform(x,A) ; P = (sum over v in A of P[v/x]) / card(A)", [](Gen& g) {
      auto sp = g.space();
      auto [var, values] = pick_subset(g, sp);
      size_t v_idx = sp->var_index(var);
      Kernel p = g.dist_kernel(sp);
      Kernel lhs = sem_seq(sem_uniform(sp, var, values), p);
      Kernel rhs(sp, KernelKind::prfun);
      Rational share(1, static_cast<long long>(values.size()));
      for (StateId s = 0; s < sp->state_count(); ++s) {
        std::map<StateId, Rational> acc;
        for (long long v : values) {
          StateId shifted = sp->with_value(s, v_idx, v);
          for (const auto& [t, w] : p.row(shifted).w) acc[t] += w * share;
        }
        for (const auto& [t, w] : acc)
          if (w != 0) rhs.set(s, t, w);
      }
      demand_equal(lhs, rhs, "left one-point for uniform");
    });
    law("uniform_normal", "uniform(x,A) = normal(x, [union of x:=v])", [](Gen& g) {
      auto sp = g.space();
      auto [var, values] = pick_subset(g, sp);
      size_t v_idx = sp->var_index(var);
      // [ (x' in A) && other variables unchanged ]
      Pred others = pred::true_();
      bool first = true;
      for (size_t v = 0; v < sp->var_count(); ++v) {
        if (v == v_idx) continue;
        Pred e = pred::eq(rexpr::var_by_index(v, true), rexpr::var_by_index(v, false));
        others = first ? e : pred::conj(others, e);
        first = false;
      }
      std::vector<Rational> elems;
      for (long long v : values) elems.push_back(Rational(v));
      Pred member = pred::in_set(rexpr::var_by_index(v_idx, true), elems);
      Pred rel = first ? member : pred::conj(member, others);
      Kernel alpha = normalize_alpha(var, tabulate(sp, rexpr::iverson(rel)));
      demand_equal(alpha, sem_uniform(sp, var, values), "alphabetised normalisation");
    });

    // ----- parallel composition -----
    law("pparallel_norm_prob", "nonneg p*q => isprob(normf(p*q))", [](Gen& g) {
      auto sp = g.space();
      Kernel prod = pointwise_product(g.rvfun_kernel(sp), g.rvfun_kernel(sp));
      demand(classify(normalize_final(prod)).is_prob, "normalisation not probabilistic");
    });
    law("pparallel_dist", "final-prob p, q reaching a common state => dist (p || q)", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.dist_kernel(sp, /*full_support=*/true);
      Kernel q = g.dist_kernel(sp, /*full_support=*/true);
      demand(classify(sem_parallel(p.as_rvfun(), q.as_rvfun())).is_final_dist,
             "parallel lost distribution");
    });
    law("pparallel_contradiction_zero", "disjoint supports => p || q = 0", [](Gen& g) {
      auto sp = g.space();
      size_t n = sp->state_count();
      if (n < 2) return;
      Kernel p(sp, KernelKind::rvfun), q(sp, KernelKind::rvfun);
      for (StateId s = 0; s < n; ++s) {
        StateId ta = static_cast<StateId>(g.rng.below(n));
        StateId tb = static_cast<StateId>((ta + 1 + g.rng.below(n - 1)) % n);
        p.set(s, ta, g.rng.positive_unit());
        q.set(s, tb, g.rng.positive_unit());
      }
      demand_equal(sem_parallel(p, q), Kernel::zero(sp), "contradiction not zero");
    });
    law("pparallel_left_zero", "0 || p = 0", [](Gen& g) {
      auto sp = g.space();
      demand_equal(sem_parallel(Kernel::zero(sp, KernelKind::rvfun), g.rvfun_kernel(sp)),
                   Kernel::zero(sp), "left zero");
    });
    law("pparallel_right_zero", "p || 0 = 0", [](Gen& g) {
      auto sp = g.space();
      demand_equal(sem_parallel(g.rvfun_kernel(sp), Kernel::zero(sp, KernelKind::rvfun)),
                   Kernel::zero(sp), "right zero");
    });
    law("pparallel_left_unit", "c != 0, dist p => c || p = p", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.dist_kernel(sp);
      Kernel c = Kernel::constant(sp, g.rng.positive_unit() + Rational(1, 24), KernelKind::rvfun);
      demand_equal(sem_parallel(c, p.as_rvfun()), p, "left unit");
    });
    law("pparallel_right_unit", "c != 0, dist p => p || c = p", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.dist_kernel(sp);
      Kernel c = Kernel::constant(sp, g.rng.positive_unit(), KernelKind::rvfun);
      demand_equal(sem_parallel(p.as_rvfun(), c), p, "right unit");
    });
    law("pparallel_commute", "p || q = q || p", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.rvfun_kernel(sp), q = g.rvfun_kernel(sp);
      demand_equal(sem_parallel(p, q), sem_parallel(q, p), "commutativity");
    });
    law("pparallel_assoc2", "prfun P,Q,R => (P||Q)||R = P||(Q||R)", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.subdist_kernel(sp), q = g.subdist_kernel(sp), r = g.subdist_kernel(sp);
      Kernel lhs = sem_parallel(sem_parallel(p.as_rvfun(), q.as_rvfun()).as_rvfun(), r.as_rvfun());
      Kernel rhs = sem_parallel(p.as_rvfun(), sem_parallel(q.as_rvfun(), r.as_rvfun()).as_rvfun());
      demand_equal(lhs, rhs, "associativity");
    });
    law("pparallel_uniform", "uniform(x,A) || p groups p over final x", [](Gen& g) {
      auto sp = g.space();
      auto [var, values] = pick_subset(g, sp);
      size_t v_idx = sp->var_index(var);
      Kernel p = g.rvfun_kernel(sp, /*full_support=*/true);
      Kernel lhs = sem_parallel(sem_uniform(sp, var, values).as_rvfun(), p);
      Kernel rhs(sp, KernelKind::prfun);
      size_t n = sp->state_count();
      for (StateId s = 0; s < n; ++s) {
        for (StateId t = 0; t < n; ++t) {
          bool hit = false;
          for (long long v : values) hit = hit || sp->with_value(s, v_idx, v) == t;
          if (!hit) continue;
          Rational denom = 0;
          for (long long v : values) denom += p.at(s, sp->with_value(t, v_idx, v));
          Rational num = p.at(s, t);
          if (denom != 0 && num != 0) rhs.set(s, t, num / denom);
        }
      }
      demand_equal(lhs, rhs, "uniform conditioning");
    });
    law("normf_dist", "nonneg + reachable => isfinaldist(normf(p))", [](Gen& g) {
      auto sp = g.space();
      Kernel p = g.rvfun_kernel(sp, /*full_support=*/true);
      demand(classify(normalize_final(p)).is_final_dist, "normalisation not a distribution");
    });

    // ----- iteration laws -----
    law("iterdiff_identity", "iter(n,top) - iter(n,bot) = iterdiff(n)", [](Gen& g) {
      auto sp = g.space(2, 3);
      LoopSpec spec(sp, g.predicate(sp, false), g.dist_kernel(sp));
      Kernel top = Kernel::top(sp), bot = Kernel::zero(sp), diff = Kernel::top(sp);
      for (size_t n = 1; n <= 12; ++n) {
        top = loop_step(spec, top);
        bot = loop_step(spec, bot);
        diff = loop_step_diff(spec, diff);
        demand_equal(add_kernels(top, bot, Rational(1), Rational(-1)), diff.as_rvfun(),
                     "gap identity at n=" + std::to_string(n));
      }
    });
    law("iter_bot_ascending", "iter(n,bot) <= iter(n+1,bot)", [](Gen& g) {
      auto sp = g.space(2, 3);
      LoopSpec spec(sp, g.predicate(sp, false), g.dist_kernel(sp));
      Kernel prev = Kernel::zero(sp);
      for (size_t n = 0; n < 8; ++n) {
        Kernel next = loop_step(spec, prev);
        demand(kernel_le(prev, next), "chain not ascending at n=" + std::to_string(n));
        prev = std::move(next);
      }
    });
    law("iter_top_descending", "iter(n+1,top) <= iter(n,top)", [](Gen& g) {
      auto sp = g.space(2, 3);
      LoopSpec spec(sp, g.predicate(sp, false), g.dist_kernel(sp));
      Kernel prev = Kernel::top(sp);
      for (size_t n = 0; n < 8; ++n) {
        Kernel next = loop_step(spec, prev);
        demand(kernel_le(next, prev), "chain not descending at n=" + std::to_string(n));
        prev = std::move(next);
      }
    });
    law("lfun_mono", "X <= Y => F(X) <= F(Y)", [](Gen& g) {
      auto sp = g.space(2, 3);
      LoopSpec spec(sp, g.predicate(sp, false), g.dist_kernel(sp));
      Kernel y = g.dist_kernel(sp);
      Kernel x = scale_kernel(y, g.rng.unit_weight()).as_prfun();
      demand(kernel_le(loop_step(spec, x), loop_step(spec, y)), "loop function monotonicity");
    });
    law("pwhile_false", "while(false){P} = skip", [](Gen& g) {
      auto sp = g.space(2, 3);
      LoopSpec spec(sp, pred::false_(), g.dist_kernel(sp));
      auto [fp, rep] = kleene_lfp(spec, 8, Rational(0));
      demand(rep.converged, "no convergence");
      demand_equal(fp, sem_skip(sp), "loop under false guard");
    });
    law("pwhile_true", "while(true){P} = 0 (lfp)", [](Gen& g) {
      auto sp = g.space(2, 3);
      LoopSpec spec(sp, pred::true_(), g.dist_kernel(sp));
      auto [fp, rep] = kleene_lfp(spec, 8, Rational(1, 1024));
      demand(!rep.converged, "diverging loop reported converged");
      demand_equal(fp, Kernel::zero(sp), "lfp of the diverging loop");
    });

    return es;
  }();
  return entries;
}

}  // namespace laws
}  // namespace proburel

#endif
