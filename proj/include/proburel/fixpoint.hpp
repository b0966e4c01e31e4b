#ifndef PROBUREL_FIXPOINT_HPP
#define PROBUREL_FIXPOINT_HPP

#include <algorithm>

#include "proburel/constructs.hpp"

namespace proburel {

struct NotADistribution : std::runtime_error {
  NotADistribution() : std::runtime_error("loop body is not a final-state distribution") {}
};

/// A while loop: initial-state guard plus an elaborated body kernel.
struct LoopSpec {
  SpacePtr space;
  Pred guard;
  Kernel body;
  std::vector<bool> guard_true;

  LoopSpec(SpacePtr sp, Pred g, Kernel b)
      : space(std::move(sp)), guard(std::move(g)), body(std::move(b)) {
    if (*space != *body.space()) throw SpaceMismatch();
    guard_true = detail::guard_table(space, guard);
  }
};

/// One unfolding: row s is (body ; X) when the guard holds at s, else skip.
inline Kernel loop_step(const LoopSpec& spec, const Kernel& X) {
  Kernel out(spec.space, KernelKind::prfun);
  for (StateId s = 0; s < out.states(); ++s) {
    if (spec.guard_true[s]) {
      detail::seq_row(spec.body, s, X, out, true);
    } else {
      out.row_mut(s).w[s] = 1;
    }
  }
  return out;
}

/// Variant of the loop function with zero in place of skip; iterating it
/// from the top yields the gap between top and bottom iterations.
inline Kernel loop_step_diff(const LoopSpec& spec, const Kernel& X) {
  Kernel out(spec.space, KernelKind::prfun);
  for (StateId s = 0; s < out.states(); ++s) {
    if (spec.guard_true[s]) detail::seq_row(spec.body, s, X, out, true);
  }
  return out;
}

enum class IterStart { bot, top };

/// n-fold loop_step from the all-zero (bot) or all-one (top) kernel.
inline Kernel iterate(size_t n, const LoopSpec& spec, IterStart start) {
  Kernel X = start == IterStart::bot ? Kernel::zero(spec.space) : Kernel::top(spec.space);
  for (size_t i = 0; i < n; ++i) X = loop_step(spec, X);
  return X;
}

/// iterdiff(0) = all-ones; iterdiff(n) = <guard>(body ; iterdiff(n-1)) <> 0.
inline Kernel iterdiff(size_t n, const LoopSpec& spec) {
  Kernel D = Kernel::top(spec.space);
  for (size_t i = 0; i < n; ++i) D = loop_step_diff(spec, D);
  return D;
}

struct ConvergenceReport {
  size_t iterations_used = 0;
  Rational sup_gap;  // max over pairs of iterdiff at the final n
  bool monotone_ok = true;
  bool converged = false;
  std::optional<Rational> geometric_ratio;  // r < 1 with iterdiff(n+1) <= r*iterdiff(n)
  size_t ratio_from = 0, ratio_to = 0;      // witness range of tested steps
};

namespace detail {

/// Max weight over all pairs, skipping poisoned rows.
inline Rational sup_value(const Kernel& k) {
  Rational best = 0;
  for (StateId s = 0; s < k.states(); ++s) {
    const auto& r = k.row(s);
    if (r.err) continue;
    if (r.w.size() < k.states() && r.def > best) best = r.def;
    for (const auto& [t, v] : r.w)
      if (v > best) best = v;
  }
  return best;
}

/// Least uniform r with next <= r*prev pointwise; nullopt when prev is 0
/// somewhere next is not, or when a poisoned row interferes.
inline std::optional<Rational> uniform_ratio(const Kernel& prev, const Kernel& next) {
  size_t n = prev.states();
  Rational best = 0;
  for (StateId s = 0; s < n; ++s) {
    const auto& rp = prev.row(s);
    const auto& rn = next.row(s);
    if (rp.err || rn.err) return std::nullopt;
    bool ok = true;
    bool rest = false;
    walk_union(rp, rn, n, [&](StateId, const Rational& vp, const Rational& vn) {
      if (vp == 0) {
        if (vn != 0) ok = false;
      } else {
        Rational q = vn / vp;
        if (q > best) best = q;
      }
    }, rest);
    if (!ok) return std::nullopt;
    if (rest) {
      if (rp.def == 0) {
        if (rn.def != 0) return std::nullopt;
      } else {
        Rational q = rn.def / rp.def;
        if (q > best) best = q;
      }
    }
  }
  return best;
}

}  // namespace detail

namespace detail {

inline std::pair<Kernel, ConvergenceReport> kleene_iter(const LoopSpec& spec, size_t max_iter,
                                                        const Rational& gap_tol, IterStart start) {
  if (!classify(spec.body).is_final_dist) throw NotADistribution();
  Kernel X = start == IterStart::bot ? Kernel::zero(spec.space) : Kernel::top(spec.space);
  Kernel D = Kernel::top(spec.space);
  ConvergenceReport rep;
  for (size_t n = 1; n <= max_iter; ++n) {
    Kernel next = loop_step(spec, X);
    Kernel dnext = loop_step_diff(spec, D);
    bool mono = start == IterStart::bot ? kernel_le(X, next) : kernel_le(next, X);
    if (!mono && !next.has_error_rows() && !X.has_error_rows()) rep.monotone_ok = false;
    X = std::move(next);
    D = std::move(dnext);
    rep.iterations_used = n;
    rep.sup_gap = detail::sup_value(D);
    // iterdiff(n) bounds both the remaining successive differences and the
    // pointwise distance to the fixed point, so it alone decides.
    if (rep.sup_gap <= gap_tol) {
      rep.converged = true;
      break;
    }
  }
  return {std::move(X), std::move(rep)};
}

}  // namespace detail

/// Iterates the loop function from bottom until the sup-norm of successive
/// differences and of iterdiff fall below gap_tol, or max_iter is reached.
/// The true least fixed point dominates the returned iterate pointwise.
inline std::pair<Kernel, ConvergenceReport> kleene_lfp(const LoopSpec& spec, size_t max_iter,
                                                       const Rational& gap_tol) {
  return detail::kleene_iter(spec, max_iter, gap_tol, IterStart::bot);
}

/// Iteration from the top with the same stopping rule; the greatest fixed
/// point is dominated by the returned iterate.
inline std::pair<Kernel, ConvergenceReport> kleene_gfp(const LoopSpec& spec, size_t max_iter,
                                                       const Rational& gap_tol) {
  return detail::kleene_iter(spec, max_iter, gap_tol, IterStart::top);
}

enum class Verdict { UniqueFixedPoint, FixedPointOnly, Failed };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::UniqueFixedPoint: return "UniqueFixedPoint";
    case Verdict::FixedPointOnly: return "FixedPointOnly";
    case Verdict::Failed: return "Failed";
  }
  return "?";
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Certificate {
  Verdict verdict = Verdict::Failed;
  std::string reason;
  Kernel fp;
  ConvergenceReport report;
  std::vector<CheckResult> checks;
  std::vector<StateId> boundary_rows;  // window-edge rows excluded from checks
};

/// Certifies a candidate loop semantics. Four checks: the body is a final
/// distribution; the state space is finite (by construction, recorded);
/// iterdiff decays (pointwise antitone, and to zero under an empirically
/// uniform geometric ratio r < 1); and the candidate is an exact fixed
/// point of the loop function. All four passing with no window-boundary
/// exclusions certifies a unique fixed point; a candidate that passes only
/// the fixed-point check is reported as FixedPointOnly.
inline Certificate verify_unique_fp(const LoopSpec& spec, const Kernel& candidate, size_t N = 12,
                                    bool ratio_check = true) {
  if (*spec.space != *candidate.space()) throw SpaceMismatch();
  Certificate cert{Verdict::Failed, "", candidate, {}, {}, {}};
  std::vector<bool> boundary(spec.space->state_count(), false);
  auto note_boundary = [&](const Kernel& k) {
    for (StateId s : k.error_rows()) boundary[s] = true;
  };

  // (1) body is a distribution over final states
  Classification body_cls = classify(spec.body);
  for (StateId s : body_cls.boundary_rows) boundary[s] = true;
  cert.checks.push_back({"body_is_final_dist", body_cls.is_final_dist,
                         body_cls.is_final_dist ? "all row sums are exactly 1"
                                                : "some row sum differs from 1"});

  // (2) finiteness of the state space: holds by construction
  cert.checks.push_back({"finite_state_space", true,
                         std::to_string(spec.space->state_count()) + " states"});

  // (3) iterdiff decay
  bool antitone = true;
  bool decay_ok = false;
  if (N >= 1) {
    std::vector<Kernel> diffs;
    diffs.reserve(N + 1);
    diffs.push_back(Kernel::top(spec.space));
    for (size_t n = 1; n <= N; ++n) {
      diffs.push_back(loop_step_diff(spec, diffs.back()));
      note_boundary(diffs.back());
    }
    for (size_t n = 0; n + 1 <= N; ++n) {
      if (diffs[n].has_error_rows() || diffs[n + 1].has_error_rows()) continue;
      if (!kernel_le(diffs[n + 1], diffs[n])) antitone = false;
    }
    cert.report.iterations_used = N;
    cert.report.sup_gap = detail::sup_value(diffs.back());
    cert.report.monotone_ok = antitone;
    if (ratio_check && N >= 3) {
      // the 0 -> 1 step compares against the artificial all-one start and
      // is excluded from the ratio evidence
      std::optional<Rational> ratio;
      bool uniform = true;
      for (size_t n = 1; n + 1 <= N; ++n) {
        auto r = detail::uniform_ratio(diffs[n], diffs[n + 1]);
        if (!r) {
          uniform = false;
          break;
        }
        if (!ratio || *r > *ratio) ratio = r;
      }
      if (uniform && ratio && *ratio < 1) {
        cert.report.geometric_ratio = ratio;
        cert.report.ratio_from = 1;
        cert.report.ratio_to = N;
        decay_ok = antitone;
      }
      cert.checks.push_back(
          {"iterdiff_decay", decay_ok,
           decay_ok ? "uniform ratio " + format_rational(*cert.report.geometric_ratio) +
                          " over steps 1.." + std::to_string(N) + " (empirical, not a proof)"
                    : "no uniform geometric ratio < 1 found"});
    } else {
      decay_ok = antitone && cert.report.sup_gap == 0;
      cert.checks.push_back({"iterdiff_decay", decay_ok,
                             decay_ok ? "iterdiff reached exactly 0" : "ratio check disabled or N < 3"});
    }
  }

  // (4) exact fixed point
  Kernel stepped = loop_step(spec, candidate);
  note_boundary(stepped);
  bool fp_ok = true;
  std::string fp_detail = "loop_step(candidate) equals candidate on every row";
  size_t n_states = spec.space->state_count();
  for (StateId s = 0; s < n_states; ++s) {
    const auto& ra = stepped.row(s);
    const auto& rb = candidate.row(s);
    if (ra.err || rb.err) {
      boundary[s] = true;
      continue;
    }
    bool rest = false;
    bool eq = true;
    detail::walk_union(ra, rb, n_states, [&](StateId, const Rational& va, const Rational& vb) {
      if (va != vb) eq = false;
    }, rest);
    if (rest && ra.def != rb.def) eq = false;
    if (!eq) {
      fp_ok = false;
      fp_detail = "mismatch at initial state " + spec.space->state_name(s);
      break;
    }
  }
  cert.checks.push_back({"fixed_point", fp_ok, fp_detail});

  for (StateId s = 0; s < boundary.size(); ++s)
    if (boundary[s]) cert.boundary_rows.push_back(s);

  if (!fp_ok) {
    cert.verdict = Verdict::Failed;
    cert.reason = fp_detail;
  } else if (body_cls.is_final_dist && decay_ok && cert.boundary_rows.empty()) {
    cert.verdict = Verdict::UniqueFixedPoint;
    cert.reason = "all checks passed";
  } else {
    cert.verdict = Verdict::FixedPointOnly;
    cert.reason = !cert.boundary_rows.empty()
                      ? "fixed point exact away from the bounded time window edge (" +
                            std::to_string(cert.boundary_rows.size()) + " boundary rows)"
                      : "fixed point holds but iterdiff decay was not certified";
  }
  return cert;
}

/// Per initial state, the mass the loop semantics assigns to final states
/// where the guard no longer holds.
inline std::vector<Rational> termination_probability(const LoopSpec& spec, const Kernel& fp) {
  if (*spec.space != *fp.space()) throw SpaceMismatch();
  size_t n = fp.states();
  size_t n_false = 0;
  for (StateId t = 0; t < n; ++t)
    if (!spec.guard_true[t]) ++n_false;
  std::vector<Rational> out(n);
  for (StateId s = 0; s < n; ++s) {
    fp.surface_error(s);
    const auto& row = fp.row(s);
    Rational acc = 0;
    size_t covered = 0;
    for (const auto& [t, v] : row.w) {
      if (!spec.guard_true[t]) {
        acc += v;
        ++covered;
      }
    }
    acc += row.def * Rational(static_cast<long long>(n_false - covered));
    out[s] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forward mass propagation from one initial state. Equivalent to reading
// one row of iterate(n, bot), but costs only the reachable support, which
// makes long bounded-time-window runs cheap.

struct ForwardResult {
  std::map<StateId, Rational> absorbed;  // final distribution accumulated so far
  Rational unabsorbed;                   // mass still inside the loop
  size_t steps = 0;
  bool hit_window_edge = false;          // stopped because the body would leave a domain
  std::optional<Rational> ratio;         // observed uniform bound on unabsorbed decay
};

inline ForwardResult forward_run(const LoopSpec& spec, StateId s0, size_t max_steps) {
  ForwardResult res;
  std::map<StateId, Rational> looping;
  looping[s0] = 1;
  auto drain = [&] {
    for (auto it = looping.begin(); it != looping.end();) {
      if (!spec.guard_true[it->first]) {
        res.absorbed[it->first] += it->second;
        it = looping.erase(it);
      } else {
        ++it;
      }
    }
  };
  drain();
  Rational prev_mass = 0;
  for (const auto& [t, v] : looping) prev_mass += v;
  res.unabsorbed = prev_mass;
  bool ratio_ok = true;
  while (!looping.empty() && res.steps < max_steps) {
    for (const auto& [s, v] : looping) {
      if (spec.body.row(s).err) {
        res.hit_window_edge = true;
        break;
      }
      (void)v;
    }
    if (res.hit_window_edge) break;
    std::map<StateId, Rational> next;
    for (const auto& [s, m] : looping) {
      const auto& row = spec.body.row(s);
      if (row.def != 0)
        throw std::invalid_argument("forward run needs a finitely supported body");
      for (const auto& [t, w] : row.w) next[t] += m * w;
    }
    looping = std::move(next);
    drain();
    ++res.steps;
    Rational mass = 0;
    for (const auto& [t, v] : looping) mass += v;
    if (prev_mass > 0) {
      Rational q = mass / prev_mass;
      if (!res.ratio || q > *res.ratio) res.ratio = q;
    } else if (mass > 0) {
      ratio_ok = false;
    }
    prev_mass = mass;
    res.unabsorbed = mass;
  }
  if (!ratio_ok || (res.ratio && *res.ratio >= 1)) res.ratio.reset();
  return res;
}

}  // namespace proburel

#endif
