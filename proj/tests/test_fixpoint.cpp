#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace proburel;
using namespace proburel::test;

namespace {

LoopSpec flip_spec(const SpacePtr& sp) { return LoopSpec(sp, initial_is(sp, "c", 1), cflip(sp)); }

LoopSpec dice_spec(const SpacePtr& sp) {
  return LoopSpec(sp, pred::ne(rexpr::initial(*sp, "d1"), rexpr::initial(*sp, "d2")), dice_throw(sp));
}

// [c' = hd] as a kernel
Kernel flip_fp(const SpacePtr& sp) {
  return clamp_kernel(tabulate(sp, rexpr::iverson(final_is(sp, "c", 0))));
}

// H = [d1=d2]*[d1'=d1 && d2'=d2] + [d1!=d2]*[d1'=d2']/6
Kernel dice_fp(const SpacePtr& sp) {
  RelExpr d1 = rexpr::initial(*sp, "d1"), d2 = rexpr::initial(*sp, "d2");
  RelExpr d1p = rexpr::final(*sp, "d1"), d2p = rexpr::final(*sp, "d2");
  RelExpr h = rexpr::add(
      rexpr::mul(rexpr::iverson(pred::eq(d1, d2)), rexpr::iverson(skip_rel(sp))),
      rexpr::mul(rexpr::iverson(pred::ne(d1, d2)),
                 rexpr::div(rexpr::iverson(pred::eq(d1p, d2p)), rexpr::constant(6))));
  return clamp_kernel(tabulate(sp, h));
}

}  // namespace

TEST_CASE("loop_step unfolds one iteration") {
  auto sp = coin_space();
  LoopSpec spec = flip_spec(sp);
  StateId hd = 0, tl = 1;

  // from bottom: only the guard-false row survives as skip
  Kernel first = loop_step(spec, Kernel::zero(sp));
  CHECK(first.at(hd, hd) == 1);
  CHECK(first.at(tl, hd) == 0);
  CHECK(first.at(tl, tl) == 0);

  // the fixed point is preserved
  Kernel fp = flip_fp(sp);
  CHECK(kernels_equal(loop_step(spec, fp), fp));

  // a false guard yields skip regardless of X
  LoopSpec noloop(sp, pred::false_(), cflip(sp));
  CHECK(kernels_equal(loop_step(noloop, Kernel::top(sp)), sem_skip(sp)));
  CHECK(kernels_equal(loop_step(noloop, Kernel::zero(sp)), sem_skip(sp)));
}

TEST_CASE("iterates from bottom follow the closed form") {
  auto sp = coin_space();
  LoopSpec spec = flip_spec(sp);
  StateId hd = 0, tl = 1;

  CHECK(kernels_equal(iterate(0, spec, IterStart::bot), Kernel::zero(sp)));
  CHECK(kernels_equal(iterate(0, spec, IterStart::top), Kernel::top(sp)));

  // n = 3: [c=tl][c'=hd]*(1/2 + 1/4) + [c=hd][c'=c]
  Kernel three = iterate(3, spec, IterStart::bot);
  CHECK(three.at(tl, hd) == Rational(3, 4));
  CHECK(three.at(tl, tl) == 0);
  CHECK(three.at(hd, hd) == 1);

  // n = 2 from top: [c=tl]/2 + [c=tl][c'=hd]/2 + [c=hd][c'=c]
  Kernel two_top = iterate(2, spec, IterStart::top);
  CHECK(two_top.at(tl, hd) == Rational(1));       // 1/2 + 1/2
  CHECK(two_top.at(tl, tl) == Rational(1, 2));
  CHECK(two_top.at(hd, hd) == 1);
  CHECK(two_top.at(hd, tl) == 0);

  // partial sums 1 - 2^(1-n) at (c=tl, c'=hd)
  for (size_t n = 2; n <= 12; ++n) {
    Kernel it = iterate(n, spec, IterStart::bot);
    Rational expected = Rational(1) - pow_nat(Rational(1, 2), static_cast<unsigned long>(n - 1));
    CHECK(it.at(tl, hd) == expected);
  }
}

TEST_CASE("iteration chains are monotone for distribution bodies") {
  auto sp = coin_space();
  LoopSpec spec = flip_spec(sp);
  for (size_t n = 0; n < 8; ++n) {
    CHECK(kernel_le(iterate(n, spec, IterStart::bot), iterate(n + 1, spec, IterStart::bot)));
    CHECK(kernel_le(iterate(n + 1, spec, IterStart::top), iterate(n, spec, IterStart::top)));
    // sandwich around the certified fixed point
    CHECK(kernel_le(iterate(n, spec, IterStart::bot), flip_fp(sp)));
    CHECK(kernel_le(flip_fp(sp), iterate(n, spec, IterStart::top)));
  }
}

TEST_CASE("iterdiff captures the gap between top and bottom iterations") {
  auto sp = coin_space();
  LoopSpec spec = flip_spec(sp);
  StateId hd = 0, tl = 1;

  CHECK(kernels_equal(iterdiff(0, spec), Kernel::top(sp)));

  for (size_t n = 1; n <= 12; ++n) {
    Kernel d = iterdiff(n, spec);
    // closed form [c=tl]*(1/2)^(n-1): one unconstrained innermost throw
    Rational expected = pow_nat(Rational(1, 2), static_cast<unsigned long>(n - 1));
    for (StateId t = 0; t < 2; ++t) {
      CHECK(d.at(tl, t) == expected);
      CHECK(d.at(hd, t) == 0);
    }
    // identity with the top/bottom gap
    Kernel gap = add_kernels(iterate(n, spec, IterStart::top), iterate(n, spec, IterStart::bot),
                             Rational(1), Rational(-1));
    CHECK(kernels_equal(gap, d.as_rvfun()));
  }

  // a false guard kills the difference after one step
  LoopSpec noloop(sp, pred::false_(), cflip(sp));
  CHECK(kernels_equal(iterdiff(1, noloop), Kernel::zero(sp)));
  CHECK(kernels_equal(iterdiff(5, noloop), Kernel::zero(sp)));

  // same identity on the dice loop
  auto ds = dice_space();
  LoopSpec dspec = dice_spec(ds);
  for (size_t n = 1; n <= 4; ++n) {
    Kernel gap = add_kernels(iterate(n, dspec, IterStart::top), iterate(n, dspec, IterStart::bot),
                             Rational(1), Rational(-1));
    CHECK(kernels_equal(gap, iterdiff(n, dspec).as_rvfun()));
  }
}

TEST_CASE("kleene iteration converges within the promised bound") {
  auto sp = coin_space();
  LoopSpec spec = flip_spec(sp);
  Rational tol = pow_nat(Rational(1, 2), 20);
  auto [fp, rep] = kleene_lfp(spec, 64, tol);
  CHECK(rep.converged);
  CHECK(rep.iterations_used <= 21);
  CHECK(rep.monotone_ok);
  CHECK(rep.sup_gap <= tol);
  CHECK(sup_distance(fp, flip_fp(sp)) <= tol);
  // the returned iterate is dominated by the true least fixed point
  CHECK(kernel_le(fp, flip_fp(sp)));

  // false guard: skip after one step
  LoopSpec noloop(sp, pred::false_(), cflip(sp));
  auto [fp2, rep2] = kleene_lfp(noloop, 64, tol);
  CHECK(rep2.converged);
  CHECK(rep2.iterations_used == 1);
  CHECK(kernels_equal(fp2, sem_skip(sp)));

  // true guard over a distribution body: bottom persists, gap stays 1
  LoopSpec forever(sp, pred::true_(), cflip(sp));
  auto [fp3, rep3] = kleene_lfp(forever, 16, tol);
  CHECK_FALSE(rep3.converged);
  CHECK(kernels_equal(fp3, Kernel::zero(sp)));
  CHECK(rep3.sup_gap == 1);

  // non-distribution bodies are rejected
  LoopSpec bad(sp, pred::true_(), Kernel::zero(sp));
  CHECK_THROWS_AS(kleene_lfp(bad, 8, tol), NotADistribution);

  // gfp agrees with lfp here (unique fixed point)
  auto [gfp, grep] = kleene_gfp(spec, 64, tol);
  CHECK(grep.converged);
  CHECK(sup_distance(gfp, flip_fp(sp)) <= tol);
}

TEST_CASE("unique fixed point certificates") {
  auto sp = coin_space();
  LoopSpec spec = flip_spec(sp);
  Certificate cert = verify_unique_fp(spec, flip_fp(sp), 12, true);
  CHECK(cert.verdict == Verdict::UniqueFixedPoint);
  REQUIRE(cert.report.geometric_ratio.has_value());
  CHECK(*cert.report.geometric_ratio == Rational(1, 2));
  CHECK(cert.boundary_rows.empty());

  auto ds = dice_space();
  LoopSpec dspec = dice_spec(ds);
  Certificate dcert = verify_unique_fp(dspec, dice_fp(ds), 12, true);
  CHECK(dcert.verdict == Verdict::UniqueFixedPoint);
  REQUIRE(dcert.report.geometric_ratio.has_value());
  CHECK(*dcert.report.geometric_ratio == Rational(5, 6));

  // a wrong candidate fails the fixed-point check
  Certificate wrong = verify_unique_fp(spec, sem_skip(sp), 6, true);
  CHECK(wrong.verdict == Verdict::Failed);

  // p = 0 coin: candidate still a fixed point, but no decay certificate
  Kernel stuck = sem_assign(sp, "c", rexpr::constant(1));  // always tails
  LoopSpec never(sp, initial_is(sp, "c", 1), stuck);
  Certificate ncert = verify_unique_fp(never, flip_fp(sp), 8, true);
  CHECK(ncert.verdict == Verdict::FixedPointOnly);
}

TEST_CASE("termination probabilities from certified fixed points") {
  auto sp = coin_space();
  LoopSpec spec = flip_spec(sp);
  for (const Rational& p : termination_probability(spec, flip_fp(sp))) CHECK(p == 1);

  auto ds = dice_space();
  LoopSpec dspec = dice_spec(ds);
  for (const Rational& p : termination_probability(dspec, dice_fp(ds))) CHECK(p == 1);

  // while true: the least fixed point is zero, so termination mass is zero
  LoopSpec forever(sp, pred::true_(), cflip(sp));
  for (const Rational& p : termination_probability(forever, Kernel::zero(sp))) CHECK(p == 0);
}

TEST_CASE("forward propagation agrees with kernel iteration") {
  auto sp = coin_space();
  LoopSpec spec = flip_spec(sp);
  StateId tl = 1, hd = 0;
  for (size_t n : {1u, 3u, 7u}) {
    ForwardResult f = forward_run(spec, tl, n);
    Kernel it = iterate(n + 1, spec, IterStart::bot);
    Rational absorbed_hd = f.absorbed.count(hd) ? f.absorbed.at(hd) : Rational(0);
    CHECK(absorbed_hd == it.at(tl, hd));
    CHECK(f.unabsorbed == Rational(1) - absorbed_hd);
  }
  ForwardResult f = forward_run(spec, tl, 40);
  REQUIRE(f.ratio.has_value());
  CHECK(*f.ratio == Rational(1, 2));

  auto ds = dice_space();
  LoopSpec dspec = dice_spec(ds);
  StateId s0 = ds->encode(std::vector<long long>{1, 2});
  ForwardResult g = forward_run(dspec, s0, 10);
  Kernel it = iterate(11, dspec, IterStart::bot);
  for (const auto& [t, w] : g.absorbed) CHECK(w == it.at(s0, t));
  REQUIRE(g.ratio.has_value());
  CHECK(*g.ratio == Rational(5, 6));
}

TEST_CASE("bounded time windows degrade gracefully at the edge") {
  // dice with time, small window
  const long long tmax = 8;
  auto sp = make_space({{"d1", Domain::int_range(1, 6)},
                        {"d2", Domain::int_range(1, 6)},
                        {"t", Domain::int_range(0, tmax)}});
  std::vector<long long> faces = {1, 2, 3, 4, 5, 6};
  Kernel body = sem_seq(sem_seq(sem_uniform(sp, "d1", faces), sem_uniform(sp, "d2", faces)),
                        sem_assign(sp, "t", rexpr::add(rexpr::initial(*sp, "t"), rexpr::constant(1))));
  // the body is poisoned exactly on the t = tmax layer
  for (StateId s : body.error_rows()) CHECK(sp->value_of(s, 2) == tmax);

  LoopSpec spec(sp, pred::ne(rexpr::initial(*sp, "d1"), rexpr::initial(*sp, "d2")), body);

  // Ht = [d1=d2]*[t'=t && d1'=d1 && d2'=d2]
  //    + [d1!=d2]*[d1'=d2']*[t'>=t+1]*(5/6)^(t'-t-1)*(1/36), truncated to the window
  RelExpr d1 = rexpr::initial(*sp, "d1"), d2 = rexpr::initial(*sp, "d2");
  RelExpr t = rexpr::initial(*sp, "t"), tp = rexpr::final(*sp, "t");
  RelExpr ht = rexpr::add(
      rexpr::mul(rexpr::iverson(pred::eq(d1, d2)), rexpr::iverson(skip_rel(sp))),
      rexpr::mul(
          rexpr::mul(rexpr::iverson(pred::ne(d1, d2)),
                     rexpr::iverson(pred::eq(rexpr::final(*sp, "d1"), rexpr::final(*sp, "d2")))),
          rexpr::mul(rexpr::mul(rexpr::iverson(pred::ge(tp, rexpr::add(t, rexpr::constant(1)))),
                                rexpr::pow(rexpr::constant(Rational(5, 6)),
                                           rexpr::sub(rexpr::sub(tp, t), rexpr::constant(1)))),
                     rexpr::constant(Rational(1, 36)))));
  Kernel candidate = clamp_kernel(tabulate(sp, ht));

  size_t n_checks = 4;
  Certificate cert = verify_unique_fp(spec, candidate, n_checks, true);
  CHECK(cert.verdict == Verdict::FixedPointOnly);
  CHECK_FALSE(cert.boundary_rows.empty());
  // every excluded row sits inside the window-edge band t > tmax - N
  for (StateId s : cert.boundary_rows) CHECK(sp->value_of(s, 2) > tmax - static_cast<long long>(n_checks));

  // on rows away from the edge the candidate matches brute-force iteration
  Kernel stepped = loop_step(spec, candidate);
  for (StateId s = 0; s < sp->state_count(); ++s) {
    if (sp->value_of(s, 2) <= tmax - static_cast<long long>(n_checks)) {
      const auto& ra = stepped.row(s);
      REQUIRE_FALSE(ra.err.has_value());
      bool rest = false;
      bool eq = true;
      proburel::detail::walk_union(ra, candidate.row(s), sp->state_count(),
                                   [&](StateId, const Rational& va, const Rational& vb) {
                                     if (va != vb) eq = false;
                                   },
                                   rest);
      CHECK(eq);
    }
  }
}
