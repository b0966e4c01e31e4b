#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace proburel;
using namespace proburel::test;

TEST_CASE("skip is the identity kernel and a distribution") {
  auto sp = coin_space();
  Kernel skip = sem_skip(sp);
  for (StateId s = 0; s < 2; ++s) CHECK(skip.at(s, s) == 1);
  CHECK(classify(skip).is_final_dist);
  // skip = (x := x)
  CHECK(kernels_equal(skip, sem_assign(sp, "c", rexpr::initial(*sp, "c"))));
}

TEST_CASE("assignment is a one-point distribution") {
  auto sp = coin_space();
  Kernel k = sem_assign(sp, "c", rexpr::constant(0));  // c := hd
  StateId tl = 1;
  CHECK(k.at(tl, 0) == 1);
  CHECK(k.at(tl, 1) == 0);
  CHECK(classify(k).is_final_dist);

  // m := 3 - c - p keeps p and c
  auto ms = monty_space();
  RelExpr three_minus = rexpr::sub(rexpr::sub(rexpr::constant(3), rexpr::initial(*ms, "c")),
                                   rexpr::initial(*ms, "p"));
  Kernel m = sem_assign(ms, "m", three_minus);
  StateId from = ms->encode(std::vector<long long>{0, 1, 1});
  StateId to = ms->encode(std::vector<long long>{0, 1, 2});
  CHECK(m.at(from, to) == 1);
}

TEST_CASE("assignments escaping the domain poison only the affected rows") {
  auto ms = monty_space();
  // 3 - c - p is 3 at p=c=0: out of 0..2, but only that row family is poisoned
  RelExpr three_minus = rexpr::sub(rexpr::sub(rexpr::constant(3), rexpr::initial(*ms, "c")),
                                   rexpr::initial(*ms, "p"));
  Kernel m = sem_assign(ms, "m", three_minus);
  StateId bad = ms->encode(std::vector<long long>{0, 0, 0});
  CHECK_THROWS_AS(m.at(bad, bad), OutOfDomain);
  CHECK_FALSE(m.error_rows().empty());

  // a conditional never routing mass into the poisoned rows is clean
  Pred diff = pred::ne(rexpr::initial(*ms, "c"), rexpr::initial(*ms, "p"));
  Kernel guarded = sem_cchoice(diff, m, sem_skip(ms));
  CHECK(guarded.error_rows().empty());
  CHECK(classify(guarded).is_final_dist);
}

TEST_CASE("probabilistic choice is a weighted sum") {
  auto sp = coin_space();
  Kernel P = sem_assign(sp, "c", rexpr::constant(0));
  Kernel Q = sem_assign(sp, "c", rexpr::constant(1));
  CHECK(kernels_equal(sem_pchoice(Rational(1), P, Q), P));  // w = 1
  CHECK(kernels_equal(sem_pchoice(Rational(0), P, Q), Q));  // w = 0
  CHECK(kernels_equal(sem_pchoice(half(), P, Q), cflip(sp)));
  CHECK(classify(sem_pchoice(Rational(2, 7), P, Q)).is_final_dist);

  CHECK_THROWS_AS(sem_pchoice(Rational(3, 2), P, Q), WeightOutOfRange);
}

TEST_CASE("dwta elaborates to the simplified four-entry table") {
  auto sp = dwta_space();
  // r := C ; (a := S pc{1/2} a := F)   vs   r := D ; (a := S pc{3/10} a := F)
  Kernel branch_c = sem_seq(sem_assign(sp, "r", rexpr::constant(0)),
                            sem_pchoice(half(), sem_assign(sp, "a", rexpr::constant(0)),
                                        sem_assign(sp, "a", rexpr::constant(1))));
  Kernel branch_d = sem_seq(sem_assign(sp, "r", rexpr::constant(1)),
                            sem_pchoice(Rational(3, 10), sem_assign(sp, "a", rexpr::constant(0)),
                                        sem_assign(sp, "a", rexpr::constant(1))));
  Kernel dwta = sem_pchoice(Rational(3, 5), branch_c, branch_d);

  Kernel expected(sp, KernelKind::prfun);
  for (StateId s = 0; s < sp->state_count(); ++s) {
    expected.set(s, sp->encode(std::vector<long long>{0, 0}), Rational(3, 10));
    expected.set(s, sp->encode(std::vector<long long>{0, 1}), Rational(3, 10));
    expected.set(s, sp->encode(std::vector<long long>{1, 0}), Rational(6, 50));
    expected.set(s, sp->encode(std::vector<long long>{1, 1}), Rational(14, 50));
  }
  CHECK(kernels_equal(dwta, expected));
}

TEST_CASE("conditional choice selects by the initial-state guard") {
  auto sp = coin_space();
  Kernel P = sem_assign(sp, "c", rexpr::constant(0));
  Kernel Q = sem_assign(sp, "c", rexpr::constant(1));
  CHECK(kernels_equal(sem_cchoice(pred::true_(), P, Q), P));
  CHECK(kernels_equal(sem_cchoice(pred::false_(), P, Q), Q));
  // choice between P and P is P
  Pred b = initial_is(sp, "c", 1);
  CHECK(kernels_equal(sem_cchoice(b, P, P), P));
  // cchoice(b, P, Q) = pchoice([b], P, Q)
  CHECK(kernels_equal(sem_cchoice(b, P, Q), sem_pchoice(rexpr::iverson(b), P, Q)));
}

TEST_CASE("sequential composition sums over intermediate states") {
  auto sp = coin_space();
  Kernel flip = cflip(sp);
  CHECK(kernels_equal(sem_seq(sem_skip(sp), flip), flip));  // left unit
  CHECK(kernels_equal(sem_seq(flip, sem_skip(sp)), flip));  // right unit

  // [c' = hd] ; [c = tl] cannot agree on an intermediate state
  Kernel lhs = clamp_kernel(tabulate(sp, rexpr::iverson(final_is(sp, "c", 0))));
  Kernel rhs = clamp_kernel(tabulate(sp, rexpr::iverson(initial_is(sp, "c", 1))));
  CHECK(kernels_equal(sem_seq(lhs, rhs), Kernel::zero(sp)));

  // two independent dice throws: every outcome pair has weight 1/36
  auto ds = dice_space();
  Kernel both = dice_throw(ds);
  // brute-force oracle over the 36 outcome pairs
  Kernel oracle(ds, KernelKind::prfun);
  for (StateId s = 0; s < ds->state_count(); ++s)
    for (long long a = 1; a <= 6; ++a)
      for (long long b = 1; b <= 6; ++b)
        oracle.set(s, ds->encode(std::vector<long long>{a, b}), Rational(1, 36));
  CHECK(kernels_equal(both, oracle));
  CHECK(classify(both).is_final_dist);
}

TEST_CASE("parallel composition renormalises a joint product") {
  auto sp = coin_space();
  Kernel flip = cflip(sp);
  // a nonzero constant likelihood is a unit against a distribution
  Kernel c = tabulate(sp, rexpr::constant(Rational(7, 2)));
  CHECK(kernels_equal(sem_parallel(flip.as_rvfun(), c), flip));
  CHECK(kernels_equal(sem_parallel(c, flip.as_rvfun()), flip));

  // robot localisation, first sensor reading: prior 1/3 each, likelihood
  // 3*[bel' in {0,2}] + 1 gives posterior 4/9, 1/9, 4/9
  auto rl = make_space({{"bel", Domain::int_range(0, 2)}});
  Kernel prior = sem_uniform(rl, "bel", std::vector<long long>{0, 1, 2});
  RelExpr like = rexpr::add(
      rexpr::mul(rexpr::constant(3),
                 rexpr::iverson(pred::in_set(rexpr::final(*rl, "bel"), {Rational(0), Rational(2)}))),
      rexpr::constant(1));
  Kernel posterior = sem_parallel(prior.as_rvfun(), tabulate(rl, like));
  for (StateId s = 0; s < 3; ++s) {
    CHECK(posterior.at(s, 0) == Rational(4, 9));
    CHECK(posterior.at(s, 1) == Rational(1, 9));
    CHECK(posterior.at(s, 2) == Rational(4, 9));
  }

  // contradictory evidence gives the zero row
  Kernel none = sem_parallel(flip.as_rvfun(), tabulate(sp, rexpr::constant(0)));
  CHECK(kernels_equal(none, Kernel::zero(sp)));
}

TEST_CASE("uniform choice distributes evenly and keeps other variables") {
  auto ms = monty_space();
  Kernel u = sem_uniform(ms, "p", std::vector<long long>{0, 1, 2});
  StateId from = ms->encode(std::vector<long long>{2, 1, 0});
  for (long long v = 0; v < 3; ++v)
    CHECK(u.at(from, ms->encode(std::vector<long long>{v, 1, 0})) == Rational(1, 3));
  CHECK(classify(u).is_final_dist);

  // singleton uniform = assignment
  auto sp = coin_space();
  CHECK(kernels_equal(sem_uniform(sp, "c", std::vector<long long>{0}),
                      sem_assign(sp, "c", rexpr::constant(0))));

  CHECK_THROWS_AS(sem_uniform(sp, "c", {}), EmptySet);
  CHECK(kernels_equal(sem_uniform(sp, "c", {}, /*empty_is_zero=*/true), Kernel::zero(sp)));
}

TEST_CASE("monty hall winning probabilities by library composition") {
  auto ms = monty_space();
  auto all = std::vector<long long>{0, 1, 2};
  Kernel init = sem_seq(sem_uniform(ms, "p", all), sem_uniform(ms, "c", all));
  RelExpr c = rexpr::initial(*ms, "c");
  RelExpr p = rexpr::initial(*ms, "p");
  RelExpr m = rexpr::initial(*ms, "m");
  Kernel mc = sem_pchoice(
      half(), sem_assign(ms, "m", rexpr::mod(rexpr::add(c, rexpr::constant(1)), rexpr::constant(3))),
      sem_assign(ms, "m", rexpr::mod(rexpr::add(c, rexpr::constant(2)), rexpr::constant(3))));
  Kernel mha = sem_cchoice(pred::eq(c, p),
                           mc,
                           sem_assign(ms, "m", rexpr::sub(rexpr::sub(rexpr::constant(3), c), p)));
  Kernel nc = sem_seq(sem_seq(init, mha), sem_skip(ms));
  Kernel ch = sem_seq(init, sem_seq(mha, sem_assign(ms, "c", rexpr::sub(rexpr::sub(rexpr::constant(3), c), m))));

  Pred win = pred::eq(rexpr::final(*ms, "c"), rexpr::final(*ms, "p"));
  InitialValuedResult pn = prob_of(nc, win);
  InitialValuedResult pc = prob_of(ch, win);
  for (StateId s = 0; s < ms->state_count(); ++s) {
    CHECK(pn.at(s) == Rational(1, 3));
    CHECK(pc.at(s) == Rational(2, 3));
  }
}

TEST_CASE("construct semantics preserve distributions") {
  auto sp = dice_space();
  Kernel t = dice_throw(sp);
  Kernel skip = sem_skip(sp);
  CHECK(classify(sem_pchoice(Rational(2, 5), t, skip)).is_final_dist);
  CHECK(classify(sem_cchoice(pred::ne(rexpr::initial(*sp, "d1"), rexpr::initial(*sp, "d2")), t, skip))
            .is_final_dist);
  CHECK(classify(sem_seq(t, t)).is_final_dist);
}
