#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"

using namespace proburel;
using namespace proburel::test;

TEST_CASE("probabilities of final events") {
  auto sp = dwta_space();
  Kernel dwta(sp, KernelKind::prfun);
  for (StateId s = 0; s < sp->state_count(); ++s) {
    dwta.set(s, sp->encode(std::vector<long long>{0, 0}), Rational(3, 10));
    dwta.set(s, sp->encode(std::vector<long long>{0, 1}), Rational(3, 10));
    dwta.set(s, sp->encode(std::vector<long long>{1, 0}), Rational(6, 50));
    dwta.set(s, sp->encode(std::vector<long long>{1, 1}), Rational(14, 50));
  }
  Pred success = final_is(sp, "a", 0);
  InitialValuedResult r = prob_of(dwta, success);
  for (StateId s = 0; s < sp->state_count(); ++s) CHECK(r.at(s) == Rational(21, 50));

  // prob(b) + prob(not b) = row sum = 1 for distributions
  InitialValuedResult nr = prob_of(dwta, pred::negate(success));
  InitialValuedResult all = prob_of(dwta, pred::true_());
  for (StateId s = 0; s < sp->state_count(); ++s) {
    CHECK(r.at(s) + nr.at(s) == all.at(s));
    CHECK(all.at(s) == 1);
  }
}

TEST_CASE("expectation is linear and zero on the zero expression") {
  auto sp = dice_space();
  Kernel t = dice_throw(sp);
  InitialValuedResult zero = expect(t, rexpr::constant(0));
  for (StateId s = 0; s < sp->state_count(); ++s) CHECK(zero.at(s) == 0);

  std::mt19937_64 rng(11);
  RelExpr d1 = rexpr::final(*sp, "d1");
  RelExpr d2 = rexpr::final(*sp, "d2");
  for (int i = 0; i < 20; ++i) {
    Rational alpha(static_cast<long long>(rng() % 7) - 3, 1 + static_cast<long long>(rng() % 5));
    RelExpr combo = rexpr::add(rexpr::mul(rexpr::constant(alpha), d1), d2);
    InitialValuedResult lhs = expect(t, combo);
    InitialValuedResult e1 = expect(t, d1);
    InitialValuedResult e2 = expect(t, d2);
    for (StateId s = 0; s < sp->state_count(); ++s) CHECK(lhs.at(s) == alpha * e1.at(s) + e2.at(s));
  }

  // expected pip value of one fair die is 7/2
  InitialValuedResult e = expect(t, d1);
  for (StateId s = 0; s < sp->state_count(); ++s) CHECK(e.at(s) == Rational(7, 2));

  // initial-state expressions are rejected
  CHECK_THROWS_AS(expect(t, rexpr::initial(*sp, "d1")), TypeError);
}

TEST_CASE("distribution tables list nonzero finals in order") {
  auto sp = coin_space();
  Kernel one_point = sem_assign(sp, "c", rexpr::constant(0));
  auto table = distribution_table(one_point, State(sp, 1));
  REQUIRE(table.size() == 1);
  CHECK(table[0].final_state == 0);
  CHECK(table[0].weight == 1);

  Kernel flip = cflip(sp);
  auto t2 = distribution_table(flip, State(sp, 0));
  REQUIRE(t2.size() == 2);
  CHECK(t2[0].final_state < t2[1].final_state);
}

TEST_CASE("flip with time: expectation and residual over a bounded window") {
  const long long tmax = 64;
  auto sp = make_space({{"c", Domain::enumeration({"hd", "tl"})}, {"t", Domain::int_range(0, tmax)}});
  Kernel toss = sem_pchoice(half(), sem_assign(sp, "c", rexpr::constant(0)),
                            sem_assign(sp, "c", rexpr::constant(1)));
  Kernel body = sem_seq(toss, sem_assign(sp, "t", rexpr::add(rexpr::initial(*sp, "t"), rexpr::constant(1))));
  LoopSpec spec(sp, initial_is(sp, "c", 1), body);

  StateId start = sp->encode(std::vector<long long>{1, 0});  // c=tl, t=0
  ForwardResult f = forward_run(spec, start, 1u << 20);
  CHECK(f.hit_window_edge);
  CHECK(f.steps == static_cast<size_t>(tmax));
  REQUIRE(f.ratio.has_value());
  CHECK(*f.ratio == Rational(1, 2));
  CHECK(f.unabsorbed == pow_nat(Rational(1, 2), 64));

  // E[t'] over the window: sum k/2^k for k = 1..64 = 2 - 66/2^64
  Rational v = 0;
  for (const auto& [t, w] : f.absorbed) v += w * Rational(sp->value_of(t, 1));
  Rational closed = Rational(2) - Rational(66) * pow_nat(Rational(1, 2), 64);
  CHECK(v == closed);

  // residual bound: unabsorbed * (window max of e + geometric tail)
  RelExpr t_final = rexpr::final(*sp, "t");
  Rational max_e = max_abs_over_states(sp, t_final);
  CHECK(max_e == tmax);
  Rational residual = truncation_residual(f.unabsorbed, max_e, f.ratio, true);
  CHECK(residual == Rational(66) * pow_nat(Rational(1, 2), 64));
  // the true gap to the untruncated closed form lies within the bound
  CHECK(Rational(2) - v <= residual);
}
