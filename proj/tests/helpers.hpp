#ifndef PROBUREL_TEST_HELPERS_HPP
#define PROBUREL_TEST_HELPERS_HPP

#include "proburel/query.hpp"

namespace proburel::test {

inline SpacePtr coin_space() { return make_space({{"c", Domain::enumeration({"hd", "tl"})}}); }

inline SpacePtr dice_space() {
  return make_space({{"d1", Domain::int_range(1, 6)}, {"d2", Domain::int_range(1, 6)}});
}

inline SpacePtr monty_space() {
  return make_space({{"p", Domain::int_range(0, 2)},
                     {"c", Domain::int_range(0, 2)},
                     {"m", Domain::int_range(0, 2)}});
}

inline SpacePtr dwta_space() {
  return make_space({{"r", Domain::enumeration({"C", "D"})}, {"a", Domain::enumeration({"S", "F"})}});
}

// [name' = value]
inline Pred final_is(const SpacePtr& sp, std::string_view name, long long value) {
  return pred::eq(rexpr::final(*sp, name), rexpr::constant(value));
}

// [name = value]
inline Pred initial_is(const SpacePtr& sp, std::string_view name, long long value) {
  return pred::eq(rexpr::initial(*sp, name), rexpr::constant(value));
}

// [v' = v] for every variable
inline Pred skip_rel(const SpacePtr& sp) {
  Pred acc = pred::true_();
  for (size_t v = 0; v < sp->var_count(); ++v) {
    Pred e = pred::eq(rexpr::var_by_index(v, true), rexpr::var_by_index(v, false));
    acc = v == 0 ? e : pred::conj(acc, e);
  }
  return acc;
}

inline Rational half() { return Rational(1, 2); }

// 1/2*[c'=hd] + 1/2*[c'=tl]
inline Kernel cflip(const SpacePtr& sp) {
  RelExpr e = rexpr::add(rexpr::mul(rexpr::constant(half()), rexpr::iverson(final_is(sp, "c", 0))),
                         rexpr::mul(rexpr::constant(half()), rexpr::iverson(final_is(sp, "c", 1))));
  return clamp_kernel(tabulate(sp, e));
}

// throw of two fair dice: d1, d2 fresh uniform
inline Kernel dice_throw(const SpacePtr& sp) {
  std::vector<long long> faces = {1, 2, 3, 4, 5, 6};
  return sem_seq(sem_uniform(sp, "d1", faces), sem_uniform(sp, "d2", faces));
}

}  // namespace proburel::test

#endif
