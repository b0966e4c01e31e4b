#ifndef PROBUREL_UNIT_HPP
#define PROBUREL_UNIT_HPP

#include <span>
#include <vector>

#include "proburel/rational.hpp"

namespace proburel {

/// A rational confined to [0,1]. Construction goes through clamp_to_unit,
/// so the invariant cannot be broken from outside.
class Unit {
 public:
  Unit() : v_(0) {}

  static Unit zero() { return Unit(); }
  static Unit one() { return Unit(Rational(1)); }

  const Rational& value() const { return v_; }

  friend bool operator==(const Unit& a, const Unit& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Unit& a, const Unit& b) { return a.v_ != b.v_; }
  friend bool operator<(const Unit& a, const Unit& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Unit& a, const Unit& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Unit& a, const Unit& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Unit& a, const Unit& b) { return a.v_ >= b.v_; }

 private:
  explicit Unit(Rational v) : v_(std::move(v)) {}
  friend Unit clamp_to_unit(const Rational&);
  Rational v_;
};

/// min(max(0, r), 1). Idempotent and monotone, not strictly.
inline Unit clamp_to_unit(const Rational& r) {
  if (r < 0) return Unit(Rational(0));
  if (r > 1) return Unit(Rational(1));
  return Unit(r);
}

/// The underlying rational; a plain cast on the mathematical side.
inline const Rational& unit_to_real(const Unit& u) { return u.value(); }

enum class BoundedOp { add, sub, mul };

/// Unit arithmetic bounded back into [0,1]: add saturates at 1, sub
/// floors at 0, mul never leaves the interval.
inline Unit bounded_arith(BoundedOp op, const Unit& x, const Unit& y) {
  switch (op) {
    case BoundedOp::add:
      return clamp_to_unit(x.value() + y.value());
    case BoundedOp::sub:
      return clamp_to_unit(x.value() - y.value());
    case BoundedOp::mul:
      return clamp_to_unit(x.value() * y.value());
  }
  return Unit::zero();
}

inline Unit bounded_add(const Unit& x, const Unit& y) { return bounded_arith(BoundedOp::add, x, y); }
inline Unit bounded_sub(const Unit& x, const Unit& y) { return bounded_arith(BoundedOp::sub, x, y); }
inline Unit bounded_mul(const Unit& x, const Unit& y) { return bounded_arith(BoundedOp::mul, x, y); }

enum class Extremum { inf, sup };

/// Least/greatest element of a finite set of units. The empty set follows
/// the lattice conventions: inf {} = 1, sup {} = 0.
inline Unit extrema(std::span<const Unit> values, Extremum which) {
  if (values.empty()) return which == Extremum::inf ? Unit::one() : Unit::zero();
  Unit best = values[0];
  for (const Unit& u : values.subspan(1)) {
    if (which == Extremum::inf ? u < best : u > best) best = u;
  }
  return best;
}

inline Unit inf_of(std::span<const Unit> values) { return extrema(values, Extremum::inf); }
inline Unit sup_of(std::span<const Unit> values) { return extrema(values, Extremum::sup); }

}  // namespace proburel

#endif
