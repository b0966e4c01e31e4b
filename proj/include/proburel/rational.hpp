#ifndef PROBUREL_RATIONAL_HPP
#define PROBUREL_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace proburel {

/// Arbitrary-precision integer.
using BigInt = boost::multiprecision::cpp_int;

/// Exact rational number. Always in lowest terms with a positive
/// denominator, so equality is structural value equality.
using Rational = boost::multiprecision::cpp_rational;

inline BigInt rat_num(const Rational& r) { return numerator(r); }
inline BigInt rat_den(const Rational& r) { return denominator(r); }

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Builds num/den, reduced. A zero denominator is rejected.
inline Rational make_rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw ParseError("rational with zero denominator");
  return Rational(num, den);
}

/// Division with the total convention a/0 = 0.
inline Rational div0(const Rational& a, const Rational& b) {
  if (b == 0) return Rational(0);
  return a / b;
}

/// Generalised modulus a - b*floor(a/b), total via mod-by-zero = 0.
/// Coincides with Euclidean mod on integers with b > 0.
inline Rational mod0(const Rational& a, const Rational& b) {
  if (b == 0) return Rational(0);
  Rational q = a / b;
  BigInt fq = numerator(q) / denominator(q);
  if (q < 0 && fq * denominator(q) != numerator(q)) fq -= 1;
  return a - b * Rational(fq);
}

/// r^e for a natural exponent.
inline Rational pow_nat(const Rational& r, unsigned long e) {
  using boost::multiprecision::pow;
  return Rational(BigInt(pow(numerator(r), static_cast<unsigned>(e))),
                  BigInt(pow(denominator(r), static_cast<unsigned>(e))));
}

/// Serialises as "num/den", or "num" for integers.
inline std::string format_rational(const Rational& r) {
  if (is_integer(r)) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

/// Parses "a/b" or "a" with optional sign.
inline Rational parse_rational(std::string_view text) {
  auto bad = [&] { return ParseError("invalid rational: '" + std::string(text) + "'"); };
  size_t slash = text.find('/');
  auto parse_int = [&](std::string_view s) -> BigInt {
    if (s.empty()) throw bad();
    size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw bad();
    for (size_t k = i; k < s.size(); ++k)
      if (s[k] < '0' || s[k] > '9') throw bad();
    return BigInt(std::string(s));
  };
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  BigInt num = parse_int(text.substr(0, slash));
  BigInt den = parse_int(text.substr(slash + 1));
  if (den == 0) throw bad();
  return Rational(num, den);
}

/// Decimal rendering with round-half-even at `places` digits. The value
/// itself is untouched; this is presentation only.
inline std::string format_decimal(const Rational& r, int places = 6) {
  if (places < 0) places = 0;
  bool neg = r < 0;
  Rational a = neg ? Rational(-r) : r;
  BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(places));
  BigInt n = numerator(a) * scale;
  BigInt d = denominator(a);
  BigInt q = n / d;
  BigInt rem = n % d;
  BigInt twice = rem * 2;
  if (twice > d || (twice == d && (q % 2) != 0)) q += 1;
  std::string digits = q.str();
  std::string out;
  if (places == 0) {
    out = digits;
  } else {
    if (static_cast<int>(digits.size()) <= places)
      digits.insert(0, places + 1 - digits.size(), '0');
    out = digits.substr(0, digits.size() - places) + "." + digits.substr(digits.size() - places);
  }
  if (neg && q != 0) out.insert(0, 1, '-');
  return out;
}

}  // namespace proburel

#endif
