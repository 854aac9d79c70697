#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace qmkit {

using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Accepts "p", "-p", "p/q" and finite decimals such as "1.5".
Rational parse_rational(std::string_view text);

// "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& r);

inline int sign_of(const Rational& r) { return sgn(r); }

inline Rational abs_of(const Rational& r) { return abs(r); }

}  // namespace qmkit
