#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "orbitglue/errors.hpp"

namespace orbitglue {

// All metric comparisons in this library are exact. Distances are rationals,
// thresholds are rationals, and doubles only appear in reports.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational pow2(long long e) {
  BigInt p = BigInt(1) << static_cast<unsigned>(e < 0 ? -e : e);
  return e >= 0 ? Rational(p) : Rational(1, p);
}

// Largest k >= 0 with 2^-k >= eps, i.e. the widest coordinate window that a
// strict bound d < eps forces two symbolic points to share. Returns -1 when
// eps > 1 (no coordinate is forced).
inline int shadow_radius(const Rational& eps) {
  if (eps <= 0) throw BadArgs("shadow_radius: eps must be positive");
  int k = -1;
  while (pow2(-(k + 1)) >= eps) {
    ++k;
    if (k > 4096) throw BadArgs("shadow_radius: eps too small");
  }
  return k;
}

// Largest k >= 0 with 2^-k > eps: a disagreement at |i| <= k certifies
// d > eps. Returns -1 when eps >= 1 (nothing can be separated).
inline int separation_radius(const Rational& eps) {
  if (eps <= 0) throw BadArgs("separation_radius: eps must be positive");
  int k = -1;
  while (pow2(-(k + 1)) > eps) {
    ++k;
    if (k > 4096) throw BadArgs("separation_radius: eps too small");
  }
  return k;
}

double to_double(const Rational& q);
std::string rational_to_string(const Rational& q);

// Accepts "3/4", "2", "-1/8". Whitespace is not tolerated; exact only.
Rational parse_rational(const std::string& text);

}  // namespace orbitglue
