#pragma once

// Exact away-scans shared by the entropy and classify modules. For an
// eventually periodic configuration d(f^k a, b) is eventually periodic in k,
// and on a finite grid the orbit value revisits; both let a bounded scan
// close off "for all n" claims exactly.

#include <string>

#include "orbitglue/entropy.hpp"

namespace orbitglue {
namespace detail {

// Horizon covering one full cycle of d(f^k p, .) past the point where the
// moving window has left the core.
long long symbolic_horizon(const SymbolicPoint& p, int window);

struct AwayScan {
  bool holds = true;
  bool exact = true;
  long long first_bad = -1;
  Rational bad_distance;
};

// Checks d(f^k a, b) >= eps for every k >= from. Exact on SFTs and grids,
// bounded by `bounded_horizon` elsewhere (exact flag cleared).
AwayScan scan_away(const System& sys, const Point& a, const Point& b, const Rational& eps,
                   long long from, long long bounded_horizon = 512);

// The four stay-away legs (x-return, x to y, y to x, y-return) in one report.
StayAwayCheck stay_away_report(const System& sys, const Point& x, const Point& y,
                               const Rational& eps);

}  // namespace detail
}  // namespace orbitglue
