#pragma once

// Separated sets, entropy estimates, periodic growth, and the two-point
// dichotomy construction.
//
// A set E is (n, eps)-separated when every pair x != y in E satisfies
// d(f^k x, f^k y) > eps for some 0 <= k < n (strict). Counts for SFTs at
// dyadic eps are exact word counts; grids get exact counts where a closed
// form or exhaustive search is affordable, and certified lower bounds
// otherwise.

#include <optional>
#include <string>
#include <vector>

#include "orbitglue/shadowing.hpp"

namespace orbitglue {

struct SeparatedSet {
  long long n = 0;
  Rational eps;
  BigInt size = 0;
  bool exact = true;      // false: size is a lower bound
  std::string method;
  std::vector<Point> points;  // materialized only when small enough
  bool materialized = false;
};

// Product systems have no intrinsic finite description of their point set and
// need a pool; an empty one raises EmptyPool. Substitution systems count
// exactly from the factor language and never materialize points (they carry
// no point type), so a pool is refused as Unsupported.
SeparatedSet separated_set(const System& sys, long long n, const Rational& eps,
                           const CandidatePool* pool = nullptr,
                           long long materialize_cap = 4096);

struct EntropyRow {
  Rational eps;
  long long n = 0;
  BigInt count = 0;
  double slope = 0.0;  // ln(count) / n
  bool exact = true;
};

struct OracleInterval {
  double lo = 0.0, hi = 0.0;
  std::string spectral_lo, spectral_hi;  // exact rational bounds on the growth rate
};

struct EntropyReport {
  std::vector<EntropyRow> rows;
  double h_estimate = 0.0;  // max over eps of the tail difference quotient
  bool exact = true;        // false when any row is only a lower bound
  std::optional<OracleInterval> oracle;
  std::string notes;
};

// Difference quotient (ln s(n_max) - ln s(n_mid)) / (n_max - n_mid) with
// n_mid = n_max / 2, maximized over the eps list. Saturating counts (finite
// or eventually absorbed systems) correctly report 0.
EntropyReport entropy_estimate(const System& sys, const std::vector<Rational>& eps_list,
                               long long n_max, const CandidatePool* pool = nullptr);

// Certified enclosure of ln(spectral radius) of the transition matrix via
// Collatz-Wielandt bounds in exact rational arithmetic, accurate to 1e-6.
OracleInterval sft_entropy_oracle(const System& sys);

// ln(N) / M: entropy lower bound from N separated points glued with gaps
// <= M. Demands N >= 2, M >= 1 (BadArgs otherwise).
double spec_entropy_bound(long long N, long long M);

struct PeriodicGrowth {
  std::vector<BigInt> fixed_counts;   // fixed_counts[n-1] = #{x : f^n x = x}
  std::vector<BigInt> least_period;   // orbits' points of least period n
  std::vector<BigInt> cumulative;     // cumulative[n-1] = #union of Fix(f^k), k <= n
  double growth_rate = 0.0;           // max over n of ln(cumulative[n]) / n
};

// Periodic points counted by direct cycle enumeration in the transition
// graph; trace counts of matrix powers are kept for the cross-check.
PeriodicGrowth periodic_counts(const System& sys, int n_max);

struct StayAwayCheck {
  bool holds = false;
  bool exact = false;
  std::string detail;
};

struct DichotomyResult {
  Rational eps;        // requested separation quality
  Rational eps_fine;   // eps / 3 rounded down to a dyadic step for symbolic work
  int radius = -1;
  long long segment_length = 0;  // m, from the gluing bound at eps_fine
  long long span = 0;            // observation window 2 m n
  int n = 0;
  StayAwayCheck stay_away;
  std::vector<std::string> patterns;  // binary labels of the witnesses
  std::vector<Point> witnesses;
  std::vector<Gap> gaps;
  bool separation_verified = false;
  double entropy_lower_bound = 0.0;  // ln(2) / (2 m)
  std::string detail;
};

// Builds the 2^n interleaved-orbit witnesses for a pair of points and checks
// pairwise separation exactly. Throws GluingFailed when no finite gluing
// bound exists at the working scale (the expected outcome for non-gluing
// systems) and StayAwayViolated when the hypothesis on (x, y) fails and the
// separation check cannot be completed either; a hypothesis failure alone is
// recorded in stay_away and the construction proceeds.
DichotomyResult dichotomy_construction(const System& sys, const Point& x, const Point& y,
                                       const Rational& eps, int n, long long cap,
                                       const CandidatePool* pool = nullptr);

}  // namespace orbitglue
