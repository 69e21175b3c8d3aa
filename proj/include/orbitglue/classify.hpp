#pragma once

// Topological classification and the cross-checks tying the other modules
// together. Verdicts carry their scope: exact answers come from structure
// theorems (graph irreducibility, isometry closed forms), bounded answers
// from finite horizons, and those say so.

#include <optional>
#include <string>
#include <vector>

#include "orbitglue/entropy.hpp"
#include "orbitglue/gluing.hpp"

namespace orbitglue {

enum class VerdictValue { yes, no, unknown };

struct Verdict {
  VerdictValue value = VerdictValue::unknown;
  bool exact = false;
  std::string scope;        // "exact" or the cap that bounds the search
  std::string certificate;  // witness or reason
};

std::string verdict_name(VerdictValue v);

Verdict is_transitive(const System& sys, long long cap = 4096);
Verdict is_minimal(const System& sys, long long cap = 4096);

struct ModulusResult {
  bool isometry = false;
  Verdict equicontinuous;
  std::optional<Rational> delta;  // valid when equicontinuous at this eps
  // Counterexample pair when not: d(x,y) < delta candidate but the orbits
  // separate to >= eps at witness_time.
  std::optional<std::pair<Point, Point>> pair;
  long long witness_time = -1;
};

// Isometric grids answer delta = eps exactly; other grids are enumerated
// exhaustively when small enough; shift systems search pool pairs up to the
// horizon (EmptyPool when the pool is missing or empty).
ModulusResult equicontinuity_modulus(const System& sys, const Rational& eps,
                                     long long horizon = 4096,
                                     const CandidatePool* pool = nullptr);

struct NonrecurrenceResult {
  bool found = false;
  Point point;
  Rational eps;
  bool exact = false;  // true when the whole forward orbit was closed off
  long long horizon = 0;
  std::string detail;
};

// A point whose forward orbit never re-enters B(point, eps).
NonrecurrenceResult find_nonrecurrent(const System& sys, const Rational& eps,
                                      long long horizon, const CandidatePool* pool = nullptr);

struct StayAwayResult {
  bool found = false;
  Point x, y;
  Rational eps;
  bool exact = false;
  long long horizon = 0;
  std::string detail;
};

// Pair satisfying all four stay-away constraints:
//   d(f^n x, x) >= eps (n != 0),   d(f^n x, y) >= eps (n >= 0),
//   d(f^n y, x) >= eps (n >= 0),   d(f^n y, y) >= eps (n > 0).
// Symbolic candidates built from distinct cycles are certified for all n via
// eventual periodicity; other systems are checked up to the horizon.
StayAwayResult stay_away_pair(const System& sys, const Rational& eps, long long horizon,
                              const CandidatePool* pool = nullptr);

// Least N such that every start reaches every center's eps-ball within N
// steps. Demands a finite minimal system (NotMinimal / NotFinite otherwise);
// decided by double enumeration, so the pool is advisory only.
long long covering_time(const System& sys, const Rational& eps,
                        const CandidatePool* pool = nullptr);

// Observable for Birkhoff averages: 1 on the closed eps-ball around the
// center, 0 outside the open 2 eps-ball, linear in the distance between.
struct BirkhoffProbe {
  Point center;
  Rational eps;
};

// phi(z) = clamp((2 eps - d(z, center)) / eps, 0, 1).
Rational bump_value(const System& sys, const BirkhoffProbe& probe, const Point& z);

// (1/n) * sum_{k<n} phi(f^k(orbit_start)), exact rational.
Rational birkhoff_gap(const System& sys, const Point& orbit_start, const BirkhoffProbe& probe,
                      long long n);

struct TheoremCheck {
  std::string id;
  std::string statement;
  std::string status;  // "pass" | "fail" | "skip"
  std::string detail;
};

struct ClassifyOptions {
  std::vector<Rational> eps_list;
  long long horizon = 2048;
  long long n_max = 16;
  long long segment_length = 6;
  int rank = 2;
  long long cap = 16;
  int periodic_n_max = 10;
  long long birkhoff_n = 8192;
  long long pool_size = 32;
  unsigned long long seed = 0;
};

ClassifyOptions default_options(const System& sys);

struct ClassificationReport {
  std::string label;
  Verdict transitive;
  Verdict minimal;
  Verdict equicontinuous;
  Verdict glues;
  Verdict specification;
  std::optional<GluingProfile> gluing;
  std::optional<SpecificationProfile> spec_profile;
  std::optional<EntropyReport> entropy;
  std::optional<PeriodicGrowth> periodic;
  std::optional<long long> cover_time;
  std::vector<TheoremCheck> checks;
  std::vector<std::string> notes;
};

// Runs every applicable verdict, profile, and cross-check for the system.
ClassificationReport classify(const System& sys, const ClassifyOptions& opt);

}  // namespace orbitglue
