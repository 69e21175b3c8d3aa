#pragma once

// Gluing and specification style gap bounds.
//
// A system glues at quality eps with bound M when every orbit sequence in the
// tested family admits a gap with all entries <= M whose shadowing point
// exists. The specification variant demands that every gap made of entries in
// [M, M + slack] works, not just some gap. Both are decided exactly on SFTs
// by window merging; the substitution lane answers word-level questions about
// the factor language instead.

#include <optional>
#include <string>
#include <vector>

#include "orbitglue/shadowing.hpp"

namespace orbitglue {

enum class ProfileStatus { finite, exceeds_cap, impossible };

struct InstanceOutcome {
  std::string label;
  std::optional<long long> min_max_gap;  // least B with a feasible gap <= B
  std::string obstruction;               // set when no gap under the cap works
};

struct GluingProfile {
  ProfileStatus status = ProfileStatus::exceeds_cap;
  long long bound = -1;  // M_required when finite
  int radius = -1;       // agreement radius for symbolic systems
  Rational eps;
  long long segment_length = 0;
  int rank = 0;
  long long cap = 0;
  std::string family;
  std::string pool_descriptor;  // which candidate pool fed non-exact searches
  std::string certificate;
  std::vector<InstanceOutcome> instances;
  bool stabilized = false;      // bound agrees with the next shorter segment length
  long long stabilized_at = 0;  // the shorter length used for the check
};

// Deterministic instance family for an SFT: periodic points of least period
// <= 4 plus one canonical heteroclinic connection per ordered pair of short
// cycles, combined into sequences of the requested rank. Exposed so tests can
// pin the family down.
std::vector<OrbitSequence> canonical_family_sft(const System& sys, long long segment_length,
                                                int rank);
std::vector<std::string> canonical_family_labels(const System& sys,
                                                 long long segment_length, int rank);

// cap = 0 picks a structural default large enough to separate "needs a bigger
// cap" from "provably impossible" on every zoo SFT.
GluingProfile decide_gluing_sft(const System& sys, int radius, long long segment_length,
                                int rank, long long cap = 0);

// eps-based wrapper: picks the agreement radius for dyadic eps on SFTs, runs
// the word-level variant for substitution systems, and scans the pool on
// grids (where shadowing at a fixed scale is a finite orbit question).
GluingProfile gluing_profile(const System& sys, const Rational& eps,
                             long long segment_length, int rank,
                             const CandidatePool* pool, long long cap);

struct SpecificationProfile {
  ProfileStatus status = ProfileStatus::exceeds_cap;
  long long bound = -1;  // least M such that every gap in [M, M+slack]^k works
  long long slack = 0;
  int radius = -1;
  long long segment_length = 0;
  int rank = 0;
  long long cap = 0;
  std::string certificate;  // graph-theoretic reason when impossible
};

// Uniform gap bound: every gap with entries in [M, M + slack] must admit a
// shadowing point, for every family instance. Irreducible aperiodic SFTs get
// a finite answer; period >= 2 or reducibility yields an exact impossibility
// certificate. slack = -1 means the default 2 * radius + 2.
SpecificationProfile specification_profile_sft(const System& sys, int radius,
                                               long long segment_length, int rank,
                                               long long slack = -1, long long cap = 0);

struct PeriodicGluingResult {
  ProfileStatus status = ProfileStatus::exceeds_cap;
  long long tail_gap = -1;  // the t closing the loop
  long long period = -1;    // s_k + m_k + t
  Gap gap;                  // interior gap entries
  std::optional<Point> witness;
  std::string certificate;
};

// Smallest closing gap t <= cap (then lexicographically smallest interior
// gap) such that some periodic point of period s_k + m_k + t shadows the
// sequence. The witness is re-verified through the plain orbit definition.
PeriodicGluingResult periodic_gluing_search(const System& sys, const OrbitSequence& seq,
                                            int radius, long long cap = 0);

// Worst case over the canonical family (ranks 1..rank: the rank-1 instances
// ask each single segment to close into a periodic orbit) of the least
// feasible closing gap.
GluingProfile periodic_gluing_sft(const System& sys, int radius,
                                  long long segment_length, int rank,
                                  long long cap = 0);

// ---- substitution lane (word-level) ----

// Least t >= 1 such that u can be followed by v at distance m + t - 1 inside
// the reference word, m = |u|; nullopt when no t <= cap works.
std::optional<long long> subst_connector_gap(const SubstitutionSystem& s, const Word& u,
                                             const Word& v, long long cap);

// Max over ordered factor pairs (and longer tuples when rank > 2) of the least
// feasible uniform gap bound; word windows play the role of orbit segments.
GluingProfile gluing_profile_subst(const System& sys, const Rational& eps,
                                   long long segment_length, int rank, long long cap);

}  // namespace orbitglue
