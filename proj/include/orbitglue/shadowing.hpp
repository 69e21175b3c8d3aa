#pragma once

// Orbit sequences, gaps, and shadowing.
//
// An orbit sequence is a finite list of (point, length) segments. A gap for a
// rank-k sequence is a list of k-1 positive integers. The induced schedule is
//   s_1 = 0,  s_{j+1} = s_j + m_j + t_j - 1,
// and a point z eps-shadows the sequence when
//   d(f^{s_j + l}(z), f^l(x_j)) < eps   for every j and 0 <= l < m_j.
//
// For SFTs with eps = 2^-r the condition is exactly a set of forced letters:
// segment j forces coordinates [s_j - r, s_j + m_j - 1 + r] (one-sided shifts
// force nothing left of s_j). Window merging turns shadowing questions into
// finite path problems in the transition graph.

#include <optional>
#include <string>
#include <vector>

#include "orbitglue/systems.hpp"

namespace orbitglue {

struct OrbitSegment {
  Point base;
  long long length = 0;
};

using OrbitSequence = std::vector<OrbitSegment>;
using Gap = std::vector<long long>;

void validate_sequence(const System& sys, const OrbitSequence& seq);
void validate_gap(const OrbitSequence& seq, const Gap& gap);

std::vector<long long> shadow_schedule(const OrbitSequence& seq, const Gap& gap);

struct ShadowVerdict {
  bool accepted = false;
  // First violated constraint, in scan order (segment, then step).
  int segment = -1;
  long long step = -1;
  Rational distance;
};

ShadowVerdict verify_shadow(const System& sys, const Point& z, const OrbitSequence& seq,
                            const Gap& gap, const Rational& eps);

enum class ConflictKind { forced_letters, adjacency, no_path };

struct WindowConflict {
  ConflictKind kind = ConflictKind::forced_letters;
  long long coordinate = 0;  // smallest coordinate involved
  int have = -1, want = -1;  // forced_letters: the two clashing letters
  std::string detail;
};

// Forced-letter image of (seq, gap) at agreement radius r: maximal runs of
// consecutive forced coordinates, or the first conflict that proves no point
// can shadow.
struct MergedWindows {
  bool ok = false;
  std::optional<WindowConflict> conflict;
  std::vector<std::pair<long long, Word>> runs;  // (start coordinate, letters)
};

MergedWindows merge_windows(const System& sys, const OrbitSequence& seq, const Gap& gap,
                            int r);

// Admissible point carrying the merged runs: gaps between runs are filled with
// lexicographically smallest exact-length connectors, tails continue along
// smallest-letter walks. Deterministic in its inputs.
Point materialize_from_runs(const System& sys, const MergedWindows& runs);

struct ShadowSearch {
  bool found = false;
  std::optional<Point> witness;
  std::optional<WindowConflict> conflict;
};

// Exact decision for SFTs with eps = 2^-r.
ShadowSearch find_shadow_sft(const System& sys, const OrbitSequence& seq, const Gap& gap,
                             int r);

// Exact witness search on a finite grid: the smallest residue shadowing the
// sequence, or nullopt when none exists anywhere in the space. Rotations and
// odometers reduce to arc/congruence intersections; the squaring map is
// monotone on [0, G), so preimages of balls are ranges.
std::optional<long long> find_shadow_grid(const System& sys, const OrbitSequence& seq,
                                          const Gap& gap, const Rational& eps);

struct CandidatePool {
  std::vector<Point> points;
  std::string descriptor;
};

// Deterministic seeded sample: every periodic point of least period <= 4,
// one heteroclinic connection per ordered pair of short cycles, and seeded
// random fillers up to `size` (grid systems sample residues, shifts sample
// decorated cycles). Same (system, size, seed) yields the same pool.
CandidatePool make_pool(const System& sys, long long size, unsigned long long seed);

struct GapSearch {
  bool found = false;
  Gap gap;
  std::optional<Point> witness;
  long long tuples_tried = 0;
};

// Smallest gap (lexicographic, entries in [1, M_max]) admitting an
// eps-shadowing point. SFTs with dyadic eps are decided exactly; any other
// system scans the supplied candidate pool and reports the first witness.
// Rank-1 sequences need no gap: the segment base itself is returned.
GapSearch find_gap_and_shadow(const System& sys, const OrbitSequence& seq, const Rational& eps,
                              long long M_max, const CandidatePool* pool = nullptr);

}  // namespace orbitglue
