#pragma once

// Concrete systems the rest of the library operates on:
//
//   sft           subshift of finite type over {0..A-1}, one- or two-sided,
//                 allowed two-letter words given by a 0/1 transition matrix
//   grid          Z/G with one of three maps: rotation by a step, the exact
//                 squaring map x -> round(x^2 / G), or the +1 odometer on
//                 G = 2^depth points
//   substitution  the factor language of a primitive substitution, handled
//                 word-level through a long prefix of its fixed point
//   product       finite product with the max metric, componentwise maps
//
// Metric conventions, fixed once and recorded in every report:
//   shift    d(x,y) = 2^-min{|i| : x_i != y_i}   (one-sided: i >= 0)
//   circle   d(a,b) = min(|a-b|, G-|a-b|) / G
//   2-adic   d(a,b) = 2^-min(v2(a-b)+1, depth)   (0 when a == b)
// Balls are open, shadowing is strict <, separation is strict >.

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "orbitglue/rational.hpp"

namespace orbitglue {

using Word = std::vector<int>;

enum class Sidedness { two_sided, one_sided };
enum class GridMap { rotation, square, odometer };
enum class SystemKind { sft, grid, substitution, product };

struct SymbolicSystem {
  int alphabet = 0;
  Eigen::MatrixXi transitions;  // transitions(a,b) == 1 iff "ab" is allowed
  Sidedness sidedness = Sidedness::two_sided;
};

struct GridCircleSystem {
  long long size = 0;
  GridMap map = GridMap::rotation;
  long long step = 0;  // rotation only
  int depth = 0;       // odometer only, size == 2^depth
};

struct SubstitutionSystem {
  int alphabet = 0;
  std::vector<Word> rules;  // rules[a] = image word of letter a
  long long prefix_length = 0;
  Word prefix;  // prefix of the fixed point, built eagerly
};

struct System {
  SystemKind kind = SystemKind::sft;
  std::string label;
  SymbolicSystem sft;
  GridCircleSystem grid;
  SubstitutionSystem subst;
  std::vector<System> components;  // product only
};

// Eventually periodic configuration (left_cycle)^inf core (right_cycle)^inf.
// Layout index u reads left_cycle for u < 0, core for 0 <= u < |core|, and
// right_cycle beyond. Coordinate i of the point is layout(i + origin_offset),
// so shifting moves origin_offset and never copies letters. One-sided points
// keep origin_offset == 0 and an empty left_cycle.
struct SymbolicPoint {
  Word left_cycle;
  Word core;
  Word right_cycle;
  long long origin_offset = 0;
};

struct Point {
  std::variant<SymbolicPoint, long long, std::vector<Point>> rep;

  Point() : rep(SymbolicPoint{}) {}
  explicit Point(SymbolicPoint p) : rep(std::move(p)) {}
  explicit Point(long long v) : rep(v) {}
  explicit Point(std::vector<Point> parts) : rep(std::move(parts)) {}

  bool is_symbolic() const { return std::holds_alternative<SymbolicPoint>(rep); }
  bool is_grid() const { return std::holds_alternative<long long>(rep); }
  bool is_product() const { return std::holds_alternative<std::vector<Point>>(rep); }
  const SymbolicPoint& symbolic() const { return std::get<SymbolicPoint>(rep); }
  SymbolicPoint& symbolic() { return std::get<SymbolicPoint>(rep); }
  long long grid() const { return std::get<long long>(rep); }
  const std::vector<Point>& parts() const { return std::get<std::vector<Point>>(rep); }
};

// ---- validation ----

void validate(const System& sys);                          // throws InvalidSpec
void validate_point(const System& sys, const Point& p);    // throws SystemMismatch

// ---- symbolic primitives ----

int letter_at(const SymbolicPoint& p, long long coordinate);
SymbolicPoint periodic_point(Word cycle, long long phase = 0);
SymbolicPoint shift_point(const SymbolicPoint& p, long long k, Sidedness sidedness);
bool symbolic_equal(const SymbolicPoint& a, const SymbolicPoint& b, Sidedness sidedness);
Rational symbolic_distance(const SymbolicPoint& a, const SymbolicPoint& b,
                           Sidedness sidedness);

// Least n >= 1 with shift^n(p) == p, or nullopt if p is not periodic.
std::optional<long long> symbolic_period(const SymbolicPoint& p, Sidedness sidedness);

// ---- generic dynamics ----

Point apply_map(const System& sys, const Point& p, long long k = 1);
Rational distance(const System& sys, const Point& a, const Point& b);
bool points_equal(const System& sys, const Point& a, const Point& b);
std::vector<Point> orbit_segment(const System& sys, const Point& p, long long length);
std::string point_to_text(const System& sys, const Point& p);

// ---- grid primitives ----

long long grid_apply(const GridCircleSystem& g, long long x);
Rational grid_distance(const GridCircleSystem& g, long long a, long long b);

// ---- SFT structure ----

bool word_admissible(const SymbolicSystem& s, const Word& w);
BigInt count_admissible_words(const SymbolicSystem& s, long long length);
void enumerate_admissible_words(const SymbolicSystem& s, int length,
                                const std::function<void(const Word&)>& visit);

// Strongly connected component ids, -1 for letters on no cycle through their
// component (singleton without a self loop).
std::vector<int> scc_ids(const Eigen::MatrixXi& transitions);
bool sft_irreducible(const SymbolicSystem& s);
// gcd of all cycle lengths; 0 if the graph has no cycle at all.
long long sft_period(const SymbolicSystem& s);
bool sft_primitive(const SymbolicSystem& s);
bool path_of_length_exists(const SymbolicSystem& s, int from, int to, long long length);
std::optional<Word> shortest_connector(const SymbolicSystem& s, int from, int to);

// Lexicographically smallest letters-between path of exactly `length` edges,
// or nullopt when none exists.
std::optional<Word> lex_path_exact(const SymbolicSystem& s, int from, int to,
                                   long long length);

// Greedy walk along smallest admissible successors (or predecessors) until a
// letter repeats: `entry` holds the letters before the cycle starts. Both
// directions exist for every letter of a validated SFT.
void greedy_cycle_forward(const SymbolicSystem& s, int from, Word& entry, Word& cycle);
void greedy_cycle_backward(const SymbolicSystem& s, int from, Word& entry, Word& cycle);

// All cycles of length <= max_len up to rotation, each in its lexicographically
// least rotation, sorted by (length, word).
std::vector<Word> admissible_cycles_up_to(const SymbolicSystem& s, int max_len);
// Periodic points of least period <= max_period; every phase appears.
std::vector<SymbolicPoint> periodic_points_up_to(const SymbolicSystem& s, int max_period);

// ---- substitution language ----

// Expands the fixed point of the first letter whose image starts with itself
// until the stored prefix reaches `target` letters. Throws InvalidSpec when
// no letter starts its own image or the substitution does not grow.
void subst_build_prefix(SubstitutionSystem& s, long long target);
bool subst_is_factor(const SubstitutionSystem& s, const Word& w);
std::vector<Word> subst_factors(const SubstitutionSystem& s, int length);
// Sorted start positions of w inside the stored prefix.
std::vector<long long> subst_occurrences(const SubstitutionSystem& s, const Word& w);
// Smallest R such that every length-R window of the prefix contains every
// factor of length `len`; nullopt if some window misses one (not uniformly
// recurrent at this cap).
std::optional<long long> subst_recurrence_bound(const SubstitutionSystem& s, int len);

// ---- zoo ----

std::vector<std::string> zoo_names();
System zoo_system(const std::string& name);

// ---- descriptions ----

std::string metric_convention(const System& sys);
std::string sidedness_name(Sidedness s);

}  // namespace orbitglue
