#include "orbitglue/shadowing.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "orbitglue/errors.hpp"

namespace orbitglue {

void validate_sequence(const System& sys, const OrbitSequence& seq) {
  if (seq.empty()) throw BadArgs("orbit sequence needs at least one segment");
  for (size_t j = 0; j < seq.size(); ++j) {
    if (seq[j].length < 1)
      throw BadArgs("segment " + std::to_string(j + 1) + ": length must be >= 1");
    validate_point(sys, seq[j].base);
  }
}

void validate_gap(const OrbitSequence& seq, const Gap& gap) {
  if (gap.size() + 1 != seq.size())
    throw RankMismatch("rank " + std::to_string(seq.size()) + " sequence needs " +
                       std::to_string(seq.size() - 1) + " gap entries, got " +
                       std::to_string(gap.size()));
  for (long long t : gap)
    if (t < 1) throw BadArgs("gap entries must be >= 1");
}

std::vector<long long> shadow_schedule(const OrbitSequence& seq, const Gap& gap) {
  validate_gap(seq, gap);
  std::vector<long long> s(seq.size(), 0);
  for (size_t j = 1; j < seq.size(); ++j)
    s[j] = s[j - 1] + seq[j - 1].length + gap[j - 1] - 1;
  return s;
}

ShadowVerdict verify_shadow(const System& sys, const Point& z, const OrbitSequence& seq,
                            const Gap& gap, const Rational& eps) {
  if (eps <= 0) throw BadArgs("eps must be positive");
  validate_sequence(sys, seq);
  validate_point(sys, z);
  const auto s = shadow_schedule(seq, gap);
  ShadowVerdict v;
  Point zc = z;
  long long pos = 0;  // zc == f^pos(z)
  for (size_t j = 0; j < seq.size(); ++j) {
    zc = apply_map(sys, zc, s[j] - pos);
    pos = s[j];
    Point xc = seq[j].base;
    for (long long l = 0; l < seq[j].length; ++l) {
      Rational d = distance(sys, zc, xc);
      if (!(d < eps)) {
        v.accepted = false;
        v.segment = static_cast<int>(j) + 1;
        v.step = l;
        v.distance = d;
        return v;
      }
      if (l + 1 < seq[j].length) {
        zc = apply_map(sys, zc, 1);
        ++pos;
        xc = apply_map(sys, xc, 1);
      }
    }
  }
  v.accepted = true;
  return v;
}

MergedWindows merge_windows(const System& sys, const OrbitSequence& seq, const Gap& gap,
                            int r) {
  if (sys.kind != SystemKind::sft) throw NotAnSft("window merging needs an SFT");
  if (r < -1) throw BadArgs("agreement radius must be >= -1");
  validate_sequence(sys, seq);
  const auto s = shadow_schedule(seq, gap);
  const bool two = sys.sft.sidedness == Sidedness::two_sided;

  MergedWindows out;
  std::map<long long, int> forced;
  if (r >= 0) {
    for (size_t j = 0; j < seq.size(); ++j) {
      const auto& x = seq[j].base.symbolic();
      const long long lo = two ? s[j] - r : s[j];
      const long long hi = s[j] + seq[j].length - 1 + r;
      for (long long c = lo; c <= hi; ++c) {
        int want = letter_at(x, c - s[j]);
        auto it = forced.find(c);
        if (it == forced.end()) {
          forced.emplace(c, want);
        } else if (it->second != want) {
          std::ostringstream msg;
          msg << "segment " << j + 1 << " forces letter " << want << " at coordinate " << c
              << " but an earlier segment forced " << it->second;
          out.conflict = WindowConflict{ConflictKind::forced_letters, c, it->second, want,
                                        msg.str()};
          return out;
        }
      }
    }
  }

  // Forced letters at adjacent coordinates can come from different windows,
  // so the pair still has to be an allowed word.
  for (auto it = forced.begin(); it != forced.end(); ++it) {
    auto next = std::next(it);
    if (next == forced.end() || next->first != it->first + 1) continue;
    if (sys.sft.transitions(it->second, next->second) == 0) {
      std::ostringstream msg;
      msg << "forced letters " << it->second << "," << next->second << " at coordinates "
          << it->first << "," << next->first << " form a forbidden word";
      out.conflict = WindowConflict{ConflictKind::adjacency, it->first, it->second,
                                    next->second, msg.str()};
      return out;
    }
  }

  for (auto it = forced.begin(); it != forced.end();) {
    long long start = it->first;
    Word letters;
    long long c = start;
    while (it != forced.end() && it->first == c) {
      letters.push_back(it->second);
      ++it;
      ++c;
    }
    out.runs.emplace_back(start, std::move(letters));
  }

  for (size_t i = 0; i + 1 < out.runs.size(); ++i) {
    const long long end_c = out.runs[i].first + static_cast<long long>(out.runs[i].second.size()) - 1;
    const long long next_c = out.runs[i + 1].first;
    const int a = out.runs[i].second.back();
    const int b = out.runs[i + 1].second.front();
    if (!path_of_length_exists(sys.sft, a, b, next_c - end_c)) {
      std::ostringstream msg;
      msg << "no admissible word of " << next_c - end_c - 1 << " letters connects " << a
          << " (coordinate " << end_c << ") to " << b << " (coordinate " << next_c << ")";
      out.conflict =
          WindowConflict{ConflictKind::no_path, end_c + 1, a, b, msg.str()};
      return out;
    }
  }

  out.ok = true;
  return out;
}

Point materialize_from_runs(const System& sys, const MergedWindows& m) {
  if (sys.kind != SystemKind::sft) throw NotAnSft("materialization needs an SFT");
  if (!m.ok) throw BadArgs("cannot materialize a conflicting window set");
  const bool two = sys.sft.sidedness == Sidedness::two_sided;

  SymbolicPoint p;
  if (m.runs.empty()) {
    auto cycles = admissible_cycles_up_to(sys.sft, sys.sft.alphabet);
    p = periodic_point(cycles.front());
    if (!two) p.left_cycle.clear();
    Point out{p};
    validate_point(sys, out);
    return out;
  }

  Word core;
  for (size_t i = 0; i < m.runs.size(); ++i) {
    if (i > 0) {
      const auto& prev = m.runs[i - 1];
      const long long end_c = prev.first + static_cast<long long>(prev.second.size()) - 1;
      auto fill = lex_path_exact(sys.sft, prev.second.back(), m.runs[i].second.front(),
                                 m.runs[i].first - end_c);
      core.insert(core.end(), fill->begin(), fill->end());
    }
    core.insert(core.end(), m.runs[i].second.begin(), m.runs[i].second.end());
  }
  long long core_start = m.runs.front().first;

  Word entry, cycle;
  greedy_cycle_forward(sys.sft, core.back(), entry, cycle);
  core.insert(core.end(), entry.begin(), entry.end());
  p.right_cycle = cycle;

  if (two) {
    Word bentry, bcycle;
    greedy_cycle_backward(sys.sft, core.front(), bentry, bcycle);
    core.insert(core.begin(), bentry.begin(), bentry.end());
    core_start -= static_cast<long long>(bentry.size());
    p.left_cycle = bcycle;
  }
  p.core = std::move(core);
  p.origin_offset = two ? -core_start : 0;

  Point out{p};
  validate_point(sys, out);
  return out;
}

ShadowSearch find_shadow_sft(const System& sys, const OrbitSequence& seq, const Gap& gap,
                             int r) {
  ShadowSearch out;
  MergedWindows m = merge_windows(sys, seq, gap, r);
  if (!m.ok) {
    out.conflict = m.conflict;
    return out;
  }
  out.found = true;
  out.witness = materialize_from_runs(sys, m);
  return out;
}

namespace {

// Plain integer ranges [a, b] inside [0, G); a wrapped ball splits in two.
using Ranges = std::vector<std::pair<long long, long long>>;

Ranges intersect_ranges(const Ranges& lhs, const Ranges& rhs) {
  Ranges out;
  for (const auto& a : lhs)
    for (const auto& b : rhs) {
      long long lo = std::max(a.first, b.first);
      long long hi = std::min(a.second, b.second);
      if (lo <= hi) out.emplace_back(lo, hi);
    }
  std::sort(out.begin(), out.end());
  return out;
}

// {v : circle distance(v, center) < eps} as ranges; exact open-ball cut.
Ranges circle_ball(long long G, long long center, const Rational& eps) {
  const BigInt p = boost::multiprecision::numerator(eps);
  const BigInt q = boost::multiprecision::denominator(eps);
  BigInt amax = (p * G - 1) / q;  // largest integer arc with arc/G < eps
  long long A = amax >= G ? G : amax.convert_to<long long>();
  if (2 * A + 1 >= G) return {{0, G - 1}};
  long long lo = center - A, hi = center + A;
  if (lo < 0) return {{0, hi}, {lo + G, G - 1}};
  if (hi >= G) return {{lo, G - 1}, {0, hi - G}};
  return {{lo, hi}};
}

long long square_iterate(const GridCircleSystem& g, long long x, long long k) {
  for (long long i = 0; i < k && x != 0; ++i) x = grid_apply(g, x);
  return x;
}

// Preimage of [lo, hi] under the monotone map x -> f^c(x) on [0, G).
Ranges square_preimage(const GridCircleSystem& g, long long c, long long lo, long long hi) {
  const long long G = g.size;
  // least x with f^c(x) >= lo
  long long a = 0, b = G;  // [a, b) search window
  while (a < b) {
    long long mid = a + (b - a) / 2;
    if (square_iterate(g, mid, c) >= lo) b = mid; else a = mid + 1;
  }
  long long first = a;
  a = -1; b = G - 1;  // greatest x with f^c(x) <= hi
  while (a < b) {
    long long mid = b - (b - a) / 2;
    if (square_iterate(g, mid, c) <= hi) a = mid; else b = mid - 1;
  }
  long long last = a;
  if (first > last) return {};
  return {{first, last}};
}

std::optional<long long> grid_witness(const System& sys, const OrbitSequence& seq,
                                      const Gap& gap, const Rational& eps) {
  const GridCircleSystem& g = sys.grid;
  const long long G = g.size;
  const auto s = shadow_schedule(seq, gap);

  if (g.map == GridMap::odometer) {
    // Balls are congruence classes: d(v, t) < eps iff v == t mod 2^j with
    // j the largest exponent such that 2^-j >= eps (and j <= depth).
    int j = shadow_radius(eps);
    if (j < 0) j = 0;
    if (j > g.depth) j = g.depth;
    const long long mod = 1LL << j;
    bool have = false;
    long long residue = 0;
    for (size_t i = 0; i < seq.size(); ++i) {
      long long want = ((seq[i].base.grid() - s[i]) % mod + mod) % mod;
      if (!have) {
        residue = want;
        have = true;
      } else if (residue != want) {
        return std::nullopt;
      }
    }
    return residue;
  }

  Ranges cand = {{0, G - 1}};
  for (size_t j = 0; j < seq.size(); ++j) {
    long long x = seq[j].base.grid();
    for (long long l = 0; l < seq[j].length && !cand.empty(); ++l) {
      const long long c = s[j] + l;
      Ranges ball = circle_ball(G, x, eps);
      Ranges pre;
      if (g.map == GridMap::rotation) {
        long long shiftv = ((c % G) * (g.step % G)) % G;
        for (auto [lo, hi] : ball) {
          long long nlo = ((lo - shiftv) % G + G) % G;
          long long nhi = ((hi - shiftv) % G + G) % G;
          if (nlo <= nhi) pre.emplace_back(nlo, nhi);
          else {
            pre.emplace_back(0, nhi);
            pre.emplace_back(nlo, G - 1);
          }
        }
      } else {
        for (auto [lo, hi] : ball) {
          Ranges part = square_preimage(g, c, lo, hi);
          pre.insert(pre.end(), part.begin(), part.end());
        }
      }
      cand = intersect_ranges(cand, pre);
      x = grid_apply(g, x);
    }
    if (cand.empty()) return std::nullopt;
  }
  long long best = -1;
  for (const auto& rg : cand)
    if (best < 0 || rg.first < best) best = rg.first;
  if (best < 0) return std::nullopt;
  return best;
}

}  // namespace

std::optional<long long> find_shadow_grid(const System& sys, const OrbitSequence& seq,
                                          const Gap& gap, const Rational& eps) {
  if (sys.kind != SystemKind::grid) throw Unsupported("grid witness search needs a grid system");
  if (eps <= 0) throw BadArgs("eps must be positive");
  validate_sequence(sys, seq);
  return grid_witness(sys, seq, gap, eps);
}

GapSearch find_gap_and_shadow(const System& sys, const OrbitSequence& seq, const Rational& eps,
                              long long M_max, const CandidatePool* pool) {
  if (eps <= 0) throw BadArgs("eps must be positive");
  if (M_max < 1) throw BadArgs("M_max must be >= 1");
  validate_sequence(sys, seq);

  GapSearch out;
  if (seq.size() == 1) {
    // Rank 1 needs no gluing: the segment's own base point shadows it.
    out.found = true;
    out.witness = seq[0].base;
    return out;
  }

  if (sys.kind == SystemKind::substitution)
    throw Unsupported("substitution systems answer gluing word-level, not pointwise");
  if (sys.kind == SystemKind::product && (pool == nullptr))
    throw PoolRequired("product systems need a candidate pool for gap search");
  if (sys.kind == SystemKind::product && pool->points.empty())
    throw EmptyPool("candidate pool is empty");

  const int r = sys.kind == SystemKind::sft ? shadow_radius(eps) : 0;
  Gap g(seq.size() - 1, 1);
  for (;;) {
    ++out.tuples_tried;
    if (sys.kind == SystemKind::sft) {
      ShadowSearch found = find_shadow_sft(sys, seq, g, r);
      if (found.found) {
        out.found = true;
        out.gap = g;
        out.witness = found.witness;
        return out;
      }
    } else if (sys.kind == SystemKind::grid) {
      auto z = find_shadow_grid(sys, seq, g, eps);
      if (z) {
        out.found = true;
        out.gap = g;
        out.witness = Point{*z};
        return out;
      }
    } else {
      for (const Point& z : pool->points) {
        if (verify_shadow(sys, z, seq, g, eps).accepted) {
          out.found = true;
          out.gap = g;
          out.witness = z;
          return out;
        }
      }
    }
    // lexicographic successor within [1, M_max]^(k-1)
    size_t i = g.size();
    while (i > 0 && g[i - 1] == M_max) {
      g[i - 1] = 1;
      --i;
    }
    if (i == 0) break;
    ++g[i - 1];
  }
  return out;
}

namespace {

void pool_insert(const System& sys, std::vector<Point>& pts, std::set<std::string>& seen,
                 Point p, long long size) {
  if (static_cast<long long>(pts.size()) >= size) return;
  std::string key = point_to_text(sys, p);
  if (seen.insert(key).second) pts.push_back(std::move(p));
}

}  // namespace

CandidatePool make_pool(const System& sys, long long size, unsigned long long seed) {
  if (size < 1) throw BadArgs("pool size must be >= 1");
  CandidatePool pool;
  std::ostringstream desc;
  desc << sys.label << "|canonical(size=" << size << ",seed=" << seed << ")";
  pool.descriptor = desc.str();
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;

  switch (sys.kind) {
    case SystemKind::sft: {
      const bool two = sys.sft.sidedness == Sidedness::two_sided;
      auto add_periodic = [&](int max_period) {
        for (const auto& sp : periodic_points_up_to(sys.sft, max_period)) {
          SymbolicPoint p = sp;
          if (!two) p.left_cycle.clear();
          pool_insert(sys, pool.points, seen, Point{p}, size);
        }
      };
      auto add_heteroclinic = [&](int max_len) {
        auto cycles = admissible_cycles_up_to(sys.sft, max_len);
        for (const auto& c1 : cycles)
          for (const auto& c2 : cycles) {
            if (c1 == c2) continue;
            auto conn = shortest_connector(sys.sft, c1.back(), c2.front());
            if (!conn) continue;
            SymbolicPoint p;
            p.left_cycle = c1;
            p.core = *conn;
            p.right_cycle = c2;
            if (!two) {
              Word core = c1;
              core.insert(core.end(), conn->begin(), conn->end());
              p.left_cycle.clear();
              p.core = core;
            }
            pool_insert(sys, pool.points, seen, Point{p}, size);
          }
      };
      // short cycles and their connections first, so small pools still carry
      // a non-recurrent point and a stay-away pair where one exists
      add_periodic(2);
      add_heteroclinic(2);
      add_periodic(4);
      add_heteroclinic(4);
      // guard mirrors the grid lane: systems with few distinct points (a
      // single short cycle, say) can never fill a large pool
      long long guard = 0;
      while (static_cast<long long>(pool.points.size()) < size && guard++ < 64 * size) {
        // random admissible cycle: walk, then close at the first revisit of
        // the start letter; give up on walks that never return
        int start = static_cast<int>(rng() % sys.sft.alphabet);
        Word w = {start};
        bool closed = false;
        for (int t = 0; t < 24 && !closed; ++t) {
          std::vector<int> nexts;
          for (int b = 0; b < sys.sft.alphabet; ++b)
            if (sys.sft.transitions(w.back(), b)) nexts.push_back(b);
          int nb = nexts[rng() % nexts.size()];
          if (nb == start && w.size() >= 1) {
            closed = true;
          } else {
            w.push_back(nb);
          }
        }
        if (!closed) continue;
        SymbolicPoint p = periodic_point(w);
        if (!two) p.left_cycle.clear();
        pool_insert(sys, pool.points, seen, Point{p}, size);
      }
      break;
    }
    case SystemKind::grid: {
      const long long G = sys.grid.size;
      std::vector<long long> anchors = {0, 1, G / 2, G - 1, G / 3, G / 4, 2 * G / 3};
      for (long long a : anchors)
        pool_insert(sys, pool.points, seen, Point{((a % G) + G) % G}, size);
      long long guard = 0;
      while (static_cast<long long>(pool.points.size()) < std::min(size, G) &&
             guard++ < 64 * size) {
        pool_insert(sys, pool.points, seen, Point{static_cast<long long>(rng() % G)}, size);
      }
      break;
    }
    case SystemKind::substitution:
      // No eventually periodic configurations exist in an aperiodic
      // substitution subshift; word-level operations ignore the pool.
      break;
    case SystemKind::product: {
      std::vector<CandidatePool> parts;
      for (const auto& comp : sys.components) parts.push_back(make_pool(comp, size, seed));
      for (const auto& part : parts)
        if (part.points.empty()) return pool;
      long long guard = 0;
      while (static_cast<long long>(pool.points.size()) < size && guard++ < 64 * size) {
        std::vector<Point> tuple;
        for (const auto& part : parts) tuple.push_back(part.points[rng() % part.points.size()]);
        pool_insert(sys, pool.points, seen, Point{tuple}, size);
      }
      break;
    }
  }
  return pool;
}

}  // namespace orbitglue
