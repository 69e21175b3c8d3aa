#include "orbitglue/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "orbitglue/errors.hpp"
#include "orbitglue/gluing.hpp"
#include "scan_internal.hpp"

namespace orbitglue {

namespace {

// ln of a positive BigInt; large values are shifted down so the double
// conversion never overflows
double bigint_ln(const BigInt& v) {
  if (v <= 0) throw Error("bigint_ln needs a positive value");
  unsigned bits = boost::multiprecision::msb(v);
  if (bits <= 50) return std::log(v.convert_to<double>());
  BigInt shifted = v >> (bits - 50);
  return std::log(shifted.convert_to<double>()) +
         static_cast<double>(bits - 50) * std::log(2.0);
}

SeparatedSet sep_sft(const System& sys, long long n, const Rational& eps,
                     long long materialize_cap) {
  SeparatedSet out;
  out.n = n;
  out.eps = eps;
  int R = separation_radius(eps);
  if (R < 0) {
    out.size = 1;
    out.method = "eps at or above the diameter: no pair separates";
    return out;
  }
  const bool two = sys.sft.sidedness == Sidedness::two_sided;
  const long long W = n + (two ? 2LL * R : R);
  out.size = count_admissible_words(sys.sft, W);
  out.method = "admissible word count, window " + std::to_string(W) +
               " at separation radius " + std::to_string(R);
  if (out.size <= materialize_cap && W <= 62) {
    const long long start = two ? -R : 0;
    enumerate_admissible_words(sys.sft, static_cast<int>(W), [&](const Word& w) {
      MergedWindows runs;
      runs.ok = true;
      runs.runs = {{start, w}};
      out.points.push_back(materialize_from_runs(sys, runs));
    });
    out.materialized = BigInt(out.points.size()) == out.size;
  }
  return out;
}

SeparatedSet sep_odometer(const System& sys, long long n, const Rational& eps,
                          long long materialize_cap) {
  SeparatedSet out;
  out.n = n;
  out.eps = eps;
  int j = separation_radius(eps);
  // the odometer is an isometry, so n plays no role; pairwise distances are
  // 2^-min(v2(a-b)+1, depth), capped by the grid depth
  int k = std::min<int>(std::max(j, 0), sys.grid.depth);
  out.size = BigInt(1) << k;
  out.method = "isometry: one point per residue class mod 2^" + std::to_string(k);
  if (out.size <= materialize_cap) {
    for (long long v = 0; v < (1LL << k); ++v) out.points.push_back(Point{v});
    out.materialized = true;
  }
  return out;
}

SeparatedSet sep_rotation(const System& sys, long long n, const Rational& eps,
                          long long materialize_cap) {
  SeparatedSet out;
  out.n = n;
  out.eps = eps;
  const long long G = sys.grid.size;
  // smallest integer arc strictly above eps
  long long c_min = 1;
  while (Rational(c_min, G) <= eps && c_min <= G) ++c_min;
  if (c_min > G / 2) {
    out.size = 1;
    out.method = "isometry: eps at or above the diameter";
    return out;
  }
  out.size = G / c_min;
  out.method = "isometry: equally spaced arcs of " + std::to_string(c_min);
  if (out.size <= materialize_cap) {
    for (long long i = 0; i < G / c_min; ++i) out.points.push_back(Point{i * c_min});
    out.materialized = true;
  }
  return out;
}

// Integer reformulation of the separation test: arc/G > eps holds exactly
// when arc >= floor(eps * G) + 1, so orbits compare with no rational math.
struct GridSepScan {
  const GridCircleSystem& g;
  long long n;
  long long thr;

  GridSepScan(const GridCircleSystem& g_, long long n_, const Rational& eps)
      : g(g_), n(n_) {
    BigInt t = boost::multiprecision::numerator(eps) * g_.size /
                   boost::multiprecision::denominator(eps) +
               1;
    if (t > g_.size) t = g_.size + 1;
    thr = t.convert_to<long long>();
  }

  std::vector<long long> orbit(long long v) const {
    std::vector<long long> orb(n);
    for (long long k = 0; k < n; ++k) {
      orb[k] = v;
      v = grid_apply(g, v);
    }
    return orb;
  }

  bool separated(const std::vector<long long>& a, const std::vector<long long>& b) const {
    for (long long k = 0; k < n; ++k) {
      long long d = a[k] > b[k] ? a[k] - b[k] : b[k] - a[k];
      if (std::min(d, g.size - d) >= thr) return true;
    }
    return false;
  }
};

std::vector<long long> grid_greedy(const GridCircleSystem& g, long long n,
                                   const Rational& eps) {
  GridSepScan scan(g, n, eps);
  std::vector<long long> kept;
  std::vector<std::vector<long long>> kept_orbits;
  for (long long v = 0; v < g.size; ++v) {
    auto orb = scan.orbit(v);
    bool ok = true;
    for (const auto& u : kept_orbits)
      if (!scan.separated(u, orb)) {
        ok = false;
        break;
      }
    if (ok) {
      kept.push_back(v);
      kept_orbits.push_back(std::move(orb));
    }
  }
  return kept;
}

// Exact maximum separated subset by branch and bound over the
// "not separated" graph; gives up when the node budget runs out.
struct MisSearch {
  int n = 0;
  std::vector<std::vector<uint64_t>> adj;
  std::vector<int> best, cur;
  long long budget = 0;
  bool exhausted = false;
  int words = 0;

  static bool test(const std::vector<uint64_t>& s, int v) {
    return (s[v >> 6] >> (v & 63)) & 1;
  }

  void run(std::vector<uint64_t> cand) {
    if (exhausted) return;
    if (--budget < 0) {
      exhausted = true;
      return;
    }
    int remaining = 0;
    for (uint64_t w : cand) remaining += __builtin_popcountll(w);
    if (static_cast<int>(cur.size()) + remaining <= static_cast<int>(best.size())) return;
    int v = -1;
    for (int i = 0; i < words && v < 0; ++i)
      if (cand[i]) v = i * 64 + __builtin_ctzll(cand[i]);
    if (v < 0) {
      if (cur.size() > best.size()) best = cur;
      return;
    }
    cand[v >> 6] &= ~(1ULL << (v & 63));
    // include v
    std::vector<uint64_t> sub(words);
    for (int i = 0; i < words; ++i) sub[i] = cand[i] & ~adj[v][i];
    cur.push_back(v);
    run(sub);
    cur.pop_back();
    // exclude v
    run(cand);
  }
};

SeparatedSet sep_square(const System& sys, long long n, const Rational& eps,
                        long long materialize_cap) {
  SeparatedSet out;
  out.n = n;
  out.eps = eps;
  const GridCircleSystem& g = sys.grid;
  if (g.size <= 4096) {
    const int N = static_cast<int>(g.size);
    GridSepScan scan(g, n, eps);
    std::vector<std::vector<long long>> orbits(N);
    for (int v = 0; v < N; ++v) orbits[v] = scan.orbit(v);
    MisSearch mis;
    mis.n = N;
    mis.words = (N + 63) / 64;
    mis.adj.assign(N, std::vector<uint64_t>(mis.words, 0));
    for (int a = 0; a < N; ++a)
      for (int b = a + 1; b < N; ++b)
        if (!scan.separated(orbits[a], orbits[b])) {
          mis.adj[a][b >> 6] |= 1ULL << (b & 63);
          mis.adj[b][a >> 6] |= 1ULL << (a & 63);
        }
    mis.budget = 4'000'000;
    std::vector<uint64_t> all(mis.words, 0);
    for (int v = 0; v < N; ++v) all[v >> 6] |= 1ULL << (v & 63);
    for (long long v : grid_greedy(g, n, eps)) mis.best.push_back(static_cast<int>(v));
    mis.cur.clear();
    mis.run(all);
    if (!mis.exhausted) {
      out.size = static_cast<long long>(mis.best.size());
      out.exact = true;
      out.method = "exhaustive maximum over all residues";
      if (out.size <= materialize_cap) {
        std::sort(mis.best.begin(), mis.best.end());
        for (int v : mis.best) out.points.push_back(Point{static_cast<long long>(v)});
        out.materialized = true;
      }
      return out;
    }
  }
  auto kept = grid_greedy(g, n, eps);
  out.size = static_cast<long long>(kept.size());
  out.exact = false;
  out.method = "greedy scan over residues (lower bound)";
  if (out.size <= materialize_cap) {
    for (long long v : kept) out.points.push_back(Point{v});
    out.materialized = true;
  }
  return out;
}

SeparatedSet sep_subst(const System& sys, long long n, const Rational& eps,
                       const CandidatePool* pool) {
  if (pool)
    throw Unsupported(
        "substitution systems are handled word-level; separated counts are exact "
        "and their points cannot be materialized");
  SeparatedSet out;
  out.n = n;
  out.eps = eps;
  int R = separation_radius(eps);
  if (R < 0) {
    out.size = 1;
    out.method = "eps at or above the diameter: no pair separates";
    return out;
  }
  const long long W = n + 2LL * R;
  if (W > sys.subst.prefix_length / 4)
    throw BadArgs("window exceeds the reliable range of the stored prefix");
  out.size = static_cast<long long>(subst_factors(sys.subst, static_cast<int>(W)).size());
  out.method = "factor count, window " + std::to_string(W) + " at separation radius " +
               std::to_string(R);
  return out;
}

SeparatedSet sep_pool(const System& sys, long long n, const Rational& eps,
                      const CandidatePool* pool) {
  if (!pool) throw PoolRequired("separated sets on this system need a candidate pool");
  if (pool->points.empty()) throw EmptyPool("separated-set search got an empty pool");
  SeparatedSet out;
  out.n = n;
  out.eps = eps;
  std::vector<Point> kept;
  for (const auto& p : pool->points) {
    bool ok = true;
    for (const auto& q : kept) {
      bool sep = false;
      Point a = p, b = q;
      for (long long k = 0; k < n && !sep; ++k) {
        if (distance(sys, a, b) > eps) sep = true;
        a = apply_map(sys, a);
        b = apply_map(sys, b);
      }
      if (!sep) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(p);
  }
  out.size = static_cast<long long>(kept.size());
  out.exact = false;
  out.method = "pool greedy (lower bound), " + pool->descriptor;
  out.points = std::move(kept);
  out.materialized = true;
  return out;
}

}  // namespace

SeparatedSet separated_set(const System& sys, long long n, const Rational& eps,
                           const CandidatePool* pool, long long materialize_cap) {
  if (n < 1) throw BadArgs("separated sets need n >= 1");
  if (eps <= 0) throw BadArgs("eps must be positive");
  switch (sys.kind) {
    case SystemKind::sft:
      return sep_sft(sys, n, eps, materialize_cap);
    case SystemKind::grid:
      switch (sys.grid.map) {
        case GridMap::odometer:
          return sep_odometer(sys, n, eps, materialize_cap);
        case GridMap::rotation:
          return sep_rotation(sys, n, eps, materialize_cap);
        case GridMap::square:
          return sep_square(sys, n, eps, materialize_cap);
      }
      throw Error("unreachable grid map");
    case SystemKind::substitution:
      return sep_subst(sys, n, eps, pool);
    case SystemKind::product:
      return sep_pool(sys, n, eps, pool);
  }
  throw Error("unreachable system kind");
}

EntropyReport entropy_estimate(const System& sys, const std::vector<Rational>& eps_list,
                               long long n_max, const CandidatePool* pool) {
  if (eps_list.empty()) throw BadArgs("entropy estimates need at least one eps");
  for (size_t i = 0; i < eps_list.size(); ++i) {
    if (eps_list[i] <= 0) throw BadArgs("every eps must be positive");
    if (i > 0 && eps_list[i] >= eps_list[i - 1])
      throw BadArgs("eps list must be strictly decreasing");
  }
  if (n_max < 2) throw BadArgs("entropy estimates need n_max >= 2");

  EntropyReport rep;
  const long long n_mid = n_max / 2;
  for (const auto& eps : eps_list) {
    BigInt c_mid = 0, c_max = 0;
    for (long long n = 1; n <= n_max; ++n) {
      auto s = separated_set(sys, n, eps, pool, 0);
      EntropyRow row;
      row.eps = eps;
      row.n = n;
      row.count = s.size;
      row.slope = bigint_ln(s.size) / static_cast<double>(n);
      row.exact = s.exact;
      if (!s.exact) rep.exact = false;
      if (n == n_mid) c_mid = s.size;
      if (n == n_max) c_max = s.size;
      rep.rows.push_back(std::move(row));
    }
    // equal counts pin the tail quotient to exactly zero
    double h = 0.0;
    if (c_max != c_mid)
      h = (bigint_ln(c_max) - bigint_ln(c_mid)) / static_cast<double>(n_max - n_mid);
    if (h < 0.0) h = 0.0;  // inexact lower bounds may dip
    rep.h_estimate = std::max(rep.h_estimate, h);
  }
  if (sys.kind == SystemKind::sft) rep.oracle = sft_entropy_oracle(sys);
  rep.notes = rep.exact ? "all counts exact"
                        : "some counts are greedy lower bounds; the estimate may undershoot";
  return rep;
}

OracleInterval sft_entropy_oracle(const System& sys) {
  if (sys.kind != SystemKind::sft) throw NotAnSft("the spectral oracle needs an SFT");
  const auto& A = sys.sft.transitions;
  const int n = sys.sft.alphabet;
  auto ids = scc_ids(A);
  int groups = 0;
  for (int v = 0; v < n; ++v) groups = std::max(groups, ids[v] + 1);

  Rational lo_rho = 0, hi_rho = 0;
  bool any = false;
  for (int c = 0; c < groups; ++c) {
    std::vector<int> letters;
    for (int v = 0; v < n; ++v)
      if (ids[v] == c) letters.push_back(v);
    if (letters.empty()) continue;
    const int k = static_cast<int>(letters.size());
    // Collatz-Wielandt on B + I (primitive since the block is strongly
    // connected): min_i (Bx+x)_i/x_i <= rho(B)+1 <= max_i (Bx+x)_i/x_i
    Rational blo = 0, bhi = 0;
    long long iters = 128;
    long long scale_bits = 48;
    for (int attempt = 0; attempt < 6; ++attempt) {
      std::vector<double> x(k, 1.0);
      for (long long it = 0; it < iters; ++it) {
        std::vector<double> y(k, 0.0);
        double m = 0.0;
        for (int i = 0; i < k; ++i) {
          y[i] = x[i];
          for (int j = 0; j < k; ++j)
            if (A(letters[i], letters[j])) y[i] += x[j];
          m = std::max(m, y[i]);
        }
        for (int i = 0; i < k; ++i) x[i] = y[i] / m;
      }
      std::vector<BigInt> X(k);
      for (int i = 0; i < k; ++i) {
        X[i] = BigInt(static_cast<long long>(x[i] * std::pow(2.0, 40))) << (scale_bits - 40);
        if (X[i] <= 0) X[i] = 1;
      }
      bool first = true;
      for (int i = 0; i < k; ++i) {
        BigInt y = X[i];
        for (int j = 0; j < k; ++j)
          if (A(letters[i], letters[j])) y += X[j];
        Rational ratio(y, X[i]);
        if (first || ratio < blo) blo = ratio;
        if (first || ratio > bhi) bhi = ratio;
        first = false;
      }
      if (bhi - blo < Rational(1, 2000000)) break;
      iters *= 4;
      scale_bits += 16;
    }
    blo -= 1;
    bhi -= 1;
    if (!any || blo > lo_rho) lo_rho = blo;
    if (!any || bhi > hi_rho) hi_rho = bhi;
    any = true;
  }
  if (!any) throw Error("validated SFT with no cycle");

  OracleInterval out;
  out.spectral_lo = rational_to_string(lo_rho);
  out.spectral_hi = rational_to_string(hi_rho);
  out.lo = std::log(to_double(lo_rho));
  out.hi = std::log(to_double(hi_rho));
  return out;
}

double spec_entropy_bound(long long N, long long M) {
  if (N < 2) throw BadArgs("the bound needs at least two separated points");
  if (M < 1) throw BadArgs("the gap bound must be >= 1");
  return std::log(static_cast<double>(N)) / static_cast<double>(M);
}

PeriodicGrowth periodic_counts(const System& sys, int n_max) {
  if (sys.kind != SystemKind::sft) throw NotAnSft("periodic counting needs an SFT");
  if (n_max < 1 || n_max > 24) throw BadArgs("periodic counts support n_max in [1, 24]");

  PeriodicGrowth out;
  out.least_period.assign(n_max, 0);
  for (const auto& cyc : admissible_cycles_up_to(sys.sft, n_max))
    out.least_period[cyc.size() - 1] += static_cast<long long>(cyc.size());

  out.fixed_counts.assign(n_max, 0);
  for (int m = 1; m <= n_max; ++m)
    for (int d = 1; d <= m; ++d)
      if (m % d == 0) out.fixed_counts[m - 1] += out.least_period[d - 1];

  out.cumulative.assign(n_max, 0);
  BigInt running = 0;
  for (int m = 1; m <= n_max; ++m) {
    running += out.least_period[m - 1];
    out.cumulative[m - 1] = running;
    if (running > 0)
      out.growth_rate =
          std::max(out.growth_rate, bigint_ln(running) / static_cast<double>(m));
  }

  // cross-check: fixed points of f^n are closed walks, counted by traces
  const int k = sys.sft.alphabet;
  std::vector<std::vector<BigInt>> P(k, std::vector<BigInt>(k, 0)), A = P;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) A[i][j] = sys.sft.transitions(i, j);
  P = A;
  for (int m = 1; m <= n_max; ++m) {
    BigInt tr = 0;
    for (int i = 0; i < k; ++i) tr += P[i][i];
    if (tr != out.fixed_counts[m - 1])
      throw Error("cycle enumeration disagrees with trace counts at n=" + std::to_string(m));
    if (m == n_max) break;
    std::vector<std::vector<BigInt>> Q(k, std::vector<BigInt>(k, 0));
    for (int i = 0; i < k; ++i)
      for (int l = 0; l < k; ++l) {
        if (P[i][l] == 0) continue;
        for (int j = 0; j < k; ++j)
          if (A[l][j] != 0) Q[i][j] += P[i][l] * A[l][j];
      }
    P = std::move(Q);
  }
  return out;
}

namespace detail {

// d(f^k a, b) for eventually periodic configurations is eventually periodic
// in k; this horizon covers one full cycle past the point where the moving
// window has left the core.
long long symbolic_horizon(const SymbolicPoint& p, int window) {
  long long core_end = static_cast<long long>(p.core.size()) - p.origin_offset;
  long long rc = std::max<std::size_t>(p.right_cycle.size(), 1);
  return std::max<long long>(core_end, 0) + window + rc + 2;
}

AwayScan scan_away(const System& sys, const Point& a, const Point& b, const Rational& eps,
                   long long from, long long bounded_horizon) {
  AwayScan out;
  long long H = bounded_horizon;
  if (sys.kind == SystemKind::sft) {
    int W = std::max(shadow_radius(eps), separation_radius(eps)) + 2;
    H = symbolic_horizon(a.symbolic(), W) + from;
  } else if (sys.kind == SystemKind::grid) {
    H = 2 * sys.grid.size + 2;  // value revisit happens within G steps
  } else {
    out.exact = false;  // bounded scan only
  }
  Point cur = from == 0 ? a : apply_map(sys, a, from);
  std::set<std::string> seen;
  for (long long k = from; k <= H; ++k) {
    if (sys.kind == SystemKind::grid) {
      std::string key = std::to_string(cur.grid());
      if (!seen.insert(key).second) return out;  // orbit cycled: all repeats
    }
    Rational d = distance(sys, cur, b);
    if (d < eps) {
      out.holds = false;
      out.first_bad = k;
      out.bad_distance = d;
      return out;
    }
    cur = apply_map(sys, cur);
  }
  return out;
}

StayAwayCheck stay_away_report(const System& sys, const Point& x, const Point& y,
                               const Rational& eps) {
  StayAwayCheck out;
  struct Leg {
    const char* name;
    const Point& a;
    const Point& b;
    long long from;
  };
  const Leg legs[] = {{"x-return", x, x, 1},
                      {"x to y", x, y, 0},
                      {"y to x", y, x, 0},
                      {"y-return", y, y, 1}};
  out.holds = true;
  out.exact = true;
  std::ostringstream detail;
  for (const auto& leg : legs) {
    auto got = scan_away(sys, leg.a, leg.b, eps, leg.from);
    if (!got.exact) out.exact = false;
    if (!got.holds) {
      out.holds = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << leg.name << " enters the eps-ball at step " << got.first_bad
             << " (distance " << rational_to_string(got.bad_distance) << ")";
    }
  }
  out.detail = out.holds ? "both orbits stay eps-away from each other and from returning"
                         : detail.str();
  return out;
}

}  // namespace detail

DichotomyResult dichotomy_construction(const System& sys, const Point& x, const Point& y,
                                       const Rational& eps, int n, long long cap,
                                       const CandidatePool* pool) {
  if (eps <= 0) throw BadArgs("eps must be positive");
  if (n < 1 || n > 12) throw BadArgs("pattern length n must be in [1, 12]");
  if (sys.kind == SystemKind::substitution)
    throw Unsupported("substitution systems are handled word-level; the dichotomy "
                      "construction needs pointwise orbits");

  DichotomyResult out;
  out.eps = eps;
  out.n = n;

  // working scale: largest dyadic step at or below eps / 3
  int r = 0;
  while (pow2(-r) > eps / 3) ++r;
  out.radius = r;
  out.eps_fine = pow2(-r);

  auto profile = gluing_profile(sys, out.eps_fine, 3, 2, pool, cap);
  if (profile.status != ProfileStatus::finite)
    throw GluingFailed("no finite gluing bound at scale " + rational_to_string(out.eps_fine) +
                       ": " + profile.certificate);
  const long long m = profile.bound;
  out.segment_length = m;
  out.span = 2 * m * n;

  out.stay_away = detail::stay_away_report(sys, x, y, eps);

  // one interleaved witness per binary pattern; gaps are re-searched per
  // pattern so every witness carries its own feasible schedule
  long long max_end = 0;
  for (long long bits = 0; bits < (1LL << n); ++bits) {
    std::string pat;
    OrbitSequence seq;
    for (int j = 0; j < n; ++j) {
      bool use_x = (bits >> (n - 1 - j)) & 1;
      pat += use_x ? '1' : '0';
      seq.push_back({use_x ? x : y, m});
    }
    auto found = find_gap_and_shadow(sys, seq, out.eps_fine, std::max<long long>(m, 4), pool);
    if (!found.found)
      throw GluingFailed("pattern " + pat + " admits no gap within the gluing bound");
    out.patterns.push_back(pat);
    out.witnesses.push_back(*found.witness);
    out.gaps.push_back(found.gap);
    long long end = m;
    for (long long t : found.gap) end += t + m - 1;
    max_end = std::max(max_end, end);
  }
  const long long horizon = out.span;

  // exact pairwise separation at the fine scale over the 2mn window
  std::vector<std::vector<Point>> orbits;
  orbits.reserve(out.witnesses.size());
  for (const auto& w : out.witnesses) {
    std::vector<Point> orb;
    orb.reserve(horizon);
    Point cur = w;
    for (long long k = 0; k < horizon; ++k) {
      orb.push_back(cur);
      cur = apply_map(sys, cur);
    }
    orbits.push_back(std::move(orb));
  }
  bool all_separated = true;
  for (size_t p = 0; p < orbits.size() && all_separated; ++p)
    for (size_t q = p + 1; q < orbits.size(); ++q) {
      bool sep = false;
      for (long long k = 0; k < horizon && !sep; ++k)
        if (distance(sys, orbits[p][k], orbits[q][k]) > out.eps_fine) sep = true;
      if (!sep) {
        all_separated = false;
        break;
      }
    }
  out.separation_verified = all_separated;
  if (!all_separated && !out.stay_away.holds)
    throw StayAwayViolated("the pair fails the stay-away hypothesis and its witnesses do "
                           "not separate: " + out.stay_away.detail);

  out.entropy_lower_bound = std::log(2.0) / static_cast<double>(2 * m);
  std::ostringstream detail;
  detail << (1LL << n) << " interleaved witnesses, segment length " << m
         << ", schedules end by " << max_end << ", separation checked over " << horizon
         << " steps at " << rational_to_string(out.eps_fine);
  out.detail = detail.str();
  return out;
}

}  // namespace orbitglue
