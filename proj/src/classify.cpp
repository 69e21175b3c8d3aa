#include "orbitglue/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "orbitglue/errors.hpp"
#include "scan_internal.hpp"

namespace orbitglue {

namespace {

std::string word_text(const Word& w) {
  std::string s;
  for (int a : w) s += std::to_string(a);
  return s;
}

std::string point_text(const Point& p) {
  if (p.is_product()) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.parts().size(); ++i)
      s += (i ? ", " : "") + point_text(p.parts()[i]);
    return s + ")";
  }
  if (!p.is_symbolic()) return "z=" + std::to_string(p.grid());
  const SymbolicPoint& sp = p.symbolic();
  std::ostringstream os;
  if (sp.core.empty() && sp.left_cycle == sp.right_cycle) {
    os << "[" << word_text(sp.right_cycle) << "]^inf";
    return os.str();
  }
  if (!sp.left_cycle.empty()) os << "[" << word_text(sp.left_cycle) << "]^inf.";
  if (!sp.core.empty()) os << word_text(sp.core) << ".";
  os << "[" << word_text(sp.right_cycle) << "]^inf";
  return os.str();
}

Verdict make_verdict(VerdictValue v, bool exact, std::string scope, std::string cert) {
  Verdict out;
  out.value = v;
  out.exact = exact;
  out.scope = std::move(scope);
  out.certificate = std::move(cert);
  return out;
}

// ---- SFT graph structure ----

std::vector<std::vector<bool>> reach_table(const Eigen::MatrixXi& t) {
  int A = static_cast<int>(t.rows());
  std::vector<std::vector<bool>> reach(A, std::vector<bool>(A, false));
  for (int s = 0; s < A; ++s) {
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < A; ++w)
        if (t(v, w) && !reach[s][w]) {
          reach[s][w] = true;
          stack.push_back(w);
        }
    }
  }
  return reach;
}

bool sft_single_successor(const SymbolicSystem& s) {
  for (int a = 0; a < s.alphabet; ++a) {
    int deg = 0;
    for (int b = 0; b < s.alphabet; ++b) deg += s.transitions(a, b) ? 1 : 0;
    if (deg != 1) return false;
  }
  return true;
}

// First letter with two successors; the graph is essential, so when this
// exists the space is infinite and carries arbitrarily close splitting pairs.
struct Branch {
  int at = -1;
  int lo = -1;
  int hi = -1;
};

Branch find_branch(const SymbolicSystem& s) {
  Branch br;
  for (int a = 0; a < s.alphabet && br.at < 0; ++a) {
    std::vector<int> succ;
    for (int b = 0; b < s.alphabet; ++b)
      if (s.transitions(a, b)) succ.push_back(b);
    if (succ.size() >= 2) {
      br.at = a;
      br.lo = succ[0];
      br.hi = succ[1];
    }
  }
  return br;
}

// ---- grid structure ----

// Residues with no preimage. Orbits contain such a residue only as start, so
// two of them rule out a covering orbit.
std::vector<long long> grid_orphans(const GridCircleSystem& g) {
  std::vector<char> hit(static_cast<std::size_t>(g.size), 0);
  for (long long v = 0; v < g.size; ++v) hit[static_cast<std::size_t>(grid_apply(g, v))] = 1;
  std::vector<long long> out;
  for (long long v = 0; v < g.size; ++v)
    if (!hit[static_cast<std::size_t>(v)]) out.push_back(v);
  return out;
}

// First residue the forward orbit of `start` never visits, or -1 when the
// orbit covers everything. Exact: the walk stops at the first value revisit.
long long grid_orbit_misses(const GridCircleSystem& g, long long start) {
  std::vector<char> seen(static_cast<std::size_t>(g.size), 0);
  long long v = start;
  while (!seen[static_cast<std::size_t>(v)]) {
    seen[static_cast<std::size_t>(v)] = 1;
    v = grid_apply(g, v);
  }
  for (long long r = 0; r < g.size; ++r)
    if (!seen[static_cast<std::size_t>(r)]) return r;
  return -1;
}

std::string grid_resolution_text(const GridCircleSystem& g) {
  return "1/" + std::to_string(2 * g.size);
}

// ---- substitution word census ----

struct FactorSpan {
  long long count = 0;
  long long max_first = -1;
  long long min_last = -1;
};

FactorSpan factor_span(const SubstitutionSystem& s, int len) {
  std::map<std::string, std::pair<long long, long long>> occ;
  const Word& pre = s.prefix;
  for (long long i = 0; i + len <= static_cast<long long>(pre.size()); ++i) {
    std::string w;
    w.reserve(static_cast<std::size_t>(len));
    for (int k = 0; k < len; ++k) w += static_cast<char>('0' + pre[i + k]);
    auto it = occ.find(w);
    if (it == occ.end())
      occ.emplace(std::move(w), std::make_pair(i, i));
    else
      it->second.second = i;
  }
  FactorSpan out;
  out.count = static_cast<long long>(occ.size());
  for (const auto& [w, fl] : occ) {
    out.max_first = std::max(out.max_first, fl.first);
    out.min_last = out.min_last < 0 ? fl.second : std::min(out.min_last, fl.second);
  }
  return out;
}

// Word-level checks stay O(prefix * len); larger caps grow quadratically
// without adding certainty at the stored prefix length.
long long subst_cap(long long cap) { return std::clamp<long long>(cap, 1, 64); }

}  // namespace

std::string verdict_name(VerdictValue v) {
  switch (v) {
    case VerdictValue::yes:
      return "yes";
    case VerdictValue::no:
      return "no";
    case VerdictValue::unknown:
      return "unknown";
  }
  throw Error("unhandled verdict value");
}

Verdict is_transitive(const System& sys, long long cap) {
  validate(sys);
  if (cap < 1) throw BadArgs("cap must be >= 1");
  switch (sys.kind) {
    case SystemKind::sft: {
      auto reach = reach_table(sys.sft.transitions);
      for (int a = 0; a < sys.sft.alphabet; ++a)
        for (int b = 0; b < sys.sft.alphabet; ++b)
          if (!reach[a][b])
            return make_verdict(VerdictValue::no, true, "exact",
                                "no path from letter " + std::to_string(a) + " to letter " +
                                    std::to_string(b) + " in the transition graph");
      std::ostringstream cert;
      cert << "every ordered letter pair is connected";
      if (sys.sft.alphabet <= 6) {
        cert << ":";
        for (int a = 0; a < sys.sft.alphabet; ++a)
          for (int b = 0; b < sys.sft.alphabet; ++b) {
            if (a == b) continue;
            auto conn = shortest_connector(sys.sft, a, b);
            cert << " " << a << "->" << b << ":" << (conn ? word_text(*conn) : "?");
          }
      }
      return make_verdict(VerdictValue::yes, true, "exact", cert.str());
    }
    case SystemKind::grid: {
      const auto& g = sys.grid;
      auto orphans = grid_orphans(g);
      if (orphans.size() >= 2)
        return make_verdict(
            VerdictValue::no, true, "exact",
            "z=" + std::to_string(orphans[0]) + " and z=" + std::to_string(orphans[1]) +
                " have no preimage; an orbit contains such a residue only as its start, so no "
                "single orbit visits both");
      long long start = orphans.empty() ? 0 : orphans[0];
      long long missed = grid_orbit_misses(g, start);
      if (missed < 0)
        return make_verdict(VerdictValue::yes, true, "exact",
                            "the orbit of z=" + std::to_string(start) +
                                " visits every residue, so it meets every ball of radius " +
                                grid_resolution_text(g));
      // With one orphan the covering orbit must start there; with none the
      // map is a bijection and every orbit is a cycle of the same length.
      return make_verdict(VerdictValue::no, true, "exact",
                          "the orbit of z=" + std::to_string(start) +
                              " misses the ball of radius " + grid_resolution_text(g) +
                              " around z=" + std::to_string(missed));
    }
    case SystemKind::substitution: {
      long long L = subst_cap(cap);
      // Every pair of length-L factors embeds as u.z.v iff the latest first
      // occurrence still precedes the earliest last occurrence; shorter pairs
      // embed inside extensions of length L.
      auto span = factor_span(sys.subst, static_cast<int>(L));
      std::ostringstream scope;
      scope << "factor pairs through length " << L << " inside the stored prefix";
      if (span.min_last >= span.max_first + L) {
        std::ostringstream cert;
        cert << "every length-" << L << " factor first occurs by index " << span.max_first
             << " and last occurs at index " << span.min_last
             << " or later, so every ordered factor pair embeds in a longer factor";
        return make_verdict(VerdictValue::yes, false, scope.str(), cert.str());
      }
      return make_verdict(VerdictValue::unknown, false, scope.str(),
                          "the stored prefix does not exhibit an embedding for every ordered "
                          "factor pair at this length");
    }
    case SystemKind::product:
      throw Unsupported("transitivity of product systems is not decided componentwise");
  }
  throw Unsupported("unknown system kind");
}

Verdict is_minimal(const System& sys, long long cap) {
  validate(sys);
  if (cap < 1) throw BadArgs("cap must be >= 1");
  switch (sys.kind) {
    case SystemKind::sft: {
      bool single = sft_single_successor(sys.sft);
      auto reach = reach_table(sys.sft.transitions);
      bool irreducible = true;
      for (int a = 0; a < sys.sft.alphabet && irreducible; ++a)
        for (int b = 0; b < sys.sft.alphabet && irreducible; ++b)
          if (!reach[a][b]) irreducible = false;
      if (single && irreducible)
        return make_verdict(VerdictValue::yes, true, "exact",
                            "the transition graph is a single cycle through all " +
                                std::to_string(sys.sft.alphabet) +
                                " letters; the space is one periodic orbit");
      // Any essential graph that is not a single cycle carries at least two
      // simple cycles, each of length <= alphabet.
      auto cycles = admissible_cycles_up_to(sys.sft, sys.sft.alphabet);
      if (cycles.size() < 2) throw Error("non-cycle transition graph with fewer than two cycles");
      return make_verdict(VerdictValue::no, true, "exact",
                          "the periodic point [" + word_text(cycles[0]) +
                              "]^inf never enters the 1/2-ball around [" + word_text(cycles[1]) +
                              "]^inf");
    }
    case SystemKind::grid: {
      const auto& g = sys.grid;
      auto orphans = grid_orphans(g);
      if (orphans.empty()) {
        long long missed = grid_orbit_misses(g, 0);
        if (missed < 0)
          return make_verdict(VerdictValue::yes, true, "exact",
                              "the map permutes the residues in a single cycle; every orbit "
                              "visits every ball of radius " +
                                  grid_resolution_text(g));
        return make_verdict(VerdictValue::no, true, "exact",
                            "the orbit of z=0 misses the ball of radius " +
                                grid_resolution_text(g) + " around z=" + std::to_string(missed));
      }
      long long u = orphans[0];
      long long y = grid_apply(g, u);
      return make_verdict(VerdictValue::no, true, "exact",
                          "z=" + std::to_string(u) + " has no preimage, so the orbit of z=" +
                              std::to_string(y) + " never re-enters the ball of radius " +
                              grid_resolution_text(g) + " around it");
    }
    case SystemKind::substitution: {
      long long L = subst_cap(cap);
      std::ostringstream scope;
      scope << "factors through length " << L << " inside the stored prefix";
      auto R = subst_recurrence_bound(sys.subst, static_cast<int>(L));
      if (!R)
        return make_verdict(VerdictValue::unknown, false, scope.str(),
                            "some window of the stored prefix misses a length-" +
                                std::to_string(L) + " factor; recurrence is not certified");
      std::ostringstream cert;
      cert << "every factor of length l occurs in every window of length R(l):";
      for (long long l = 1; l <= L; l *= 2) {
        auto Rl = subst_recurrence_bound(sys.subst, static_cast<int>(l));
        if (!Rl)
          return make_verdict(VerdictValue::unknown, false, scope.str(),
                              "recurrence fails at length " + std::to_string(l));
        cert << " R(" << l << ")=" << *Rl;
      }
      return make_verdict(VerdictValue::yes, false, scope.str(), cert.str());
    }
    case SystemKind::product:
      throw Unsupported("minimality of product systems is not decided componentwise");
  }
  throw Unsupported("unknown system kind");
}

ModulusResult equicontinuity_modulus(const System& sys, const Rational& eps, long long horizon,
                                     const CandidatePool* pool) {
  validate(sys);
  if (!(eps > Rational(0))) throw BadArgs("eps must be positive");
  if (horizon < 1) throw BadArgs("horizon must be >= 1");
  if (sys.kind == SystemKind::substitution)
    throw Unsupported("substitution systems are handled word-level; no pointwise modulus");

  ModulusResult out;
  if (eps > Rational(1)) {
    // Above the diameter every pair trivially stays inside the eps-ball.
    out.equicontinuous = make_verdict(VerdictValue::yes, true, "exact",
                                      "eps exceeds the metric diameter; delta = eps works");
    out.delta = eps;
    return out;
  }

  if (sys.kind == SystemKind::grid) {
    const auto& g = sys.grid;
    if (g.map == GridMap::rotation || g.map == GridMap::odometer) {
      out.isometry = true;
      out.equicontinuous = make_verdict(
          VerdictValue::yes, true, "exact",
          "rotations and odometers preserve the metric, so delta = eps is a valid modulus");
      out.delta = eps;
      return out;
    }
    // Non-isometric grid: scan pairs of adjacent residues. A separating pair
    // at distance 1/G means no modulus above the grid resolution exists.
    long long H = std::min<long long>(horizon, 128);
    for (long long x = g.size - 1; x >= 0; --x) {
      long long a = x, b = (x + 1) % g.size;
      for (long long n = 1; n <= H; ++n) {
        a = grid_apply(g, a);
        b = grid_apply(g, b);
        if (!(grid_distance(g, a, b) < eps)) {
          out.equicontinuous = make_verdict(
              VerdictValue::no, true, "exact at the grid resolution",
              "the adjacent residues z=" + std::to_string(x) + " and z=" +
                  std::to_string((x + 1) % g.size) + " lie 1/" + std::to_string(g.size) +
                  " apart yet separate to at least " + rational_to_string(eps) + " at time " +
                  std::to_string(n) + "; no modulus above the grid resolution exists");
          out.pair = {Point{x}, Point{(x + 1) % g.size}};
          out.witness_time = n;
          return out;
        }
        if (a == b) break;  // merged orbits never separate
      }
    }
    if (g.size > 1024) {
      out.equicontinuous =
          make_verdict(VerdictValue::unknown, false, "pairs at the grid resolution only",
                       "adjacent residues never separate within the horizon; coarser pair "
                       "distances were not scanned at this grid size");
      return out;
    }
    // Small grid: grow the pair distance until something separates; the last
    // surviving distance is an exact modulus.
    for (long long k = 2; 2 * k <= g.size; ++k) {
      for (long long x = 0; x < g.size; ++x) {
        long long a = x, b = (x + k) % g.size;
        for (long long n = 1; n <= H; ++n) {
          a = grid_apply(g, a);
          b = grid_apply(g, b);
          if (!(grid_distance(g, a, b) < eps)) {
            Rational delta(k, g.size);
            out.equicontinuous = make_verdict(
                VerdictValue::yes, true, "exact",
                "pairs closer than " + rational_to_string(delta) +
                    " never separate to eps within a revisit; the pair (z=" + std::to_string(x) +
                    ", z=" + std::to_string((x + k) % g.size) + ") separates at time " +
                    std::to_string(n));
            out.delta = delta < eps ? delta : eps;
            out.pair = {Point{x}, Point{(x + k) % g.size}};
            out.witness_time = n;
            return out;
          }
          if (a == b) break;
        }
      }
    }
    out.equicontinuous = make_verdict(VerdictValue::yes, true, "exact",
                                      "no pair of residues ever separates to eps");
    out.delta = eps;
    return out;
  }

  if (sys.kind == SystemKind::sft) {
    if (sft_single_successor(sys.sft)) {
      out.equicontinuous = make_verdict(
          VerdictValue::yes, true, "exact",
          "every letter has a unique successor, so the space is a finite union of periodic "
          "orbits and distinct points already differ at coordinate 0");
      out.delta = eps;
      return out;
    }
    // A supplied pool may carry its own counterexample; report that pair
    // when present so external candidates stay visible.
    if (pool) {
      for (std::size_t i = 0; i < pool->points.size(); ++i)
        for (std::size_t j = i + 1; j < pool->points.size(); ++j) {
          const Point& x = pool->points[i];
          const Point& y = pool->points[j];
          if (!(distance(sys, x, y) < eps)) continue;
          Point cx = x, cy = y;
          int w = separation_radius(eps) + 2;
          long long H = std::min<long long>(
              horizon, std::max(detail::symbolic_horizon(x.symbolic(), w),
                                detail::symbolic_horizon(y.symbolic(), w)));
          for (long long n = 1; n <= H; ++n) {
            cx = apply_map(sys, cx);
            cy = apply_map(sys, cy);
            if (!(distance(sys, cx, cy) < eps)) {
              out.equicontinuous = make_verdict(
                  VerdictValue::no, true, "exact (branching letter)",
                  "pool pair " + point_text(x) + ", " + point_text(y) + " at distance " +
                      rational_to_string(distance(sys, x, y)) + " separates to at least " +
                      rational_to_string(eps) + " at time " + std::to_string(n));
              out.pair = {x, y};
              out.witness_time = n;
              return out;
            }
          }
        }
    }
    // Structural pair: agree through coordinate c, split at c + 1. The same
    // construction works at every scale, so the negative answer is exact.
    Branch br = find_branch(sys.sft);
    if (br.at < 0) throw Error("branching letter expected in a non-permutation graph");
    long long c = std::max<long long>(5, separation_radius(eps) + 4);
    Word walk;  // path of length c ending at the branch letter
    int at = br.at;
    for (long long k = 0; k < c; ++k) {
      int p = -1;
      for (int q = 0; q < sys.sft.alphabet; ++q)
        if (sys.sft.transitions(q, at)) {
          p = q;
          break;
        }
      walk.insert(walk.begin(), p);
      at = p;
    }
    Word wx = walk, wy = walk;
    wx.push_back(br.at);
    wx.push_back(br.lo);
    wy.push_back(br.at);
    wy.push_back(br.hi);
    MergedWindows mx, my;
    mx.ok = my.ok = true;
    mx.runs = {{0, wx}};
    my.runs = {{0, wy}};
    Point x = materialize_from_runs(sys, mx);
    Point y = materialize_from_runs(sys, my);
    Rational d0 = distance(sys, x, y);
    Point cx = x, cy = y;
    long long wit = -1;
    for (long long n = 1; n <= c + 2 && wit < 0; ++n) {
      cx = apply_map(sys, cx);
      cy = apply_map(sys, cy);
      if (!(distance(sys, cx, cy) < eps)) wit = n;
    }
    if (wit < 0) throw Error("splitting pair failed to separate");
    out.equicontinuous = make_verdict(
        VerdictValue::no, true, "exact (branching letter)",
        "letter " + std::to_string(br.at) + " admits successors " + std::to_string(br.lo) +
            " and " + std::to_string(br.hi) +
            "; configurations agreeing out to coordinate " + std::to_string(c) +
            " (distance " + rational_to_string(d0) + ") separate to at least " +
            rational_to_string(eps) + " at time " + std::to_string(wit) +
            ", and the split can be pushed to any coordinate");
    out.pair = {x, y};
    out.witness_time = wit;
    return out;
  }

  // Product lane: pool pairs witness separation or survive the horizon.
  if (!pool || pool->points.empty())
    throw EmptyPool("equicontinuity scan needs a candidate pool for product systems");
  Rational best = eps;
  for (std::size_t i = 0; i < pool->points.size(); ++i)
    for (std::size_t j = i + 1; j < pool->points.size(); ++j) {
      const Point& x = pool->points[i];
      const Point& y = pool->points[j];
      Rational d0 = distance(sys, x, y);
      if (!(d0 < eps)) continue;
      Point cx = x, cy = y;
      for (long long n = 1; n <= horizon; ++n) {
        cx = apply_map(sys, cx);
        cy = apply_map(sys, cy);
        if (!(distance(sys, cx, cy) < eps)) {
          out.equicontinuous =
              make_verdict(VerdictValue::unknown, false, "pool pairs within the horizon",
                           "a pool pair at distance " + rational_to_string(d0) +
                               " separates at time " + std::to_string(n) +
                               "; every modulus above that distance is refuted, smaller "
                               "scales were not explored");
          out.pair = {x, y};
          out.witness_time = n;
          return out;
        }
      }
      if (d0 < best) best = d0;
    }
  out.equicontinuous = make_verdict(VerdictValue::yes, false, "pool pairs within the horizon",
                                    "no scanned pair separates to eps within the horizon");
  out.delta = best;
  return out;
}

NonrecurrenceResult find_nonrecurrent(const System& sys, const Rational& eps, long long horizon,
                                      const CandidatePool* pool) {
  validate(sys);
  if (!(eps > Rational(0))) throw BadArgs("eps must be positive");
  if (horizon < 1) throw BadArgs("horizon must be >= 1");
  NonrecurrenceResult out;
  out.eps = eps;
  out.horizon = horizon;
  if (sys.kind == SystemKind::substitution) {
    out.detail = "substitution systems carry no representable points; nothing scanned";
    return out;
  }
  if (sys.kind == SystemKind::grid) {
    bool all_exact = true;
    for (long long v = 0; v < sys.grid.size; ++v) {
      auto got = detail::scan_away(sys, Point{v}, Point{v}, eps, 1, horizon);
      if (got.holds) {
        out.found = true;
        out.point = Point{v};
        out.exact = got.exact;
        out.detail = "the forward orbit of z=" + std::to_string(v) +
                     " was closed off at its value revisit and stays at least " +
                     rational_to_string(eps) + " away from its start";
        return out;
      }
      if (!got.exact) all_exact = false;
    }
    // The negative is as strong as the scans behind it: with every residue
    // closed off, no non-recurrent point exists at this scale.
    out.exact = all_exact;
    out.detail = "every residue re-enters its own eps-ball";
    return out;
  }
  CandidatePool local;
  const CandidatePool* use = pool;
  if (sys.kind == SystemKind::sft && !use) {
    local = make_pool(sys, 32, 0);
    use = &local;
  }
  if (!use || use->points.empty()) {
    out.detail = "no candidate pool supplied";
    return out;
  }
  for (const Point& p : use->points) {
    auto got = detail::scan_away(sys, p, p, eps, 1, horizon);
    if (got.holds) {
      out.found = true;
      out.point = p;
      out.exact = got.exact;
      out.detail = "d(f^n p, p) >= " + rational_to_string(eps) + " for p = " + point_text(p) +
                   (got.exact ? " for every n >= 1 (eventually periodic scan)"
                              : " for every n up to the horizon");
      return out;
    }
  }
  out.detail = "no pool point stays eps-away from its own orbit";
  return out;
}

StayAwayResult stay_away_pair(const System& sys, const Rational& eps, long long horizon,
                              const CandidatePool* pool) {
  validate(sys);
  if (!(eps > Rational(0))) throw BadArgs("eps must be positive");
  if (horizon < 1) throw BadArgs("horizon must be >= 1");
  StayAwayResult out;
  out.eps = eps;
  out.horizon = horizon;
  if (sys.kind == SystemKind::substitution) {
    out.detail = "substitution systems carry no representable points; nothing scanned";
    return out;
  }
  std::vector<Point> cand;
  if (sys.kind == SystemKind::grid) {
    // Both members must at least avoid returning to themselves; prefilter
    // keeps the pair scan quadratic in that usually small set.
    for (long long v = 0; v < sys.grid.size; ++v)
      if (detail::scan_away(sys, Point{v}, Point{v}, eps, 1, horizon).holds)
        cand.push_back(Point{v});
    if (cand.size() > 64) cand.resize(64);
  } else {
    CandidatePool local;
    const CandidatePool* use = pool;
    if (sys.kind == SystemKind::sft && !use) {
      local = make_pool(sys, 32, 0);
      use = &local;
    }
    if (!use || use->points.empty()) {
      out.detail = "no candidate pool supplied";
      return out;
    }
    cand = use->points;
  }
  for (std::size_t i = 0; i < cand.size(); ++i)
    for (std::size_t j = 0; j < cand.size(); ++j) {
      if (i == j) continue;
      auto rep = detail::stay_away_report(sys, cand[i], cand[j], eps);
      if (rep.holds) {
        out.found = true;
        out.x = cand[i];
        out.y = cand[j];
        out.exact = rep.exact;
        out.detail = "x = " + point_text(cand[i]) + ", y = " + point_text(cand[j]) + ": " +
                     rep.detail;
        return out;
      }
    }
  out.detail = "no candidate pair satisfies all four stay-away constraints";
  return out;
}

long long covering_time(const System& sys, const Rational& eps, const CandidatePool* pool) {
  (void)pool;  // enumeration is exact; candidates add nothing
  validate(sys);
  if (!(eps > Rational(0))) throw BadArgs("eps must be positive");
  if (sys.kind != SystemKind::grid)
    throw NotFinite("covering time is decided on finite grid systems");
  Verdict min = is_minimal(sys);
  if (min.value != VerdictValue::yes)
    throw NotMinimal("covering time needs a minimal system: " + min.certificate);
  const auto& g = sys.grid;
  // All three grid metrics are translation invariant, so ball membership
  // only depends on the difference of the residues.
  std::vector<char> close(static_cast<std::size_t>(g.size), 0);
  for (long long d = 0; d < g.size; ++d)
    close[static_cast<std::size_t>(d)] = grid_distance(g, d, 0) < eps ? 1 : 0;
  long long worst = 0;
  for (long long y = 0; y < g.size; ++y) {
    std::vector<char> hit(static_cast<std::size_t>(g.size), 0);
    long long remaining = g.size;
    long long v = y;
    for (long long n = 0;; ++n) {
      for (long long x = 0; x < g.size; ++x)
        if (!hit[static_cast<std::size_t>(x)] &&
            close[static_cast<std::size_t>((v - x + g.size) % g.size)]) {
          hit[static_cast<std::size_t>(x)] = 1;
          --remaining;
          if (remaining == 0) worst = std::max(worst, n);
        }
      if (remaining == 0) break;
      if (n > 2 * g.size) throw Error("covering scan exceeded the orbit bound");
      v = grid_apply(g, v);
    }
  }
  return worst;
}

Rational bump_value(const System& sys, const BirkhoffProbe& probe, const Point& z) {
  validate(sys);
  if (!(probe.eps > Rational(0))) throw BadArgs("probe eps must be positive");
  Rational d = distance(sys, z, probe.center);
  Rational phi = (Rational(2) * probe.eps - d) / probe.eps;
  if (phi < Rational(0)) return Rational(0);
  if (phi > Rational(1)) return Rational(1);
  return phi;
}

Rational birkhoff_gap(const System& sys, const Point& orbit_start, const BirkhoffProbe& probe,
                      long long n) {
  validate(sys);
  if (n < 1) throw BadArgs("average length n must be >= 1");
  if (!(probe.eps > Rational(0))) throw BadArgs("probe eps must be positive");
  Rational sum(0);
  Point cur = orbit_start;
  for (long long k = 0; k < n; ++k) {
    sum += bump_value(sys, probe, cur);
    cur = apply_map(sys, cur);
  }
  return sum / Rational(n);
}

ClassifyOptions default_options(const System& sys) {
  validate(sys);
  ClassifyOptions opt;
  switch (sys.kind) {
    case SystemKind::sft:
    case SystemKind::substitution:
    case SystemKind::product:
      opt.eps_list = {Rational(1, 2), Rational(1, 4), Rational(1, 8)};
      break;
    case SystemKind::grid:
      if (sys.grid.map == GridMap::rotation)
        // The resolution scale decides gluing exactly: balls are singletons.
        opt.eps_list = {Rational(1, 2), Rational(1, 4), Rational(1, 2 * sys.grid.size)};
      else if (sys.grid.map == GridMap::square) {
        opt.eps_list = {Rational(1, 4), Rational(1, 8)};
        opt.n_max = 32;  // orbits take ~log2(G) steps to absorb; counts saturate after
      } else
        opt.eps_list = {Rational(1, 2), Rational(1, 4), Rational(1, 8)};
      break;
  }
  if (sys.kind == SystemKind::substitution) opt.segment_length = 8;
  return opt;
}

namespace {

// ---- gluing and specification verdicts per system kind ----

struct GluingLane {
  Verdict verdict;
  std::optional<GluingProfile> profile;
};

GluingLane gluing_lane_sft(const System& sys, const ClassifyOptions& opt) {
  GluingLane lane;
  std::vector<GluingProfile> profs;
  for (int r = 1; r <= std::max(1, opt.rank); ++r)
    profs.push_back(decide_gluing_sft(sys, r, opt.segment_length, opt.rank, 0));
  for (const auto& p : profs)
    if (p.status == ProfileStatus::impossible) {
      lane.verdict = make_verdict(VerdictValue::no, true, "exact", p.certificate);
      lane.profile = p;
      return lane;
    }
  for (const auto& p : profs)
    if (p.status == ProfileStatus::exceeds_cap) {
      lane.verdict = make_verdict(VerdictValue::unknown, false,
                                  "bound search capped at " + std::to_string(p.cap),
                                  p.certificate);
      lane.profile = p;
      return lane;
    }
  std::ostringstream cert;
  cert << "finite at every tested radius:";
  for (const auto& p : profs) cert << " M(" << p.radius << ")=" << p.bound;
  cert << "; the irreducible graph extends the bound to every radius";
  lane.verdict = make_verdict(VerdictValue::yes, true, "exact", cert.str());
  lane.profile = profs.front();
  return lane;
}

GluingLane gluing_lane_grid(const System& sys, const ClassifyOptions& opt,
                            const CandidatePool& pool, const Verdict& minimal) {
  GluingLane lane;
  std::vector<GluingProfile> profs;
  for (const Rational& eps : opt.eps_list)
    profs.push_back(gluing_profile(sys, eps, opt.segment_length, opt.rank, &pool, 64));
  for (const auto& p : profs)
    if (p.status == ProfileStatus::impossible) {
      lane.verdict = make_verdict(VerdictValue::no, true, "exact", p.certificate);
      lane.profile = p;
      return lane;
    }
  for (const auto& p : profs)
    if (p.status == ProfileStatus::exceeds_cap) {
      lane.verdict = make_verdict(VerdictValue::unknown, false,
                                  "gap search capped at " + std::to_string(p.cap),
                                  p.certificate);
      lane.profile = p;
      return lane;
    }
  bool isometry =
      sys.grid.map == GridMap::rotation || sys.grid.map == GridMap::odometer;
  std::ostringstream cert;
  cert << "finite at every tested scale:";
  for (const auto& p : profs) cert << " M(" << rational_to_string(p.eps) << ")=" << p.bound;
  if (isometry && minimal.value == VerdictValue::yes) {
    cert << "; an isometric minimal system admits M <= covering time + 1 at every scale";
    lane.verdict = make_verdict(VerdictValue::yes, true, "exact", cert.str());
  } else if (std::any_of(profs.begin(), profs.end(), [&](const GluingProfile& p) {
               return p.eps == Rational(1, 2 * sys.grid.size);
             })) {
    cert << "; the finest tested scale is the grid resolution, below which distances do "
            "not change";
    lane.verdict = make_verdict(VerdictValue::yes, true, "exact", cert.str());
  } else {
    lane.verdict = make_verdict(VerdictValue::yes, false, "tested scales only", cert.str());
  }
  lane.profile = profs.back();
  return lane;
}

GluingLane gluing_lane_subst(const System& sys, const ClassifyOptions& opt) {
  GluingLane lane;
  std::vector<GluingProfile> profs;
  for (long long L : {4LL, 8LL, 16LL, 32LL})
    profs.push_back(gluing_profile_subst(sys, opt.eps_list.back(), L, opt.rank, 256));
  std::ostringstream cert;
  bool all_finite = true;
  for (const auto& p : profs) {
    all_finite = all_finite && p.status == ProfileStatus::finite;
    cert << "M(" << p.segment_length << ")=" << (p.status == ProfileStatus::finite
                                                     ? std::to_string(p.bound)
                                                     : "?")
         << " ";
  }
  bool stabilized = all_finite && profs.size() >= 2 &&
                    profs[profs.size() - 1].bound == profs[profs.size() - 2].bound;
  if (stabilized) {
    lane.verdict = make_verdict(VerdictValue::yes, false, "word windows through length 32",
                                "the word-level bound stabilizes: " + cert.str());
  } else {
    lane.verdict = make_verdict(
        VerdictValue::unknown, false, "word windows through length 32",
        "the word-level bound keeps growing with the window (" + cert.str() +
            "), so no uniform bound is certified");
  }
  lane.profile = profs.back();
  return lane;
}

struct SpecLane {
  Verdict verdict;
  std::optional<SpecificationProfile> profile;
};

SpecLane specification_lane(const System& sys, const ClassifyOptions& opt) {
  SpecLane lane;
  if (sys.kind != SystemKind::sft) {
    lane.verdict = make_verdict(VerdictValue::unknown, false, "not decided",
                                "uniform-gap specification bounds are decided for shifts of "
                                "finite type");
    return lane;
  }
  std::vector<SpecificationProfile> profs;
  for (int r = 1; r <= std::max(1, opt.rank); ++r)
    profs.push_back(specification_profile_sft(sys, r, opt.segment_length, opt.rank, -1, 0));
  for (const auto& p : profs)
    if (p.status == ProfileStatus::impossible) {
      lane.verdict = make_verdict(VerdictValue::no, true, "exact", p.certificate);
      lane.profile = p;
      return lane;
    }
  for (const auto& p : profs)
    if (p.status == ProfileStatus::exceeds_cap) {
      lane.verdict = make_verdict(VerdictValue::unknown, false,
                                  "bound search capped at " + std::to_string(p.cap),
                                  p.certificate);
      lane.profile = p;
      return lane;
    }
  std::ostringstream cert;
  cert << "every gap choice in [M, M + slack] admits a shadowing point:";
  for (const auto& p : profs) cert << " M(" << p.radius << ")=" << p.bound;
  lane.verdict = make_verdict(VerdictValue::yes, true, "exact", cert.str());
  lane.profile = profs.front();
  return lane;
}

std::string rat_approx(const Rational& q) {
  std::ostringstream os;
  os << rational_to_string(q) << " (~" << q.convert_to<double>() << ")";
  return os.str();
}

}  // namespace

ClassificationReport classify(const System& sys, const ClassifyOptions& opt) {
  validate(sys);
  if (opt.eps_list.empty()) throw BadArgs("eps_list must be nonempty");
  ClassificationReport rep;
  rep.label = sys.label;
  CandidatePool pool = make_pool(sys, opt.pool_size, opt.seed);
  rep.notes.push_back("candidate pool: " + pool.descriptor + " (" +
                      std::to_string(pool.points.size()) + " points)");

  try {
    rep.transitive = is_transitive(sys, opt.cap);
  } catch (const Unsupported& e) {
    rep.transitive = make_verdict(VerdictValue::unknown, false, "not decided", e.what());
  }
  try {
    rep.minimal = is_minimal(sys, opt.cap);
  } catch (const Unsupported& e) {
    rep.minimal = make_verdict(VerdictValue::unknown, false, "not decided", e.what());
  }
  try {
    auto mod = equicontinuity_modulus(sys, opt.eps_list.back(), opt.horizon, &pool);
    rep.equicontinuous = mod.equicontinuous;
  } catch (const Unsupported& e) {
    rep.equicontinuous = make_verdict(VerdictValue::unknown, false, "not decided", e.what());
  } catch (const EmptyPool& e) {
    rep.equicontinuous = make_verdict(VerdictValue::unknown, false, "no pool", e.what());
  }

  GluingLane glane;
  switch (sys.kind) {
    case SystemKind::sft:
      glane = gluing_lane_sft(sys, opt);
      break;
    case SystemKind::grid:
      glane = gluing_lane_grid(sys, opt, pool, rep.minimal);
      break;
    case SystemKind::substitution:
      glane = gluing_lane_subst(sys, opt);
      break;
    case SystemKind::product:
      glane.verdict = make_verdict(VerdictValue::unknown, false, "not decided",
                                   "gluing bounds are not searched on product systems");
      break;
  }
  rep.glues = glane.verdict;
  rep.gluing = glane.profile;

  SpecLane slane = specification_lane(sys, opt);
  rep.specification = slane.verdict;
  rep.spec_profile = slane.profile;

  const CandidatePool* entropy_pool = sys.kind == SystemKind::substitution ? nullptr : &pool;
  rep.entropy = entropy_estimate(sys, opt.eps_list, opt.n_max, entropy_pool);
  if (!rep.entropy->notes.empty()) rep.notes.push_back("entropy: " + rep.entropy->notes);

  if (sys.kind == SystemKind::sft) rep.periodic = periodic_counts(sys, opt.periodic_n_max);

  if (sys.kind == SystemKind::grid && rep.minimal.value == VerdictValue::yes)
    rep.cover_time = covering_time(sys, opt.eps_list.back(), &pool);

  NonrecurrenceResult nonrec = find_nonrecurrent(sys, opt.eps_list.front(), opt.horizon, &pool);
  rep.notes.push_back("nonrecurrence at eps = " + rational_to_string(opt.eps_list.front()) +
                      ": " + nonrec.detail);

  // ---- cross checks ----
  auto push = [&](std::string id, std::string statement, std::string status,
                  std::string detail) {
    rep.checks.push_back({std::move(id), std::move(statement), std::move(status),
                          std::move(detail)});
  };

  bool glues_yes = rep.glues.value == VerdictValue::yes;
  bool minimal_no = rep.minimal.value == VerdictValue::no;

  // T1: gluing with a non-minimal space forces positive entropy, and the
  // interleaving construction must actually deliver separated witnesses.
  {
    std::string statement =
        "gluing and non-minimal imply positive entropy and a successful dichotomy";
    if (glues_yes && minimal_no) {
      double lower = rep.entropy->oracle ? rep.entropy->oracle->lo : rep.entropy->h_estimate;
      bool positive = lower > 1e-9;
      StayAwayResult stay = stay_away_pair(sys, Rational(1, 2), opt.horizon, &pool);
      if (!positive) {
        push("T1", statement, "fail",
             "entropy lower bound " + std::to_string(lower) + " is not positive");
      } else if (!stay.found) {
        push("T1", statement, "skip",
             "no stay-away pair found in the pool; the construction was not attempted");
      } else {
        try {
          DichotomyResult dich =
              dichotomy_construction(sys, stay.x, stay.y, Rational(1, 2), 1, 0, &pool);
          if (dich.separation_verified)
            push("T1", statement, "pass",
                 "entropy lower bound " + std::to_string(lower) + "; " + dich.detail);
          else
            push("T1", statement, "fail", "witnesses failed pairwise separation");
        } catch (const Error& e) {
          push("T1", statement, "fail", std::string("construction failed: ") + e.what());
        }
      }
    } else {
      push("T1", statement, "skip",
           "hypothesis not met: glues = " + verdict_name(rep.glues.value) +
               ", minimal = " + verdict_name(rep.minimal.value));
    }
  }

  // T5a: equicontinuous + transitive forces minimal.
  {
    std::string statement = "equicontinuous and transitive imply minimal";
    if (rep.equicontinuous.value == VerdictValue::yes &&
        rep.transitive.value == VerdictValue::yes) {
      if (rep.minimal.value == VerdictValue::yes)
        push("T5a", statement, "pass", "all three verdicts agree");
      else
        push("T5a", statement, "fail",
             "minimal = " + verdict_name(rep.minimal.value) + ": " + rep.minimal.certificate);
    } else {
      push("T5a", statement, "skip",
           "hypothesis not met: equicontinuous = " + verdict_name(rep.equicontinuous.value) +
               ", transitive = " + verdict_name(rep.transitive.value));
    }
  }

  // T5b: equicontinuous + minimal bounds the gluing gap by covering time + 1.
  {
    std::string statement = "equicontinuous and minimal bound the gluing gap by N(eps) + 1";
    if (sys.kind == SystemKind::grid && rep.equicontinuous.value == VerdictValue::yes &&
        rep.minimal.value == VerdictValue::yes) {
      std::ostringstream detail;
      bool ok = true;
      for (const Rational& eps : opt.eps_list) {
        GluingProfile p = gluing_profile(sys, eps, opt.segment_length, opt.rank, &pool, 64);
        long long N = covering_time(sys, eps, &pool);
        bool here = p.status == ProfileStatus::finite && p.bound <= N + 1;
        ok = ok && here;
        detail << "eps=" << rational_to_string(eps) << ": M="
               << (p.status == ProfileStatus::finite ? std::to_string(p.bound) : "inf")
               << " N+1=" << (N + 1) << (here ? " ok" : " VIOLATED") << "; ";
      }
      push("T5b", statement, ok ? "pass" : "fail", detail.str());
    } else if (rep.equicontinuous.value == VerdictValue::yes &&
               rep.minimal.value == VerdictValue::yes) {
      push("T5b", statement, "skip", "covering time is decided on finite grid systems");
    } else {
      push("T5b", statement, "skip",
           "hypothesis not met: equicontinuous = " + verdict_name(rep.equicontinuous.value) +
               ", minimal = " + verdict_name(rep.minimal.value));
    }
  }

  // T4.1: gluing plus a non-minimal space yields two starts with different
  // Birkhoff averages against the same bump probe.
  {
    std::string statement = "gluing and non-minimal witness two distinct Birkhoff averages";
    if (glues_yes && minimal_no && sys.kind != SystemKind::substitution &&
        pool.points.size() >= 2) {
      BirkhoffProbe probe{pool.points[0], Rational(1, 4)};
      Rational a0 = birkhoff_gap(sys, pool.points[0], probe, opt.birkhoff_n);
      Rational a1 = birkhoff_gap(sys, pool.points[1], probe, opt.birkhoff_n);
      if (a0 != a1)
        push("T4.1", statement, "pass",
             "averages " + rat_approx(a0) + " and " + rat_approx(a1) + " around " +
                 point_text(pool.points[0]));
      else
        push("T4.1", statement, "fail",
             "the first two pool starts average identically: " + rat_approx(a0));
    } else if (sys.kind == SystemKind::grid && minimal_no && !glues_yes &&
               pool.points.size() >= 2) {
      // Contrapositive probe: all sampled averages agreeing is consistent
      // with the failed gluing search.
      BirkhoffProbe probe{pool.points[0], Rational(1, 16)};
      Rational lo(1), hi(0);
      std::size_t starts = std::min<std::size_t>(pool.points.size(), 8);
      for (std::size_t i = 0; i < starts; ++i) {
        Rational a = birkhoff_gap(sys, pool.points[i], probe, opt.birkhoff_n);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      double spread = Rational(hi - lo).convert_to<double>();
      push("T4.1", statement, "skip",
           "gluing not certified; sampled averages over " + std::to_string(starts) +
               " starts spread " + std::to_string(spread) +
               "; no contradiction without a gluing certificate");
    } else {
      push("T4.1", statement, "skip",
           "hypothesis not met: glues = " + verdict_name(rep.glues.value) +
               ", minimal = " + verdict_name(rep.minimal.value));
    }
  }

  // T4.2: when periodic-orbit gluing holds, the entropy estimate cannot
  // exceed the periodic growth rate by more than the tolerance.
  {
    std::string statement = "periodic gluing keeps the entropy estimate within the periodic "
                            "growth rate plus 0.05";
    if (sys.kind == SystemKind::sft) {
      GluingProfile per = periodic_gluing_sft(sys, 1, opt.segment_length, opt.rank, 0);
      if (per.status == ProfileStatus::finite && rep.periodic) {
        double h = rep.entropy->h_estimate;
        double p_hat = rep.periodic->growth_rate;
        if (h <= p_hat + 0.05)
          push("T4.2", statement, "pass",
               "h = " + std::to_string(h) + " <= p_hat + 0.05 = " +
                   std::to_string(p_hat + 0.05));
        else
          push("T4.2", statement, "fail",
               "h = " + std::to_string(h) + " exceeds p_hat + 0.05 = " +
                   std::to_string(p_hat + 0.05));
      } else {
        push("T4.2", statement, "skip",
             "periodic closure not certified: " + per.certificate);
      }
    } else {
      push("T4.2", statement, "skip", "periodic counting runs on shifts of finite type");
    }
  }

  // L3.1: a gluing, non-minimal system must contain a non-recurrent point.
  {
    std::string statement = "gluing and non-minimal force a non-recurrent point";
    if (glues_yes && minimal_no) {
      if (nonrec.found && nonrec.exact)
        push("L3.1", statement, "pass", nonrec.detail);
      else if (nonrec.found)
        push("L3.1", statement, "pass", nonrec.detail + " (horizon-bounded)");
      else
        push("L3.1", statement, "fail", nonrec.detail);
    } else {
      push("L3.1", statement, "skip",
           "hypothesis not met: glues = " + verdict_name(rep.glues.value) +
               ", minimal = " + verdict_name(rep.minimal.value));
    }
  }

  return rep;
}

}  // namespace orbitglue
