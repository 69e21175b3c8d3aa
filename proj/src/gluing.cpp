#include "orbitglue/gluing.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "orbitglue/errors.hpp"

namespace orbitglue {

namespace {

long long default_cap(int r) { return std::max<long long>(16, 2LL * std::max(r, 0) + 4); }

// Base points behind every canonical family: periodic points of least period
// <= 4 (shortest first) plus one heteroclinic connection per ordered pair of
// cycles of length <= 2, capped so profiles stay readable.
constexpr int kBaseCap = 24;

std::vector<std::pair<SymbolicPoint, std::string>> family_bases(const System& sys) {
  std::vector<std::pair<SymbolicPoint, std::string>> out;
  std::set<std::string> seen;
  const bool two = sys.sft.sidedness == Sidedness::two_sided;
  auto push = [&](SymbolicPoint p) {
    if (!two) p.left_cycle.clear();
    if (static_cast<int>(out.size()) >= kBaseCap) return;
    std::string key = point_to_text(sys, Point{p});
    if (seen.insert(key).second) out.emplace_back(std::move(p), key);
  };
  for (int period = 1; period <= 4; ++period)
    for (const auto& p : periodic_points_up_to(sys.sft, period)) push(p);
  auto cycles = admissible_cycles_up_to(sys.sft, 2);
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
        p.core.insert(p.core.begin(), c1.begin(), c1.end());
        p.left_cycle.clear();
      }
      push(p);
    }
  return out;
}

struct Family {
  std::vector<OrbitSequence> sequences;
  std::vector<std::string> labels;
};

// include_rank1 adds the single-segment instances the periodic variant needs.
Family build_family(const System& sys, long long L, int rank, bool include_rank1) {
  if (sys.kind != SystemKind::sft) throw NotAnSft("canonical families are SFT-only");
  if (L < 1) throw BadArgs("segment length cap must be >= 1");
  if (rank < 1) throw BadArgs("rank cap must be >= 1");
  auto bases = family_bases(sys);
  Family fam;
  auto label_of = [&](const std::vector<std::pair<size_t, long long>>& parts) {
    std::ostringstream os;
    for (size_t i = 0; i < parts.size(); ++i) {
      if (i) os << " | ";
      os << bases[parts[i].first].second << " m=" << parts[i].second;
    }
    return os.str();
  };
  auto add = [&](const std::vector<std::pair<size_t, long long>>& parts) {
    OrbitSequence seq;
    for (auto [bi, m] : parts) seq.push_back({Point{bases[bi].first}, m});
    fam.sequences.push_back(std::move(seq));
    fam.labels.push_back(label_of(parts));
  };

  if (include_rank1 && rank >= 1)
    for (size_t i = 0; i < bases.size(); ++i) add({{i, L}});
  if (rank >= 2) {
    std::vector<std::pair<long long, long long>> lens = {{L, L}};
    if (L > 1) {
      lens.push_back({1, L});
      lens.push_back({L, 1});
    }
    for (size_t i = 0; i < bases.size(); ++i)
      for (size_t j = 0; j < bases.size(); ++j)
        for (auto [m1, m2] : lens) add({{i, m1}, {j, m2}});
  }
  if (rank >= 3) {
    const size_t few = std::min<size_t>(bases.size(), 8);
    for (size_t i = 0; i < few; ++i)
      for (size_t j = 0; j < few; ++j)
        for (size_t k = 0; k < few; ++k) add({{i, L}, {j, L}, {k, L}});
  }
  return fam;
}

std::string reducibility_certificate(const SymbolicSystem& s) {
  if (sft_irreducible(s)) return "";
  const int n = s.alphabet;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b || shortest_connector(s, a, b)) continue;
      std::ostringstream os;
      os << "no path from letter " << a << " to letter " << b
         << ": the transition graph is reducible";
      return os.str();
    }
  return "";
}

// Minimal feasible max-gap for one instance: tuples scanned in (max, lex)
// order, feasibility decided by window merging.
std::optional<long long> instance_min_max_gap(const System& sys, const OrbitSequence& seq,
                                              int r, long long cap) {
  const size_t junctions = seq.size() - 1;
  if (junctions == 0) return 0;
  Gap g(junctions, 1);
  for (long long B = 1; B <= cap; ++B) {
    // enumerate tuples over [1, B]^junctions containing at least one B
    std::fill(g.begin(), g.end(), 1);
    for (;;) {
      if (std::find(g.begin(), g.end(), B) != g.end() &&
          merge_windows(sys, seq, g, r).ok)
        return B;
      size_t i = junctions;
      while (i > 0 && g[i - 1] == B) g[--i] = 1;
      if (i == 0) break;
      ++g[i - 1];
    }
  }
  return std::nullopt;
}

struct CoreOut {
  ProfileStatus status = ProfileStatus::finite;
  long long bound = 0;
  std::vector<InstanceOutcome> instances;
  std::string certificate;
};

CoreOut core_decide(const System& sys, int r, long long L, int rank, long long cap) {
  CoreOut out;
  Family fam = build_family(sys, L, rank, false);
  std::string worst_label;
  std::string blocked_label;
  for (size_t i = 0; i < fam.sequences.size(); ++i) {
    InstanceOutcome io;
    io.label = fam.labels[i];
    auto best = instance_min_max_gap(sys, fam.sequences[i], r, cap);
    if (best) {
      io.min_max_gap = *best;
      if (*best > out.bound) {
        out.bound = *best;
        worst_label = io.label;
      }
    } else {
      io.obstruction = "no gap with entries <= " + std::to_string(cap) + " works";
      if (blocked_label.empty()) blocked_label = io.label;
    }
    out.instances.push_back(std::move(io));
  }
  if (!blocked_label.empty()) {
    std::string reason = reducibility_certificate(sys.sft);
    if (!reason.empty()) {
      out.status = ProfileStatus::impossible;
      out.certificate = reason + "; instance [" + blocked_label + "] can never be glued";
    } else {
      out.status = ProfileStatus::exceeds_cap;
      out.certificate = "irreducible, but instance [" + blocked_label +
                        "] found no gap <= " + std::to_string(cap) + "; raise the cap";
    }
    out.bound = -1;
  } else {
    out.certificate = "worst instance [" + worst_label + "] needs max gap " +
                      std::to_string(out.bound);
  }
  return out;
}

}  // namespace

std::vector<OrbitSequence> canonical_family_sft(const System& sys, long long segment_length,
                                                int rank) {
  return build_family(sys, segment_length, rank, false).sequences;
}

std::vector<std::string> canonical_family_labels(const System& sys, long long segment_length,
                                                 int rank) {
  return build_family(sys, segment_length, rank, false).labels;
}

GluingProfile decide_gluing_sft(const System& sys, int radius, long long segment_length,
                                int rank, long long cap) {
  if (sys.kind != SystemKind::sft) throw NotAnSft("decide_gluing_sft needs an SFT");
  if (radius < -1) throw BadArgs("agreement radius must be >= -1");
  if (rank < 2) throw BadArgs("gluing rank cap must be >= 2");
  if (cap == 0) cap = default_cap(radius);
  if (cap < 1) throw BadArgs("gap cap must be >= 1");

  CoreOut main = core_decide(sys, radius, segment_length, rank, cap);
  GluingProfile p;
  p.status = main.status;
  p.bound = main.bound;
  p.radius = radius;
  p.eps = radius >= 0 ? pow2(-radius) : Rational(2);
  p.segment_length = segment_length;
  p.rank = rank;
  p.cap = cap;
  p.family = "periodic points (period <= 4) and short heteroclinics, ranks 2.." +
             std::to_string(rank) + ", lengths {1," + std::to_string(segment_length) + "}";
  p.pool_descriptor = "exact: transition graph";
  p.certificate = main.certificate;
  p.instances = std::move(main.instances);
  if (segment_length > 1) {
    CoreOut prev = core_decide(sys, radius, segment_length - 1, rank, cap);
    p.stabilized = prev.status == main.status && prev.bound == main.bound;
    p.stabilized_at = segment_length - 1;
  }
  return p;
}

SpecificationProfile specification_profile_sft(const System& sys, int radius,
                                               long long segment_length, int rank,
                                               long long slack, long long cap) {
  if (sys.kind != SystemKind::sft) throw NotAnSft("specification profile needs an SFT");
  if (radius < -1) throw BadArgs("agreement radius must be >= -1");
  if (rank < 2) throw BadArgs("rank cap must be >= 2");
  if (slack == -1) slack = 2LL * std::max(radius, 0) + 2;
  if (slack < 0) throw BadArgs("slack must be >= 0");
  if (cap == 0) cap = default_cap(radius);

  SpecificationProfile p;
  p.slack = slack;
  p.radius = radius;
  p.segment_length = segment_length;
  p.rank = rank;
  p.cap = cap;

  Family fam = build_family(sys, segment_length, rank, false);
  for (long long M = 1; M <= cap; ++M) {
    bool all_ok = true;
    std::string blocked;
    long long blocked_t = -1;
    for (size_t i = 0; i < fam.sequences.size() && all_ok; ++i) {
      const size_t junctions = fam.sequences[i].size() - 1;
      Gap g(junctions, M);
      for (;;) {
        if (!merge_windows(sys, fam.sequences[i], g, radius).ok) {
          all_ok = false;
          blocked = fam.labels[i];
          blocked_t = *std::max_element(g.begin(), g.end());
          break;
        }
        size_t j = junctions;
        while (j > 0 && g[j - 1] == M + slack) g[--j] = M;
        if (j == 0) break;
        ++g[j - 1];
      }
    }
    if (all_ok) {
      p.status = ProfileStatus::finite;
      p.bound = M;
      p.certificate = "every gap tuple in [" + std::to_string(M) + ", " +
                      std::to_string(M + slack) + "] glues every family instance";
      return p;
    }
    if (M == cap) p.certificate = "instance [" + blocked + "] rejects a gap of " +
                                  std::to_string(blocked_t) + " for every window start <= " +
                                  std::to_string(cap);
  }

  std::string reduc = reducibility_certificate(sys.sft);
  long long period = sft_period(sys.sft);
  // the parity argument rules out every M only once the scanned range covers
  // the whole window-overlap regime, so require cap >= 2r + 2
  if (!reduc.empty()) {
    p.status = ProfileStatus::impossible;
    p.certificate = reduc;
  } else if (period >= 2 && slack >= 1 && cap >= 2LL * std::max(radius, 0) + 2) {
    p.status = ProfileStatus::impossible;
    p.certificate = "every cycle length is divisible by " + std::to_string(period) +
                    ", so consecutive gaps in any window of width " +
                    std::to_string(slack + 1) + " demand connector lengths in different " +
                    "residue classes; no uniform window works";
  } else {
    p.status = ProfileStatus::exceeds_cap;
  }
  return p;
}

namespace {

// Forced letters of (seq, gap) folded onto residues mod p; nullopt when two
// coordinates force different letters on the same residue.
std::optional<std::vector<int>> folded_constraints(const System& sys,
                                                   const OrbitSequence& seq, const Gap& gap,
                                                   int r, long long p) {
  std::vector<int> forced(p, -1);
  if (r < 0) return forced;
  const auto s = shadow_schedule(seq, gap);
  const bool two = sys.sft.sidedness == Sidedness::two_sided;
  for (size_t j = 0; j < seq.size(); ++j) {
    const auto& x = seq[j].base.symbolic();
    const long long lo = two ? s[j] - r : s[j];
    const long long hi = s[j] + seq[j].length - 1 + r;
    for (long long c = lo; c <= hi; ++c) {
      int want = letter_at(x, c - s[j]);
      long long rho = ((c % p) + p) % p;
      if (forced[rho] == -1) forced[rho] = want;
      else if (forced[rho] != want) return std::nullopt;
    }
  }
  return forced;
}

// Least admissible cyclic word of length p matching the partial letter
// assignment (smallest start letter, then greedy-lex), or nullopt.
std::optional<Word> cyclic_word(const SymbolicSystem& sft, const std::vector<int>& forced) {
  const long long p = static_cast<long long>(forced.size());
  const int A = sft.alphabet;
  for (int start = 0; start < A; ++start) {
    if (forced[0] != -1 && forced[0] != start) continue;
    if (p == 1) {
      if (sft.transitions(start, start)) return Word{start};
      continue;
    }
    // reach[rho][a]: letter a placed at rho extends through p-1 and closes
    // back to start
    std::vector<std::vector<char>> reach(p, std::vector<char>(A, 0));
    for (int a = 0; a < A; ++a) {
      if (forced[p - 1] != -1 && forced[p - 1] != a) continue;
      reach[p - 1][a] = sft.transitions(a, start) ? 1 : 0;
    }
    for (long long rho = p - 2; rho >= 1; --rho)
      for (int a = 0; a < A; ++a) {
        if (forced[rho] != -1 && forced[rho] != a) continue;
        for (int b = 0; b < A; ++b)
          if (sft.transitions(a, b) && reach[rho + 1][b]) {
            reach[rho][a] = 1;
            break;
          }
      }
    bool viable = false;
    for (int b = 0; b < A && !viable; ++b)
      if (sft.transitions(start, b) && reach[1][b]) viable = true;
    if (!viable) continue;
    Word w = {start};
    for (long long rho = 1; rho < p; ++rho)
      for (int b = 0; b < A; ++b)
        if (sft.transitions(w.back(), b) && reach[rho][b]) {
          w.push_back(b);
          break;
        }
    return w;
  }
  return std::nullopt;
}

}  // namespace

PeriodicGluingResult periodic_gluing_search(const System& sys, const OrbitSequence& seq,
                                            int radius, long long cap) {
  if (sys.kind != SystemKind::sft) throw NotAnSft("periodic gluing search needs an SFT");
  if (radius < -1) throw BadArgs("agreement radius must be >= -1");
  validate_sequence(sys, seq);
  if (cap == 0) cap = default_cap(radius);

  PeriodicGluingResult out;
  const size_t junctions = seq.size() - 1;
  for (long long t = 1; t <= cap; ++t) {
    Gap g(junctions, 1);
    for (;;) {
      const auto s = shadow_schedule(seq, g);
      const long long p = s.back() + seq.back().length + t;
      auto forced = folded_constraints(sys, seq, g, radius, p);
      if (forced) {
        auto w = cyclic_word(sys.sft, *forced);
        if (w) {
          SymbolicPoint sp = periodic_point(*w);
          if (sys.sft.sidedness == Sidedness::one_sided) sp.left_cycle.clear();
          Point z{sp};
          // re-verify through the plain definitions: f^p z == z and the
          // orbit eps-shadows the sequence
          if (!points_equal(sys, apply_map(sys, z, p), z))
            throw Error("periodic witness failed its period re-verification");
          if (radius >= 0 &&
              !verify_shadow(sys, z, seq, g, pow2(-radius)).accepted)
            throw Error("periodic witness failed its shadowing re-verification");
          out.status = ProfileStatus::finite;
          out.tail_gap = t;
          out.period = p;
          out.gap = g;
          out.witness = z;
          out.certificate = "period " + std::to_string(p) + " witness closes with gap " +
                            std::to_string(t);
          return out;
        }
      }
      if (junctions == 0) break;
      size_t i = junctions;
      while (i > 0 && g[i - 1] == cap) g[--i] = 1;
      if (i == 0) break;
      ++g[i - 1];
    }
  }
  std::string reduc = reducibility_certificate(sys.sft);
  if (!reduc.empty()) {
    out.status = ProfileStatus::impossible;
    out.certificate = reduc;
  } else {
    out.status = ProfileStatus::exceeds_cap;
    out.certificate = "no closing gap <= " + std::to_string(cap) + " admits a periodic witness";
  }
  return out;
}

GluingProfile periodic_gluing_sft(const System& sys, int radius, long long segment_length,
                                  int rank, long long cap) {
  if (sys.kind != SystemKind::sft) throw NotAnSft("periodic gluing profile needs an SFT");
  if (rank < 1) throw BadArgs("rank cap must be >= 1");
  if (cap == 0) cap = default_cap(radius);

  Family fam = build_family(sys, segment_length, rank, true);
  GluingProfile p;
  p.radius = radius;
  p.eps = radius >= 0 ? pow2(-radius) : Rational(2);
  p.segment_length = segment_length;
  p.rank = rank;
  p.cap = cap;
  p.family = "periodic points (period <= 4) and short heteroclinics, ranks 1.." +
             std::to_string(rank) + "; every instance must close into a periodic orbit";
  p.pool_descriptor = "exact: transition graph";
  p.status = ProfileStatus::finite;
  std::string worst, blocked;
  for (size_t i = 0; i < fam.sequences.size(); ++i) {
    auto got = periodic_gluing_search(sys, fam.sequences[i], radius, cap);
    InstanceOutcome io;
    io.label = fam.labels[i];
    if (got.status == ProfileStatus::finite) {
      io.min_max_gap = got.tail_gap;
      if (got.tail_gap > p.bound) {
        p.bound = got.tail_gap;
        worst = io.label;
      }
    } else {
      io.obstruction = got.certificate;
      if (blocked.empty()) {
        blocked = io.label;
        p.status = got.status;
      }
    }
    p.instances.push_back(std::move(io));
  }
  if (p.status == ProfileStatus::finite) {
    p.certificate = "worst instance [" + worst + "] closes with gap " + std::to_string(p.bound);
  } else {
    p.bound = -1;
    p.certificate = "instance [" + blocked + "] cannot close into a periodic orbit";
  }
  return p;
}

// ---- substitution lane ----

std::optional<long long> subst_connector_gap(const SubstitutionSystem& s, const Word& u,
                                             const Word& v, long long cap) {
  auto occ_u = subst_occurrences(s, u);
  auto occ_v = subst_occurrences(s, v);
  if (occ_u.empty() || occ_v.empty()) return std::nullopt;
  const long long m = static_cast<long long>(u.size());
  std::optional<long long> best;
  size_t j = 0;
  for (long long a : occ_u) {
    while (j < occ_v.size() && occ_v[j] < a + m) ++j;
    if (j == occ_v.size()) break;
    long long t = occ_v[j] - a - m + 1;
    if (!best || t < *best) best = t;
    if (*best == 1) break;
  }
  if (best && *best > cap) return std::nullopt;
  return best;
}

GluingProfile gluing_profile_subst(const System& sys, const Rational& eps,
                                   long long segment_length, int rank, long long cap) {
  if (sys.kind != SystemKind::substitution)
    throw Unsupported("word-level gluing needs a substitution system");
  if (segment_length < 1 || segment_length > 64) throw BadArgs("segment length must be in [1, 64]");
  if (rank < 2) throw BadArgs("rank cap must be >= 2");
  if (cap == 0) cap = 4096;

  GluingProfile p;
  p.radius = shadow_radius(eps);
  p.eps = eps;
  p.segment_length = segment_length;
  p.rank = rank;
  p.cap = cap;
  p.family = "all ordered pairs of length-" + std::to_string(segment_length) +
             " factors; a gap of t means the next factor starts t+" +
             std::to_string(segment_length) + "-1 letters later in the same configuration";
  p.pool_descriptor = "exact within the stored prefix (" +
                      std::to_string(sys.subst.prefix_length) + " letters)";
  p.status = ProfileStatus::finite;

  auto factors = subst_factors(sys.subst, static_cast<int>(segment_length));
  // one occurrence scan per factor, not per pair
  std::vector<std::vector<long long>> occ(factors.size());
  for (size_t i = 0; i < factors.size(); ++i) occ[i] = subst_occurrences(sys.subst, factors[i]);
  const long long m = segment_length;
  auto pair_gap = [&](size_t iu, size_t iv) -> std::optional<long long> {
    std::optional<long long> best;
    size_t j = 0;
    for (long long a : occ[iu]) {
      while (j < occ[iv].size() && occ[iv][j] < a + m) ++j;
      if (j == occ[iv].size()) break;
      long long t = occ[iv][j] - a - m + 1;
      if (!best || t < *best) best = t;
      if (*best == 1) break;
    }
    if (best && *best > cap) return std::nullopt;
    return best;
  };
  auto word_text = [](const Word& w) {
    std::string t;
    for (int a : w) t += std::to_string(a);
    return t;
  };
  std::string worst, blocked;
  std::vector<InstanceOutcome> rows;
  for (size_t iu = 0; iu < factors.size(); ++iu)
    for (size_t iv = 0; iv < factors.size(); ++iv) {
      const Word& u = factors[iu];
      const Word& v = factors[iv];
      InstanceOutcome io;
      io.label = word_text(u) + " | " + word_text(v);
      auto t = pair_gap(iu, iv);
      if (t) {
        io.min_max_gap = *t;
        if (*t > p.bound) {
          p.bound = *t;
          worst = io.label;
        }
      } else {
        io.obstruction = "no co-occurrence within the prefix at gap <= " + std::to_string(cap);
        if (blocked.empty()) blocked = io.label;
      }
      rows.push_back(std::move(io));
    }
  if (!blocked.empty()) {
    p.status = ProfileStatus::exceeds_cap;
    p.bound = -1;
    p.certificate = "pair [" + blocked + "] never co-occurs at gap <= " + std::to_string(cap);
  } else {
    p.certificate = "worst pair [" + worst + "] needs gap " + std::to_string(p.bound);
  }
  // keep the table readable: the worst 32 rows, largest gap first
  std::stable_sort(rows.begin(), rows.end(), [](const InstanceOutcome& a, const InstanceOutcome& b) {
    long long ga = a.min_max_gap.value_or(-1), gb = b.min_max_gap.value_or(-1);
    if (!a.obstruction.empty() != !b.obstruction.empty()) return !a.obstruction.empty();
    return ga > gb;
  });
  if (rows.size() > 32) rows.resize(32);
  p.instances = std::move(rows);
  return p;
}

// ---- grids and the eps dispatcher ----

namespace {

std::vector<long long> grid_instance_bases(const System& sys, const Rational& eps,
                                           const CandidatePool* pool, std::string& desc) {
  const GridCircleSystem& g = sys.grid;
  std::vector<long long> reps;
  if (g.map == GridMap::odometer) {
    int j = shadow_radius(eps);
    if (j < 0) j = 0;
    if (j > g.depth) j = g.depth;
    for (long long v = 0; v < (1LL << j); ++v) reps.push_back(v);
    desc = "exact: one base per congruence class mod 2^" + std::to_string(j);
    return reps;
  }
  if (g.map == GridMap::rotation && g.size <= 256) {
    for (long long v = 0; v < g.size; ++v) reps.push_back(v);
    desc = "exact: all " + std::to_string(g.size) + " residues";
    return reps;
  }
  std::set<long long> anchors = {0, 1, g.size / 2, g.size - 1, g.size / 4, 3 * g.size / 4};
  if (pool)
    for (const auto& pt : pool->points)
      if (pt.is_grid()) anchors.insert(pt.grid());
  reps.assign(anchors.begin(), anchors.end());
  desc = "anchors plus pool residues; witness search is exact over the full grid";
  return reps;
}

std::string rotation_coset_certificate(const GridCircleSystem& g, long long a, long long b,
                                       const Rational& eps) {
  // displacement between glued visits lives in the subgroup generated by the
  // step; if b - a keeps circle distance >= 2 eps from it, no gap ever works
  long long d = std::gcd(g.step % g.size, g.size);
  if (d == 0) d = g.size;
  Rational best = 2;
  for (long long h = 0; h < g.size; h += d) {
    long long diff = ((b - a - h) % g.size + g.size) % g.size;
    Rational dist = Rational(std::min(diff, g.size - diff), g.size);
    if (dist < best) best = dist;
  }
  if (best >= 2 * eps) {
    std::ostringstream os;
    os << "displacement " << rational_to_string(Rational(((b - a) % g.size + g.size) % g.size, g.size))
       << " stays " << rational_to_string(best) << " away from the step subgroup (index "
       << d << "); balls of radius " << rational_to_string(eps) << " cannot bridge it";
    return os.str();
  }
  return "";
}

}  // namespace

GluingProfile gluing_profile(const System& sys, const Rational& eps, long long segment_length,
                             int rank, const CandidatePool* pool, long long cap) {
  if (eps <= 0) throw BadArgs("eps must be positive");
  if (sys.kind == SystemKind::sft) {
    GluingProfile p = decide_gluing_sft(sys, shadow_radius(eps), segment_length, rank, cap);
    p.eps = eps;
    return p;
  }
  if (sys.kind == SystemKind::substitution)
    return gluing_profile_subst(sys, eps, segment_length, rank, cap);
  if (sys.kind != SystemKind::grid)
    throw Unsupported("gluing profiles cover SFT, grid, and substitution systems");

  if (cap == 0) cap = default_cap(shadow_radius(eps));
  GluingProfile p;
  p.radius = shadow_radius(eps);
  p.eps = eps;
  p.segment_length = segment_length;
  p.rank = rank;
  p.cap = cap;
  p.status = ProfileStatus::finite;
  auto reps = grid_instance_bases(sys, eps, pool, p.pool_descriptor);
  p.family = "ordered pairs of base residues, segments of length " +
             std::to_string(segment_length);

  std::string worst, blocked, impossible_reason;
  for (long long a : reps)
    for (long long b : reps) {
      OrbitSequence seq = {{Point{a}, segment_length}, {Point{b}, segment_length}};
      InstanceOutcome io;
      io.label = "z=" + std::to_string(a) + " | z=" + std::to_string(b);
      std::optional<long long> best;
      for (long long t = 1; t <= cap && !best; ++t)
        if (find_shadow_grid(sys, seq, {t}, eps)) best = t;
      if (best) {
        io.min_max_gap = *best;
        if (*best > p.bound) {
          p.bound = *best;
          worst = io.label;
        }
      } else {
        io.obstruction = "no residue shadows this pair for any gap <= " + std::to_string(cap);
        if (sys.grid.map == GridMap::rotation && impossible_reason.empty())
          impossible_reason = rotation_coset_certificate(sys.grid, a, b, eps);
        if (blocked.empty()) blocked = io.label;
      }
      p.instances.push_back(std::move(io));
    }
  if (!blocked.empty()) {
    p.bound = -1;
    if (!impossible_reason.empty()) {
      p.status = ProfileStatus::impossible;
      p.certificate = "pair [" + blocked + "]: " + impossible_reason;
    } else {
      p.status = ProfileStatus::exceeds_cap;
      p.certificate = "pair [" + blocked + "] admits no gap <= " + std::to_string(cap) +
                      " (witness search exact over all " + std::to_string(sys.grid.size) +
                      " residues)";
    }
  } else {
    p.certificate = "worst pair [" + worst + "] needs gap " + std::to_string(p.bound);
  }
  return p;
}

}  // namespace orbitglue
