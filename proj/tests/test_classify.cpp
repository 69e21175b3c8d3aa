#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "orbitglue/classify.hpp"
#include "orbitglue/errors.hpp"

using namespace orbitglue;

namespace {

bool has(const std::string& text, const std::string& piece) {
  return text.find(piece) != std::string::npos;
}

// Transitive closure by repeated squaring of the boolean matrix. The library
// walks the graph instead, so agreement is meaningful.
std::vector<std::vector<bool>> closure_oracle(const SymbolicSystem& s) {
  int A = s.alphabet;
  std::vector<std::vector<bool>> r(A, std::vector<bool>(A, false));
  for (int a = 0; a < A; ++a)
    for (int b = 0; b < A; ++b) r[a][b] = s.transitions(a, b) != 0;
  for (int round = 0; round < A; ++round) {
    auto next = r;
    for (int a = 0; a < A; ++a)
      for (int m = 0; m < A; ++m)
        if (r[a][m])
          for (int b = 0; b < A; ++b)
            if (r[m][b]) next[a][b] = true;
    r = next;
  }
  return r;
}

bool irreducible_oracle(const SymbolicSystem& s) {
  auto r = closure_oracle(s);
  for (int a = 0; a < s.alphabet; ++a)
    for (int b = 0; b < s.alphabet; ++b)
      if (!r[a][b]) return false;
  return true;
}

bool single_cycle_oracle(const SymbolicSystem& s) {
  for (int a = 0; a < s.alphabet; ++a) {
    int deg = 0;
    for (int b = 0; b < s.alphabet; ++b) deg += s.transitions(a, b) ? 1 : 0;
    if (deg != 1) return false;
  }
  return irreducible_oracle(s);
}

bool orbit_covers(const GridCircleSystem& g, long long start) {
  std::vector<char> seen(static_cast<std::size_t>(g.size), 0);
  long long v = start;
  while (!seen[static_cast<std::size_t>(v)]) {
    seen[static_cast<std::size_t>(v)] = 1;
    v = grid_apply(g, v);
  }
  for (long long x = 0; x < g.size; ++x)
    if (!seen[static_cast<std::size_t>(x)]) return false;
  return true;
}

// Definition-level covering time: simulate every start and record when the
// last eps-ball is first entered.
long long covering_oracle(const GridCircleSystem& g, const Rational& eps) {
  long long worst = 0;
  for (long long y = 0; y < g.size; ++y) {
    std::vector<char> hit(static_cast<std::size_t>(g.size), 0);
    long long remaining = g.size;
    long long v = y;
    for (long long n = 0; remaining > 0; ++n) {
      REQUIRE(n <= 4 * g.size);
      for (long long x = 0; x < g.size; ++x)
        if (!hit[static_cast<std::size_t>(x)] && grid_distance(g, v, x) < eps) {
          hit[static_cast<std::size_t>(x)] = 1;
          if (--remaining == 0) worst = std::max(worst, n);
        }
      v = grid_apply(g, v);
    }
  }
  return worst;
}

// Every stay-away constraint re-checked through the public orbit interface,
// independent of the scan that found the pair.
void check_stay_away_legs(const System& sys, const Point& x, const Point& y,
                          const Rational& eps, long long steps) {
  Point cx = x, cy = y;
  for (long long n = 0; n <= steps; ++n) {
    if (n > 0) {
      CHECK(!(distance(sys, cx, x) < eps));
      CHECK(!(distance(sys, cy, y) < eps));
    }
    CHECK(!(distance(sys, cx, y) < eps));
    CHECK(!(distance(sys, cy, x) < eps));
    cx = apply_map(sys, cx);
    cy = apply_map(sys, cy);
  }
}

}  // namespace

TEST_CASE("verdict names") {
  CHECK(verdict_name(VerdictValue::yes) == "yes");
  CHECK(verdict_name(VerdictValue::no) == "no");
  CHECK(verdict_name(VerdictValue::unknown) == "unknown");
}

TEST_CASE("transitivity of shifts of finite type") {
  for (const char* name : {"full-2", "full-2-onesided", "full-3", "golden-mean", "two-cycle",
                           "rps", "disjoint-loops"}) {
    System sys = zoo_system(name);
    Verdict v = is_transitive(sys);
    CHECK(v.exact);
    bool expect = irreducible_oracle(sys.sft);
    CHECK((v.value == VerdictValue::yes) == expect);
  }

  SECTION("irreducible graphs list connectors") {
    Verdict v = is_transitive(zoo_system("rps"));
    CHECK(v.value == VerdictValue::yes);
    CHECK(has(v.certificate, "every ordered letter pair is connected"));
    CHECK(has(v.certificate, "1->0:2"));  // rock never loses directly to scissors
  }

  SECTION("reducible graphs name the unreachable pair") {
    Verdict v = is_transitive(zoo_system("disjoint-loops"));
    CHECK(v.value == VerdictValue::no);
    CHECK(v.certificate == "no path from letter 0 to letter 1 in the transition graph");
  }
}

TEST_CASE("transitivity of grid systems") {
  SECTION("single-cycle permutations are transitive") {
    for (const char* name : {"odometer-3", "odometer-5", "odometer-10", "rotation-7-3"}) {
      Verdict v = is_transitive(zoo_system(name));
      CHECK(v.value == VerdictValue::yes);
      CHECK(v.exact);
    }
  }

  SECTION("a rotation locked to a subgroup is not") {
    System sys = zoo_system("rotation-12-4");
    Verdict v = is_transitive(sys);
    CHECK(v.value == VerdictValue::no);
    CHECK(v.exact);
    CHECK(has(v.certificate, "misses the ball"));
    for (long long start = 0; start < sys.grid.size; ++start)
      CHECK(!orbit_covers(sys.grid, start));
  }

  SECTION("two orphan residues rule out a covering orbit") {
    System sys = zoo_system("square-8");
    Verdict v = is_transitive(sys);
    CHECK(v.value == VerdictValue::no);
    CHECK(v.exact);
    CHECK(has(v.certificate, "z=76"));
    CHECK(has(v.certificate, "z=85"));
    CHECK(has(v.certificate, "no preimage"));
    for (long long start = 0; start < sys.grid.size; ++start)
      CHECK(!orbit_covers(sys.grid, start));

    Verdict big = is_transitive(zoo_system("square-16"));
    CHECK(big.value == VerdictValue::no);
    CHECK(has(big.certificate, "z=16566"));
  }
}

TEST_CASE("transitivity of the thue-morse subshift is prefix-certified") {
  System sys = zoo_system("thue-morse");
  Verdict v = is_transitive(sys, 16);
  CHECK(v.value == VerdictValue::yes);
  CHECK_FALSE(v.exact);
  CHECK(has(v.scope, "length 16"));
  CHECK(has(v.certificate, "first occurs by index 47"));

  Verdict deep = is_transitive(sys, 64);
  CHECK(deep.value == VerdictValue::yes);
  CHECK(has(deep.scope, "length 64"));
}

TEST_CASE("minimality verdicts") {
  SECTION("shifts of finite type against the cycle oracle") {
    for (const char* name : {"full-2", "full-2-onesided", "full-3", "golden-mean",
                             "two-cycle", "rps", "disjoint-loops"}) {
      System sys = zoo_system(name);
      Verdict v = is_minimal(sys);
      CHECK(v.exact);
      CHECK((v.value == VerdictValue::yes) == single_cycle_oracle(sys.sft));
    }
    Verdict v = is_minimal(zoo_system("golden-mean"));
    CHECK(has(v.certificate, "[0]^inf"));
    CHECK(has(v.certificate, "[01]^inf"));
  }

  SECTION("grids against the all-starts oracle") {
    for (const char* name :
         {"odometer-3", "odometer-5", "rotation-7-3", "rotation-12-4", "square-8"}) {
      System sys = zoo_system(name);
      Verdict v = is_minimal(sys);
      CHECK(v.exact);
      bool expect = true;
      for (long long s = 0; s < sys.grid.size && expect; ++s)
        expect = orbit_covers(sys.grid, s);
      CHECK((v.value == VerdictValue::yes) == expect);
    }
    Verdict v = is_minimal(zoo_system("square-8"));
    CHECK(has(v.certificate, "no preimage"));
  }

  SECTION("thue-morse recurrence table") {
    Verdict v = is_minimal(zoo_system("thue-morse"), 64);
    CHECK(v.value == VerdictValue::yes);
    CHECK_FALSE(v.exact);
    CHECK(has(v.certificate, "R(1)=3"));
    CHECK(has(v.certificate, "R(2)=9"));
    CHECK(has(v.certificate, "R(4)=21"));
    CHECK(has(v.certificate, "R(8)=43"));
    CHECK(has(v.certificate, "R(16)=87"));
    CHECK(has(v.certificate, "R(32)=175"));
    CHECK(has(v.certificate, "R(64)=351"));
  }

  SECTION("argument validation") {
    CHECK_THROWS_AS(is_minimal(zoo_system("full-2"), 0), BadArgs);
    CHECK_THROWS_AS(is_transitive(zoo_system("full-2"), 0), BadArgs);
  }
}

TEST_CASE("equicontinuity modulus") {
  SECTION("isometric grids take delta = eps") {
    for (const char* name : {"odometer-10", "rotation-12-4", "rotation-7-3"}) {
      ModulusResult m = equicontinuity_modulus(zoo_system(name), Rational(1, 8), 64);
      CHECK(m.isometry);
      CHECK(m.equicontinuous.value == VerdictValue::yes);
      CHECK(m.equicontinuous.exact);
      REQUIRE(m.delta.has_value());
      CHECK(*m.delta == Rational(1, 8));
    }
  }

  SECTION("the squaring grid separates adjacent residues") {
    ModulusResult m = equicontinuity_modulus(zoo_system("square-8"), Rational(1, 8), 64);
    CHECK(m.equicontinuous.value == VerdictValue::no);
    CHECK(m.equicontinuous.exact);
    REQUIRE(m.pair.has_value());
    CHECK(m.pair->first.grid() == 255);
    CHECK(m.pair->second.grid() == 0);
    CHECK(m.witness_time == 6);

    // The wraparound pair is 1/256 apart yet its images drift to distance
    // 1/8 within six steps; re-run the orbit through the public interface.
    System sys = zoo_system("square-8");
    Point a = m.pair->first, b = m.pair->second;
    CHECK(distance(sys, a, b) == Rational(1, 256));
    for (int n = 0; n < m.witness_time; ++n) {
      a = apply_map(sys, a);
      b = apply_map(sys, b);
    }
    CHECK(!(distance(sys, a, b) < Rational(1, 8)));

    ModulusResult big = equicontinuity_modulus(zoo_system("square-16"), Rational(1, 8), 64);
    CHECK(big.equicontinuous.value == VerdictValue::no);
    REQUIRE(big.pair.has_value());
    CHECK(big.pair->first.grid() == 65535);
    CHECK(big.witness_time == 14);
    ModulusResult coarse = equicontinuity_modulus(zoo_system("square-16"), Rational(1, 4), 64);
    CHECK(coarse.witness_time == 15);
  }

  SECTION("permutation graphs are finite unions of periodic orbits") {
    for (const char* name : {"two-cycle", "disjoint-loops"}) {
      ModulusResult m = equicontinuity_modulus(zoo_system(name), Rational(1, 8), 64);
      CHECK(m.equicontinuous.value == VerdictValue::yes);
      CHECK(m.equicontinuous.exact);
      CHECK(*m.delta == Rational(1, 8));
    }
  }

  SECTION("a branching letter splits arbitrarily close pairs") {
    ModulusResult m = equicontinuity_modulus(zoo_system("full-2"), Rational(1, 8), 2048);
    CHECK(m.equicontinuous.value == VerdictValue::no);
    CHECK(m.equicontinuous.exact);
    REQUIRE(m.pair.has_value());
    CHECK(m.witness_time >= 1);
    System sys = zoo_system("full-2");
    Rational d0 = distance(sys, m.pair->first, m.pair->second);
    CHECK(d0 < Rational(1, 8));
    Point a = m.pair->first, b = m.pair->second;
    for (long long n = 0; n < m.witness_time; ++n) {
      a = apply_map(sys, a);
      b = apply_map(sys, b);
    }
    CHECK(!(distance(sys, a, b) < Rational(1, 8)));
  }

  SECTION("a pool counterexample is reported when one exists") {
    System sys = zoo_system("golden-mean");
    CandidatePool pool = make_pool(sys, 32, 0);
    ModulusResult m = equicontinuity_modulus(sys, Rational(1, 8), 2048, &pool);
    CHECK(m.equicontinuous.value == VerdictValue::no);
    CHECK(m.equicontinuous.exact);
    CHECK(has(m.equicontinuous.certificate, "pool pair"));
  }

  SECTION("above the diameter everything is trivially equicontinuous") {
    ModulusResult m = equicontinuity_modulus(zoo_system("full-2"), Rational(3, 2), 16);
    CHECK(m.equicontinuous.value == VerdictValue::yes);
    CHECK(*m.delta == Rational(3, 2));
  }

  SECTION("products need a pool") {
    System prod;
    prod.kind = SystemKind::product;
    prod.label = "pair";
    prod.components = {zoo_system("full-2"), zoo_system("odometer-3")};
    CHECK_THROWS_AS(equicontinuity_modulus(prod, Rational(1, 8), 64), EmptyPool);
    CandidatePool pool = make_pool(prod, 16, 0);
    ModulusResult m = equicontinuity_modulus(prod, Rational(1, 8), 64, &pool);
    CHECK_FALSE(m.equicontinuous.exact);
  }

  SECTION("argument validation") {
    CHECK_THROWS_AS(equicontinuity_modulus(zoo_system("full-2"), Rational(0), 64), BadArgs);
    CHECK_THROWS_AS(equicontinuity_modulus(zoo_system("full-2"), Rational(1, 2), 0), BadArgs);
    CHECK_THROWS_AS(equicontinuity_modulus(zoo_system("thue-morse"), Rational(1, 2), 64),
                    Unsupported);
  }
}

TEST_CASE("non-recurrent points") {
  SECTION("heteroclinic connections on gluing shifts") {
    struct Expect {
      const char* name;
      Word left, right;
    };
    for (const Expect& e : {Expect{"full-2", {0}, {1}}, Expect{"golden-mean", {0}, {0, 1}}}) {
      NonrecurrenceResult r = find_nonrecurrent(zoo_system(e.name), Rational(1, 2), 2048);
      REQUIRE(r.found);
      CHECK(r.exact);
      REQUIRE(r.point.is_symbolic());
      CHECK(r.point.symbolic().left_cycle == e.left);
      CHECK(r.point.symbolic().right_cycle == e.right);
    }
    NonrecurrenceResult one =
        find_nonrecurrent(zoo_system("full-2-onesided"), Rational(1, 2), 2048);
    REQUIRE(one.found);
    CHECK(one.point.symbolic().right_cycle == Word{1});
  }

  SECTION("the found point verifies through the plain orbit") {
    System sys = zoo_system("full-2");
    NonrecurrenceResult r = find_nonrecurrent(sys, Rational(1, 2), 2048);
    REQUIRE(r.found);
    Point cur = apply_map(sys, r.point);
    for (int n = 1; n <= 64; ++n) {
      CHECK(!(distance(sys, cur, r.point) < Rational(1, 2)));
      cur = apply_map(sys, cur);
    }
  }

  SECTION("recurrent systems report none") {
    for (const char* name : {"odometer-10", "rotation-12-4", "two-cycle"}) {
      NonrecurrenceResult r = find_nonrecurrent(zoo_system(name), Rational(1, 2), 2048);
      CHECK_FALSE(r.found);
    }
    // Wandering only shows below the fixed-point jump d(f(G/2), G/2) = 1/4.
    NonrecurrenceResult half = find_nonrecurrent(zoo_system("square-8"), Rational(1, 2), 2048);
    CHECK_FALSE(half.found);
  }

  SECTION("the squaring grids wander at eps = 1/4") {
    NonrecurrenceResult r8 = find_nonrecurrent(zoo_system("square-8"), Rational(1, 4), 2048);
    REQUIRE(r8.found);
    CHECK(r8.exact);
    CHECK(r8.point.grid() == 117);

    NonrecurrenceResult r16 = find_nonrecurrent(zoo_system("square-16"), Rational(1, 4), 2048);
    REQUIRE(r16.found);
    CHECK(r16.exact);
    CHECK(r16.point.grid() == 32587);

    System sys = zoo_system("square-16");
    Point cur = apply_map(sys, r16.point);
    for (int n = 1; n <= 64; ++n) {
      CHECK(!(distance(sys, cur, r16.point) < Rational(1, 4)));
      cur = apply_map(sys, cur);
    }
  }

  SECTION("substitution systems scan nothing") {
    NonrecurrenceResult r = find_nonrecurrent(zoo_system("thue-morse"), Rational(1, 2), 64);
    CHECK_FALSE(r.found);
    CHECK(has(r.detail, "no representable points"));
  }

  SECTION("argument validation") {
    CHECK_THROWS_AS(find_nonrecurrent(zoo_system("full-2"), Rational(0), 64), BadArgs);
    CHECK_THROWS_AS(find_nonrecurrent(zoo_system("full-2"), Rational(1, 2), 0), BadArgs);
  }
}

TEST_CASE("stay-away pairs") {
  SECTION("gluing shifts have exact pairs") {
    for (const char* name :
         {"full-2", "golden-mean", "full-3", "rps", "full-2-onesided"}) {
      System sys = zoo_system(name);
      StayAwayResult r = stay_away_pair(sys, Rational(1, 2), 2048);
      REQUIRE(r.found);
      CHECK(r.exact);
      check_stay_away_legs(sys, r.x, r.y, Rational(1, 2), 64);
    }
  }

  SECTION("every rotation residue returns, so no pair exists") {
    StayAwayResult r = stay_away_pair(zoo_system("rotation-12-4"), Rational(1, 2), 2048);
    CHECK_FALSE(r.found);
    StayAwayResult cyc = stay_away_pair(zoo_system("two-cycle"), Rational(1, 2), 2048);
    CHECK_FALSE(cyc.found);
  }

  SECTION("squaring grid pairs verify leg by leg when present") {
    System sys = zoo_system("square-8");
    StayAwayResult r = stay_away_pair(sys, Rational(1, 4), 2048);
    if (r.found) check_stay_away_legs(sys, r.x, r.y, Rational(1, 4), 64);
  }

  SECTION("argument validation") {
    CHECK_THROWS_AS(stay_away_pair(zoo_system("full-2"), Rational(-1, 2), 64), BadArgs);
    CHECK_THROWS_AS(stay_away_pair(zoo_system("full-2"), Rational(1, 2), 0), BadArgs);
  }
}

TEST_CASE("covering times") {
  System od10 = zoo_system("odometer-10");
  CHECK(covering_time(od10, Rational(1, 2)) == 1);
  CHECK(covering_time(od10, Rational(1, 4)) == 3);
  CHECK(covering_time(od10, Rational(1, 8)) == 7);

  System rot = zoo_system("rotation-7-3");
  CHECK(covering_time(rot, Rational(1, 2)) == 0);
  CHECK(covering_time(rot, Rational(1, 4)) == 2);
  CHECK(covering_time(rot, Rational(1, 7)) == 6);
  CHECK(covering_time(rot, Rational(1, 14)) == 6);

  SECTION("agrees with the definition-level oracle") {
    System od3 = zoo_system("odometer-3");
    for (const Rational& eps : {Rational(1, 2), Rational(1, 4), Rational(1, 8)})
      CHECK(covering_time(od3, eps) == covering_oracle(od3.grid, eps));
    for (const Rational& eps : {Rational(1, 2), Rational(1, 4), Rational(1, 7)})
      CHECK(covering_time(rot, eps) == covering_oracle(rot.grid, eps));
  }

  SECTION("shrinking eps never shrinks the covering time") {
    System od5 = zoo_system("odometer-5");
    long long prev = -1;
    for (int k = 1; k <= 5; ++k) {
      long long n = covering_time(od5, Rational(1, 1 << k));
      CHECK(n >= prev);
      prev = n;
    }
  }

  SECTION("demands a finite minimal system") {
    CHECK_THROWS_AS(covering_time(zoo_system("full-2"), Rational(1, 2)), NotFinite);
    CHECK_THROWS_AS(covering_time(zoo_system("rotation-12-4"), Rational(1, 2)), NotMinimal);
    CHECK_THROWS_AS(covering_time(zoo_system("square-8"), Rational(1, 2)), NotMinimal);
    CHECK_THROWS_AS(covering_time(od10, Rational(0)), BadArgs);
  }
}

TEST_CASE("bump observable and Birkhoff averages") {
  System sys = zoo_system("square-16");
  const long long G = sys.grid.size;
  BirkhoffProbe probe{Point{G / 2}, Rational(1, 4)};

  SECTION("bump is piecewise linear in the distance") {
    CHECK(bump_value(sys, probe, Point{G / 2}) == Rational(1));          // d = 0
    CHECK(bump_value(sys, probe, Point{G / 4}) == Rational(1));          // d = eps
    CHECK(bump_value(sys, probe, Point{G / 8}) == Rational(1, 2));       // d = 3 eps / 2
    CHECK(bump_value(sys, probe, Point{0}) == Rational(0));              // d = 2 eps
    CHECK(bump_value(sys, probe, Point{G / 16}) == Rational(1, 4));      // d = 7 eps / 4
  }

  SECTION("a fixed point at the center averages exactly one") {
    System full2 = zoo_system("full-2");
    Point fix{SymbolicPoint{{0}, {}, {0}, 0}};
    BirkhoffProbe p{fix, Rational(1, 4)};
    CHECK(birkhoff_gap(full2, fix, p, 64) == Rational(1));
  }

  SECTION("distinct cycles pin distinct exact averages") {
    System golden = zoo_system("golden-mean");
    Point zero{SymbolicPoint{{0}, {}, {0}, 0}};
    Point alt{SymbolicPoint{{0, 1}, {}, {0, 1}, 0}};
    BirkhoffProbe p{zero, Rational(1, 4)};
    CHECK(birkhoff_gap(golden, zero, p, 4096) == Rational(1));
    CHECK(birkhoff_gap(golden, alt, p, 4096) == Rational(0));
  }

  SECTION("an orbit sinking into the far fixed point averages zero") {
    // Start at 1/4 of the circle, probe around 1/2: the orbit squares off to
    // 0 and never comes back within 2 eps of the center.
    BirkhoffProbe p{Point{G / 2}, Rational(1, 16)};
    CHECK(birkhoff_gap(sys, Point{G / 4}, p, 64) == Rational(0));
  }

  SECTION("argument validation") {
    CHECK_THROWS_AS(birkhoff_gap(sys, Point{0}, probe, 0), BadArgs);
    BirkhoffProbe bad{Point{0}, Rational(0)};
    CHECK_THROWS_AS(bump_value(sys, bad, Point{0}), BadArgs);
  }
}

TEST_CASE("default options per family") {
  ClassifyOptions sq = default_options(zoo_system("square-16"));
  CHECK(sq.n_max == 32);
  REQUIRE(sq.eps_list.size() == 2);
  CHECK(sq.eps_list[0] == Rational(1, 4));
  CHECK(sq.eps_list[1] == Rational(1, 8));

  ClassifyOptions rot = default_options(zoo_system("rotation-12-4"));
  REQUIRE(rot.eps_list.size() == 3);
  CHECK(rot.eps_list[2] == Rational(1, 24));  // the resolution scale decides gluing

  ClassifyOptions sft = default_options(zoo_system("full-2"));
  CHECK(sft.n_max == 16);
  CHECK(sft.eps_list == std::vector<Rational>{Rational(1, 2), Rational(1, 4), Rational(1, 8)});

  ClassifyOptions tm = default_options(zoo_system("thue-morse"));
  CHECK(tm.segment_length == 8);
}

TEST_CASE("classification of the full 2-shift") {
  System sys = zoo_system("full-2");
  ClassificationReport rep = classify(sys, default_options(sys));

  CHECK(rep.transitive.value == VerdictValue::yes);
  CHECK(rep.minimal.value == VerdictValue::no);
  CHECK(rep.equicontinuous.value == VerdictValue::no);
  CHECK(rep.glues.value == VerdictValue::yes);
  CHECK(rep.specification.value == VerdictValue::yes);
  for (const Verdict* v : {&rep.transitive, &rep.minimal, &rep.equicontinuous, &rep.glues,
                           &rep.specification})
    CHECK(v->exact);

  REQUIRE(rep.gluing.has_value());
  CHECK(rep.gluing->radius == 1);
  CHECK(rep.gluing->bound == 3);
  REQUIRE(rep.spec_profile.has_value());
  CHECK(rep.spec_profile->bound == 3);

  REQUIRE(rep.entropy.has_value());
  CHECK(rep.entropy->h_estimate == Catch::Approx(std::log(2.0)).margin(1e-9));
  REQUIRE(rep.periodic.has_value());

  std::map<std::string, std::string> status;
  for (const TheoremCheck& c : rep.checks) status[c.id] = c.status;
  CHECK(status.at("T1") == "pass");
  CHECK(status.at("T5a") == "skip");
  CHECK(status.at("T5b") == "skip");
  CHECK(status.at("T4.1") == "pass");
  CHECK(status.at("T4.2") == "pass");
  CHECK(status.at("L3.1") == "pass");
}

TEST_CASE("classification of the odometer") {
  System sys = zoo_system("odometer-10");
  ClassificationReport rep = classify(sys, default_options(sys));

  CHECK(rep.transitive.value == VerdictValue::yes);
  CHECK(rep.minimal.value == VerdictValue::yes);
  CHECK(rep.equicontinuous.value == VerdictValue::yes);
  CHECK(rep.glues.value == VerdictValue::yes);
  CHECK(rep.glues.exact);
  CHECK(has(rep.glues.certificate, "covering time + 1"));
  CHECK(rep.specification.value == VerdictValue::unknown);
  REQUIRE(rep.cover_time.has_value());
  CHECK(*rep.cover_time == 7);
  CHECK(rep.entropy->h_estimate == 0.0);

  for (const TheoremCheck& c : rep.checks) {
    CHECK(c.status != "fail");
    if (c.id == "T5a" || c.id == "T5b") CHECK(c.status == "pass");
  }
}

TEST_CASE("classification of the subgroup rotation") {
  System sys = zoo_system("rotation-12-4");
  ClassificationReport rep = classify(sys, default_options(sys));

  CHECK(rep.transitive.value == VerdictValue::no);
  CHECK(rep.minimal.value == VerdictValue::no);
  CHECK(rep.equicontinuous.value == VerdictValue::yes);
  CHECK(rep.glues.value == VerdictValue::no);
  CHECK(rep.glues.exact);
  CHECK(has(rep.glues.certificate, "subgroup"));
  CHECK_FALSE(rep.cover_time.has_value());

  for (const TheoremCheck& c : rep.checks) CHECK(c.status != "fail");
  bool nonrec_note = false;
  for (const std::string& n : rep.notes)
    if (has(n, "every residue re-enters")) nonrec_note = true;
  CHECK(nonrec_note);
}

TEST_CASE("classification of the squaring grid") {
  System sys = zoo_system("square-16");
  ClassificationReport rep = classify(sys, default_options(sys));

  CHECK(rep.transitive.value == VerdictValue::no);
  CHECK(rep.minimal.value == VerdictValue::no);
  CHECK(rep.equicontinuous.value == VerdictValue::no);
  CHECK(rep.glues.value == VerdictValue::unknown);
  REQUIRE(rep.gluing.has_value());
  CHECK(rep.gluing->status == ProfileStatus::exceeds_cap);
  CHECK(has(rep.gluing->certificate, "no gap <= 64"));

  // Orbits absorb into the fixed point, so the count saturates and the
  // difference quotient is exactly zero.
  CHECK(rep.entropy->h_estimate == 0.0);

  for (const TheoremCheck& c : rep.checks) CHECK(c.status != "fail");
  std::map<std::string, std::string> status;
  for (const TheoremCheck& c : rep.checks) status[c.id] = c.status;
  CHECK(status.at("T1") == "skip");
  CHECK(status.at("T4.1") == "skip");

  // The informative half of T4.1: sampled averages cluster tightly, as a
  // uniquely ergodic quotient would predict.
  CandidatePool pool = make_pool(sys, 8, 0);
  BirkhoffProbe probe{pool.points[0], Rational(1, 16)};
  Rational lo(1), hi(0);
  for (const Point& p : pool.points) {
    Rational a = birkhoff_gap(sys, p, probe, 4096);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  CHECK(Rational(hi - lo).convert_to<double>() < 0.01);

  bool nonrec_note = false;
  for (const std::string& n : rep.notes)
    if (has(n, "z=32587")) nonrec_note = true;
  CHECK(nonrec_note);
}

TEST_CASE("classification of the remaining families") {
  SECTION("two-cycle: minimal, equicontinuous, glues, no specification") {
    System sys = zoo_system("two-cycle");
    ClassificationReport rep = classify(sys, default_options(sys));
    CHECK(rep.transitive.value == VerdictValue::yes);
    CHECK(rep.minimal.value == VerdictValue::yes);
    CHECK(rep.equicontinuous.value == VerdictValue::yes);
    CHECK(rep.glues.value == VerdictValue::yes);
    CHECK(rep.specification.value == VerdictValue::no);
    CHECK(has(rep.specification.certificate, "divisible by 2"));
    for (const TheoremCheck& c : rep.checks) CHECK(c.status != "fail");
  }

  SECTION("disjoint loops: reducible, nothing glues") {
    System sys = zoo_system("disjoint-loops");
    ClassificationReport rep = classify(sys, default_options(sys));
    CHECK(rep.transitive.value == VerdictValue::no);
    CHECK(has(rep.transitive.certificate, "no path"));
    CHECK(rep.minimal.value == VerdictValue::no);
    CHECK(rep.equicontinuous.value == VerdictValue::yes);
    CHECK(rep.glues.value == VerdictValue::no);
    CHECK(rep.specification.value == VerdictValue::no);
    for (const TheoremCheck& c : rep.checks) CHECK(c.status != "fail");
  }

  SECTION("thue-morse: prefix-certified positives, bounded unknowns") {
    System sys = zoo_system("thue-morse");
    ClassificationReport rep = classify(sys, default_options(sys));
    CHECK(rep.transitive.value == VerdictValue::yes);
    CHECK_FALSE(rep.transitive.exact);
    CHECK(rep.minimal.value == VerdictValue::yes);
    CHECK_FALSE(rep.minimal.exact);
    CHECK(rep.equicontinuous.value == VerdictValue::unknown);
    CHECK(rep.glues.value == VerdictValue::unknown);
    CHECK(has(rep.glues.certificate, "M(4)=7"));
    CHECK(has(rep.glues.certificate, "M(32)=63"));
    CHECK(rep.specification.value == VerdictValue::unknown);
    CHECK_FALSE(rep.periodic.has_value());
    for (const TheoremCheck& c : rep.checks) CHECK(c.status != "fail");
  }

  SECTION("products: componentwise questions stay open") {
    System prod;
    prod.kind = SystemKind::product;
    prod.label = "pair";
    prod.components = {zoo_system("full-2"), zoo_system("odometer-3")};
    ClassificationReport rep = classify(prod, default_options(prod));
    CHECK(rep.transitive.value == VerdictValue::unknown);
    CHECK(rep.minimal.value == VerdictValue::unknown);
    CHECK(rep.glues.value == VerdictValue::unknown);
    CHECK(rep.specification.value == VerdictValue::unknown);
    for (const TheoremCheck& c : rep.checks) CHECK(c.status != "fail");
  }

  SECTION("empty eps list is refused") {
    ClassifyOptions opt;
    CHECK_THROWS_AS(classify(zoo_system("full-2"), opt), BadArgs);
  }
}
