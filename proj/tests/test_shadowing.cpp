#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "orbitglue/shadowing.hpp"

using namespace orbitglue;

namespace {

OrbitSegment seg(const SymbolicPoint& p, long long len) {
  return OrbitSegment{Point{p}, len};
}

OrbitSegment gseg(long long v, long long len) { return OrbitSegment{Point{v}, len}; }

SymbolicPoint all_of(int letter) { return periodic_point({letter}); }

SymbolicPoint step_point(int low, int high, long long first_high) {
  // low everywhere below first_high, high from first_high on
  SymbolicPoint p;
  p.left_cycle = {low};
  p.right_cycle = {high};
  p.origin_offset = -first_high;
  return p;
}

}  // namespace

TEST_CASE("schedule arithmetic") {
  System full2 = zoo_system("full-2");
  OrbitSequence seq = {seg(all_of(0), 2), seg(all_of(1), 1)};
  CHECK(shadow_schedule(seq, {1}) == std::vector<long long>{0, 2});

  OrbitSequence seq3 = {seg(all_of(0), 2), seg(all_of(1), 3), seg(all_of(0), 1)};
  CHECK(shadow_schedule(seq3, {3, 4}) == std::vector<long long>{0, 4, 10});

  CHECK_THROWS_AS(shadow_schedule(seq, {}), RankMismatch);
  CHECK_THROWS_AS(shadow_schedule(seq, {1, 2}), RankMismatch);
  CHECK_THROWS_AS(shadow_schedule(seq, {0}), BadArgs);

  OrbitSequence bad = {seg(all_of(0), 0)};
  CHECK_THROWS_AS(validate_sequence(full2, bad), BadArgs);
  CHECK_THROWS_AS(validate_sequence(full2, {}), BadArgs);
}

TEST_CASE("verify_shadow on the full 2-shift") {
  System full2 = zoo_system("full-2");
  OrbitSequence seq = {seg(all_of(0), 2), seg(all_of(1), 2)};

  SECTION("too-small gap is rejected at the first bad step") {
    auto v = verify_shadow(full2, Point{all_of(0)}, seq, {1}, Rational(1, 2));
    CHECK_FALSE(v.accepted);
    CHECK(v.segment == 2);
    CHECK(v.step == 0);
    CHECK(v.distance == 1);
  }

  SECTION("transition point is accepted with gap 3") {
    Point z{step_point(0, 1, 3)};
    auto v = verify_shadow(full2, z, seq, {3}, Rational(1, 2));
    CHECK(v.accepted);

    // tighter eps needs wider agreement and fails partway into segment 1
    auto w = verify_shadow(full2, z, seq, {3}, Rational(1, 4));
    CHECK_FALSE(w.accepted);
    CHECK(w.segment == 1);
    CHECK(w.step == 1);
    CHECK(w.distance == Rational(1, 4));
  }

  SECTION("eps monotonicity") {
    Point z{step_point(0, 1, 3)};
    for (int r = 0; r <= 4; ++r) {
      bool fine = verify_shadow(full2, z, seq, {3}, pow2(-r)).accepted;
      bool coarse = verify_shadow(full2, z, seq, {3}, pow2(-r + 1)).accepted;
      if (fine) CHECK(coarse);
    }
  }

  SECTION("bad eps") {
    CHECK_THROWS_AS(verify_shadow(full2, Point{all_of(0)}, seq, {1}, Rational(0)), BadArgs);
  }
}

TEST_CASE("window merging finds the documented conflicts") {
  System full2 = zoo_system("full-2");
  OrbitSequence seq = {seg(all_of(0), 2), seg(all_of(1), 2)};

  SECTION("overlap clash") {
    auto m = merge_windows(full2, seq, {2}, 1);
    REQUIRE_FALSE(m.ok);
    REQUIRE(m.conflict.has_value());
    CHECK(m.conflict->kind == ConflictKind::forced_letters);
    CHECK(m.conflict->coordinate == 2);
    CHECK(m.conflict->have == 0);
    CHECK(m.conflict->want == 1);
  }

  SECTION("abutting windows fuse into one run") {
    auto m = merge_windows(full2, seq, {3}, 1);
    REQUIRE(m.ok);
    REQUIRE(m.runs.size() == 1);
    CHECK(m.runs[0].first == -1);
    CHECK(m.runs[0].second == Word{0, 0, 0, 0, 1, 1, 1, 1});
  }

  SECTION("a wider gap leaves two runs with a free coordinate") {
    auto m = merge_windows(full2, seq, {4}, 1);
    REQUIRE(m.ok);
    REQUIRE(m.runs.size() == 2);
    CHECK(m.runs[0].first == -1);
    CHECK(m.runs[0].second == Word{0, 0, 0, 0});
    CHECK(m.runs[1].first == 4);
    CHECK(m.runs[1].second == Word{1, 1, 1, 1});
  }

  SECTION("adjacency conflict on the golden mean shift") {
    System golden = zoo_system("golden-mean");
    SymbolicPoint odd = periodic_point({0, 1});
    OrbitSequence gseq = {seg(odd, 1), seg(odd, 1)};
    auto m = merge_windows(golden, gseq, {3}, 1);
    REQUIRE_FALSE(m.ok);
    REQUIRE(m.conflict.has_value());
    CHECK(m.conflict->kind == ConflictKind::adjacency);
    CHECK(m.conflict->coordinate == 1);
  }

  SECTION("parity makes an exact-length connector impossible") {
    System twoc = zoo_system("two-cycle");
    SymbolicPoint p = periodic_point({0, 1});
    OrbitSequence tseq = {seg(p, 1), seg(p, 1)};
    // s_2 = 3 forces letters 0 at coordinates 0 and 3: no odd path 0 -> 0
    auto m = merge_windows(twoc, tseq, {3}, 0);
    REQUIRE_FALSE(m.ok);
    REQUIRE(m.conflict.has_value());
    CHECK(m.conflict->kind == ConflictKind::no_path);
    CHECK(m.conflict->coordinate == 1);

    auto ok = merge_windows(twoc, tseq, {2}, 0);
    CHECK(ok.ok);
  }
}

TEST_CASE("find_shadow_sft materializes deterministic witnesses") {
  System full2 = zoo_system("full-2");
  OrbitSequence seq = {seg(all_of(0), 2), seg(all_of(1), 2)};

  SECTION("gap 2 conflicts, gap 3 yields the step witness") {
    auto bad = find_shadow_sft(full2, seq, {2}, 1);
    CHECK_FALSE(bad.found);
    REQUIRE(bad.conflict.has_value());
    CHECK(bad.conflict->coordinate == 2);

    auto good = find_shadow_sft(full2, seq, {3}, 1);
    REQUIRE(good.found);
    const auto& w = good.witness->symbolic();
    CHECK(letter_at(w, -2) == 0);
    CHECK(letter_at(w, -1) == 0);
    CHECK(letter_at(w, 2) == 0);
    CHECK(letter_at(w, 3) == 1);
    CHECK(letter_at(w, 6) == 1);
    CHECK(letter_at(w, 7) == 0);
    CHECK(verify_shadow(full2, *good.witness, seq, {3}, Rational(1, 2)).accepted);
  }

  SECTION("radius 0 on the golden mean shift gives the all-zero witness") {
    System golden = zoo_system("golden-mean");
    OrbitSequence gs = {seg(all_of(0), 1), seg(all_of(0), 1)};
    auto got = find_shadow_sft(golden, gs, {1}, 0);
    REQUIRE(got.found);
    CHECK(symbolic_equal(got.witness->symbolic(), all_of(0), Sidedness::two_sided));
    CHECK(verify_shadow(golden, *got.witness, gs, {1}, Rational(1)).accepted);
  }

  SECTION("golden mean gap around a forbidden junction") {
    System golden = zoo_system("golden-mean");
    SymbolicPoint odd = periodic_point({0, 1});
    OrbitSequence gs = {seg(odd, 1), seg(odd, 1)};
    auto got = find_shadow_sft(golden, gs, {4}, 1);
    REQUIRE(got.found);
    const auto& w = got.witness->symbolic();
    for (long long c = -1; c <= 5; ++c) CHECK(letter_at(w, c) == (c % 2 == 0 ? 0 : 1) * 1);
    CHECK(verify_shadow(golden, *got.witness, gs, {4}, Rational(1, 2)).accepted);
  }

  SECTION("one-sided windows never extend left") {
    System oned = zoo_system("full-2-onesided");
    SymbolicPoint zero;
    zero.right_cycle = {0};
    SymbolicPoint one;
    one.right_cycle = {1};
    OrbitSequence os = {seg(zero, 1), seg(one, 1)};
    // s_2 = 2 at r = 1: windows [0,1] and [2,4], nothing at -1
    auto got = find_shadow_sft(oned, os, {2}, 1);
    REQUIRE(got.found);
    const auto& w = got.witness->symbolic();
    CHECK(w.origin_offset == 0);
    CHECK(w.left_cycle.empty());
    CHECK(letter_at(w, 0) == 0);
    CHECK(letter_at(w, 1) == 0);
    CHECK(letter_at(w, 2) == 1);
    CHECK(verify_shadow(oned, *got.witness, os, {2}, Rational(1, 2)).accepted);
  }
}

TEST_CASE("find_gap_and_shadow picks the lexicographically least gap") {
  System full2 = zoo_system("full-2");
  OrbitSequence seq = {seg(all_of(0), 2), seg(all_of(1), 2)};

  SECTION("pair needs gap 3 at eps 1/2") {
    auto got = find_gap_and_shadow(full2, seq, Rational(1, 2), 3);
    REQUIRE(got.found);
    CHECK(got.gap == Gap{3});
    CHECK(got.tuples_tried == 3);
    CHECK(verify_shadow(full2, *got.witness, seq, got.gap, Rational(1, 2)).accepted);

    auto missed = find_gap_and_shadow(full2, seq, Rational(1, 2), 2);
    CHECK_FALSE(missed.found);
    CHECK(missed.tuples_tried == 2);
  }

  SECTION("rank 3 scans tuples in lexicographic order") {
    OrbitSequence seq3 = {seg(all_of(0), 2), seg(all_of(1), 2), seg(all_of(0), 2)};
    auto got = find_gap_and_shadow(full2, seq3, Rational(1, 2), 3);
    REQUIRE(got.found);
    CHECK(got.gap == Gap{3, 3});
    CHECK(got.tuples_tried == 9);
  }

  SECTION("rank 1 returns the base point with no gap") {
    OrbitSequence solo = {seg(all_of(1), 4)};
    auto got = find_gap_and_shadow(full2, solo, Rational(1, 2), 5);
    REQUIRE(got.found);
    CHECK(got.gap.empty());
    CHECK(got.tuples_tried == 0);
    CHECK(points_equal(full2, *got.witness, Point{all_of(1)}));
  }

  SECTION("gap monotonicity on full shifts") {
    std::mt19937_64 rng(11);
    System full3 = zoo_system("full-3");
    for (int trial = 0; trial < 40; ++trial) {
      System& sys = trial % 2 ? full3 : full2;
      int alpha = trial % 2 ? 3 : 2;
      OrbitSequence s2 = {seg(all_of(static_cast<int>(rng() % alpha)), 1 + rng() % 3),
                          seg(all_of(static_cast<int>(rng() % alpha)), 1 + rng() % 3)};
      int r = static_cast<int>(rng() % 3);
      Gap g = {1 + static_cast<long long>(rng() % 6)};
      bool base = find_shadow_sft(sys, s2, g, r).found;
      if (!base) continue;
      Gap bigger = {g[0] + 1 + static_cast<long long>(rng() % 3)};
      CHECK(find_shadow_sft(sys, s2, bigger, r).found);
    }
  }
}

TEST_CASE("grid witness search is exact") {
  SECTION("odometer congruences") {
    System od5 = zoo_system("odometer-5");
    OrbitSequence seq = {gseg(0, 1), gseg(5, 1)};
    auto got = find_gap_and_shadow(od5, seq, Rational(1, 8), 16);
    REQUIRE(got.found);
    CHECK(got.gap == Gap{5});
    CHECK(got.witness->grid() == 0);
    CHECK(verify_shadow(od5, *got.witness, seq, got.gap, Rational(1, 8)).accepted);
  }

  SECTION("rotation coset obstruction") {
    System rot = zoo_system("rotation-12-4");
    OrbitSequence seq = {gseg(0, 1), gseg(1, 1)};
    auto got = find_gap_and_shadow(rot, seq, Rational(1, 24), 100);
    CHECK_FALSE(got.found);
    CHECK(got.tuples_tried == 100);

    OrbitSequence ok = {gseg(0, 1), gseg(8, 1)};
    auto hit = find_gap_and_shadow(rot, ok, Rational(1, 24), 100);
    REQUIRE(hit.found);
    CHECK(hit.gap == Gap{2});
    CHECK(hit.witness->grid() == 0);
  }

  SECTION("squaring map witness matches the hand computation") {
    System sq = zoo_system("square-8");
    OrbitSequence seq = {gseg(128, 1), gseg(0, 2)};
    auto z = find_shadow_grid(sq, seq, {1}, Rational(1, 4));
    REQUIRE(z.has_value());
    CHECK(*z == 65);
    CHECK(verify_shadow(sq, Point{*z}, seq, {1}, Rational(1, 4)).accepted);
  }

  SECTION("grid search agrees with brute force over the whole space") {
    std::mt19937_64 rng(23);
    std::vector<System> grids = {zoo_system("square-8"), zoo_system("rotation-12-4"),
                                 zoo_system("odometer-5")};
    std::vector<Rational> epss = {Rational(1, 2), Rational(1, 4), Rational(1, 8)};
    for (int trial = 0; trial < 60; ++trial) {
      const System& sys = grids[trial % grids.size()];
      const long long G = sys.grid.size;
      OrbitSequence seq = {gseg(static_cast<long long>(rng() % G), 1 + rng() % 3),
                           gseg(static_cast<long long>(rng() % G), 1 + rng() % 3)};
      Gap g = {1 + static_cast<long long>(rng() % 6)};
      Rational eps = epss[rng() % epss.size()];
      auto fast = find_shadow_grid(sys, seq, g, eps);
      std::optional<long long> brute;
      for (long long z = 0; z < G && !brute; ++z)
        if (verify_shadow(sys, Point{z}, seq, g, eps).accepted) brute = z;
      CHECK(fast.has_value() == brute.has_value());
      if (fast && brute) CHECK(*fast == *brute);
    }
  }
}

TEST_CASE("sft search agrees with window enumeration") {
  std::mt19937_64 rng(2026);
  std::vector<System> systems = {zoo_system("full-2"), zoo_system("golden-mean"),
                                 zoo_system("two-cycle"), zoo_system("rps")};
  int done = 0;
  while (done < 200) {
    const System& sys = systems[rng() % systems.size()];
    auto bases = periodic_points_up_to(sys.sft, 3);
    const int rank = 2 + static_cast<int>(rng() % 2);
    OrbitSequence seq;
    for (int j = 0; j < rank; ++j)
      seq.push_back(seg(bases[rng() % bases.size()], 1 + static_cast<long long>(rng() % 4)));
    Gap gap;
    for (int j = 0; j + 1 < rank; ++j) gap.push_back(1 + static_cast<long long>(rng() % 6));
    const int r = static_cast<int>(rng() % 3);
    const auto s = shadow_schedule(seq, gap);
    const long long lo = -r;
    const long long hi = s.back() + seq.back().length - 1 + r;
    if (hi - lo + 1 > 16) continue;
    ++done;

    std::map<long long, int> forced;
    bool clash = false;
    for (size_t j = 0; j < seq.size() && !clash; ++j) {
      for (long long c = s[j] - r; c <= s[j] + seq[j].length - 1 + r; ++c) {
        int want = letter_at(seq[j].base.symbolic(), c - s[j]);
        auto it = forced.find(c);
        if (it != forced.end() && it->second != want) clash = true;
        forced[c] = want;
      }
    }
    bool brute = false;
    if (!clash) {
      enumerate_admissible_words(sys.sft, static_cast<int>(hi - lo + 1), [&](const Word& w) {
        if (brute) return;
        for (const auto& [c, want] : forced)
          if (w[c - lo] != want) return;
        brute = true;
      });
    }

    auto got = find_shadow_sft(sys, seq, gap, r);
    CHECK(got.found == brute);
    if (got.found)
      CHECK(verify_shadow(sys, *got.witness, seq, gap, pow2(-r)).accepted);
  }
}

TEST_CASE("candidate pools are deterministic and canonical") {
  System full2 = zoo_system("full-2");
  auto a = make_pool(full2, 12, 7);
  auto b = make_pool(full2, 12, 7);
  REQUIRE(a.points.size() == b.points.size());
  CHECK(a.descriptor == b.descriptor);
  for (size_t i = 0; i < a.points.size(); ++i)
    CHECK(points_equal(full2, a.points[i], b.points[i]));

  std::set<std::string> texts;
  bool has_zero = false, has_one = false, has_step = false;
  for (const auto& p : a.points) {
    texts.insert(point_to_text(full2, p));
    if (points_equal(full2, p, Point{all_of(0)})) has_zero = true;
    if (points_equal(full2, p, Point{all_of(1)})) has_one = true;
    if (points_equal(full2, p, Point{step_point(0, 1, 0)})) has_step = true;
  }
  CHECK(texts.size() == a.points.size());
  CHECK(has_zero);
  CHECK(has_one);
  CHECK(has_step);

  System od = zoo_system("odometer-3");
  auto gp = make_pool(od, 8, 3);
  CHECK(gp.points.size() == 8);

  System tm = zoo_system("thue-morse");
  CHECK(make_pool(tm, 8, 0).points.empty());
}
