#include "orbitglue/systems.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace orbitglue {

double to_double(const Rational& q) { return q.convert_to<double>(); }

std::string rational_to_string(const Rational& q) { return q.str(); }

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw InvalidSpec("empty rational literal");
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(text));
    BigInt num(text.substr(0, slash));
    BigInt den(text.substr(slash + 1));
    if (den == 0) throw InvalidSpec("rational literal with zero denominator: " + text);
    return Rational(num, den);
  } catch (const InvalidSpec&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidSpec("unparseable rational literal: " + text);
  }
}

// ---- validation ----

static void validate_sft(const SymbolicSystem& s) {
  if (s.alphabet < 1) throw InvalidSpec("sft: alphabet must have at least one letter");
  if (s.transitions.rows() != s.alphabet || s.transitions.cols() != s.alphabet)
    throw InvalidSpec("sft: transition matrix must be alphabet x alphabet");
  for (int a = 0; a < s.alphabet; ++a) {
    bool out = false, in = false;
    for (int b = 0; b < s.alphabet; ++b) {
      int e = s.transitions(a, b);
      if (e != 0 && e != 1) throw InvalidSpec("sft: transition entries must be 0 or 1");
      out = out || s.transitions(a, b) == 1;
      in = in || s.transitions(b, a) == 1;
    }
    if (!out)
      throw InvalidSpec("sft: letter " + std::to_string(a) + " has no admissible successor");
    if (!in)
      throw InvalidSpec("sft: letter " + std::to_string(a) + " has no admissible predecessor");
  }
}

static void validate_grid(const GridCircleSystem& g) {
  if (g.size < 1) throw InvalidSpec("grid: size must be positive");
  switch (g.map) {
    case GridMap::rotation:
      break;
    case GridMap::square:
      if (g.size < 2) throw InvalidSpec("grid: squaring map needs size >= 2");
      break;
    case GridMap::odometer: {
      if (g.depth < 1) throw InvalidSpec("grid: odometer depth must be >= 1");
      if (g.size != (1LL << g.depth))
        throw InvalidSpec("grid: odometer size must equal 2^depth");
      break;
    }
  }
}

static void validate_subst(const SubstitutionSystem& s) {
  if (s.alphabet < 2) throw InvalidSpec("substitution: alphabet must have >= 2 letters");
  if (static_cast<int>(s.rules.size()) != s.alphabet)
    throw InvalidSpec("substitution: need one rule per letter");
  for (int a = 0; a < s.alphabet; ++a) {
    if (s.rules[a].empty())
      throw InvalidSpec("substitution: rule for letter " + std::to_string(a) + " is empty");
    for (int c : s.rules[a])
      if (c < 0 || c >= s.alphabet)
        throw InvalidSpec("substitution: rule letters out of range");
  }
  if (s.prefix.empty()) throw InvalidSpec("substitution: fixed-point prefix was not built");
}

void validate(const System& sys) {
  switch (sys.kind) {
    case SystemKind::sft:
      validate_sft(sys.sft);
      return;
    case SystemKind::grid:
      validate_grid(sys.grid);
      return;
    case SystemKind::substitution:
      validate_subst(sys.subst);
      return;
    case SystemKind::product:
      if (sys.components.size() < 2)
        throw InvalidSpec("product: needs at least two components");
      for (const auto& c : sys.components) validate(c);
      return;
  }
  throw InvalidSpec("unknown system kind");
}

static void check_symbolic_point(const SymbolicSystem& s, const SymbolicPoint& p) {
  auto check_word = [&](const Word& w, const char* which) {
    for (int c : w)
      if (c < 0 || c >= s.alphabet)
        throw SystemMismatch(std::string("point ") + which + " uses letters outside the alphabet");
  };
  check_word(p.left_cycle, "left cycle");
  check_word(p.core, "core");
  check_word(p.right_cycle, "right cycle");
  if (p.right_cycle.empty()) throw SystemMismatch("point needs a nonempty right cycle");
  if (s.sidedness == Sidedness::two_sided && p.left_cycle.empty())
    throw SystemMismatch("two-sided point needs a nonempty left cycle");
  if (s.sidedness == Sidedness::one_sided && p.origin_offset != 0)
    throw SystemMismatch("one-sided points keep origin_offset == 0");

  // Every adjacent pair of the configuration must be admissible: inside each
  // cycle, around each cycle wrap, and across the junctions.
  auto ok = [&](int a, int b) { return s.transitions(a, b) == 1; };
  auto layout_at = [&](long long u) { return letter_at(p, u - p.origin_offset); };
  long long lo = s.sidedness == Sidedness::two_sided
                     ? -2 * static_cast<long long>(p.left_cycle.size())
                     : 0;
  long long hi = static_cast<long long>(p.core.size()) +
                 2 * static_cast<long long>(p.right_cycle.size());
  for (long long u = lo; u + 1 <= hi; ++u)
    if (!ok(layout_at(u), layout_at(u + 1)))
      throw SystemMismatch("point configuration contains a forbidden two-letter word");
}

void validate_point(const System& sys, const Point& p) {
  switch (sys.kind) {
    case SystemKind::sft:
      if (!p.is_symbolic()) throw SystemMismatch("sft system expects a symbolic point");
      check_symbolic_point(sys.sft, p.symbolic());
      return;
    case SystemKind::grid:
      if (!p.is_grid()) throw SystemMismatch("grid system expects an integer point");
      if (p.grid() < 0 || p.grid() >= sys.grid.size)
        throw SystemMismatch("grid point out of range");
      return;
    case SystemKind::substitution:
      throw Unsupported("substitution systems are handled word-level; they carry no point type");
    case SystemKind::product: {
      if (!p.is_product()) throw SystemMismatch("product system expects a tuple point");
      if (p.parts().size() != sys.components.size())
        throw SystemMismatch("tuple arity does not match the product");
      for (size_t i = 0; i < sys.components.size(); ++i)
        validate_point(sys.components[i], p.parts()[i]);
      return;
    }
  }
}

// ---- symbolic primitives ----

int letter_at(const SymbolicPoint& p, long long coordinate) {
  long long u = coordinate + p.origin_offset;
  if (u < 0) {
    long long m = static_cast<long long>(p.left_cycle.size());
    return p.left_cycle[static_cast<size_t>(((u % m) + m) % m)];
  }
  if (u < static_cast<long long>(p.core.size())) return p.core[static_cast<size_t>(u)];
  long long v = u - static_cast<long long>(p.core.size());
  return p.right_cycle[static_cast<size_t>(v % static_cast<long long>(p.right_cycle.size()))];
}

SymbolicPoint periodic_point(Word cycle, long long phase) {
  if (cycle.empty()) throw BadArgs("periodic_point: empty cycle");
  long long n = static_cast<long long>(cycle.size());
  long long r = ((phase % n) + n) % n;
  Word rotated(cycle.size());
  for (long long i = 0; i < n; ++i)
    rotated[static_cast<size_t>(i)] = cycle[static_cast<size_t>((i + r) % n)];
  SymbolicPoint p;
  p.left_cycle = rotated;
  p.right_cycle = std::move(rotated);
  return p;
}

SymbolicPoint shift_point(const SymbolicPoint& p, long long k, Sidedness sidedness) {
  if (sidedness == Sidedness::two_sided) {
    SymbolicPoint q = p;
    q.origin_offset += k;
    return q;
  }
  if (k < 0) throw BadArgs("one-sided shift needs k >= 0");
  SymbolicPoint q = p;
  long long core_len = static_cast<long long>(q.core.size());
  if (k <= core_len) {
    q.core.erase(q.core.begin(), q.core.begin() + static_cast<long long>(k));
  } else {
    long long extra = k - core_len;
    q.core.clear();
    long long m = static_cast<long long>(q.right_cycle.size());
    long long r = extra % m;
    std::rotate(q.right_cycle.begin(), q.right_cycle.begin() + r, q.right_cycle.end());
  }
  q.origin_offset = 0;
  return q;
}

namespace {

// Coordinates outside [left_stab, right_stab) see pure cycle behaviour for
// both points, so any scan past one extra least common multiple is conclusive.
struct ScanBounds {
  long long lo, hi;
};

ScanBounds scan_bounds(const SymbolicPoint& a, const SymbolicPoint& b, Sidedness sidedness) {
  auto r_stab = [](const SymbolicPoint& p) {
    return std::max<long long>(static_cast<long long>(p.core.size()) - p.origin_offset, 0);
  };
  long long right0 = std::max(r_stab(a), r_stab(b));
  long long pr = std::lcm<long long>(static_cast<long long>(a.right_cycle.size()),
                                     static_cast<long long>(b.right_cycle.size()));
  long long hi = right0 + pr - 1;
  if (sidedness == Sidedness::one_sided) return {0, hi};
  auto l_stab = [](const SymbolicPoint& p) { return std::min<long long>(-p.origin_offset, 0); };
  long long left0 = std::min(l_stab(a), l_stab(b));
  long long pl = std::lcm<long long>(static_cast<long long>(a.left_cycle.size()),
                                     static_cast<long long>(b.left_cycle.size()));
  return {left0 - pl, hi};
}

}  // namespace

Rational symbolic_distance(const SymbolicPoint& a, const SymbolicPoint& b,
                           Sidedness sidedness) {
  ScanBounds sb = scan_bounds(a, b, sidedness);
  long long radius_cap = std::max(sb.hi, -sb.lo);
  for (long long r = 0; r <= radius_cap; ++r) {
    if (r <= sb.hi && letter_at(a, r) != letter_at(b, r)) return pow2(-r);
    if (sidedness == Sidedness::two_sided && -r >= sb.lo && r > 0 &&
        letter_at(a, -r) != letter_at(b, -r))
      return pow2(-r);
  }
  return Rational(0);
}

bool symbolic_equal(const SymbolicPoint& a, const SymbolicPoint& b, Sidedness sidedness) {
  return symbolic_distance(a, b, sidedness) == 0;
}

std::optional<long long> symbolic_period(const SymbolicPoint& p, Sidedness sidedness) {
  long long cap = std::max(p.left_cycle.size(), p.right_cycle.size());
  for (long long n = 1; n <= cap; ++n)
    if (symbolic_equal(shift_point(p, n, sidedness), p, sidedness)) return n;
  return std::nullopt;
}

// ---- grid primitives ----

long long grid_apply(const GridCircleSystem& g, long long x) {
  switch (g.map) {
    case GridMap::rotation:
      return (((x + g.step) % g.size) + g.size) % g.size;
    case GridMap::odometer:
      return (x + 1) % g.size;
    case GridMap::square: {
      // round(x^2 / size) with ties to the even quotient, all in integers
      long long sq = x * x;
      long long q = sq / g.size;
      long long r = sq - q * g.size;
      long long up = 2 * r - g.size;
      if (up > 0 || (up == 0 && q % 2 != 0)) ++q;
      return q % g.size;
    }
  }
  throw Unsupported("unknown grid map");
}

Rational grid_distance(const GridCircleSystem& g, long long a, long long b) {
  if (a == b) return Rational(0);
  if (g.map == GridMap::odometer) {
    long long diff = (((a - b) % g.size) + g.size) % g.size;
    int v = 0;
    while ((diff & 1) == 0) {
      diff >>= 1;
      ++v;
    }
    return pow2(-std::min<long long>(v + 1, g.depth));
  }
  long long diff = a > b ? a - b : b - a;
  long long arc = std::min(diff, g.size - diff);
  return Rational(arc, g.size);
}

// ---- generic dynamics ----

Point apply_map(const System& sys, const Point& p, long long k) {
  switch (sys.kind) {
    case SystemKind::sft:
      return Point(shift_point(p.symbolic(), k, sys.sft.sidedness));
    case SystemKind::grid: {
      const auto& g = sys.grid;
      if (g.map == GridMap::rotation)
        return Point(((p.grid() + k * g.step) % g.size + g.size) % g.size);
      if (g.map == GridMap::odometer)
        return Point(((p.grid() + k) % g.size + g.size) % g.size);
      if (k < 0) throw Unsupported("the squaring map is not invertible");
      long long x = p.grid();
      for (long long i = 0; i < k; ++i) x = grid_apply(g, x);
      return Point(x);
    }
    case SystemKind::substitution:
      throw Unsupported("substitution systems are handled word-level");
    case SystemKind::product: {
      std::vector<Point> parts;
      parts.reserve(sys.components.size());
      for (size_t i = 0; i < sys.components.size(); ++i)
        parts.push_back(apply_map(sys.components[i], p.parts()[i], k));
      return Point(std::move(parts));
    }
  }
  throw Unsupported("unknown system kind");
}

Rational distance(const System& sys, const Point& a, const Point& b) {
  switch (sys.kind) {
    case SystemKind::sft:
      return symbolic_distance(a.symbolic(), b.symbolic(), sys.sft.sidedness);
    case SystemKind::grid:
      return grid_distance(sys.grid, a.grid(), b.grid());
    case SystemKind::substitution:
      throw Unsupported("substitution systems are handled word-level");
    case SystemKind::product: {
      Rational best(0);
      for (size_t i = 0; i < sys.components.size(); ++i)
        best = std::max(best, distance(sys.components[i], a.parts()[i], b.parts()[i]));
      return best;
    }
  }
  throw Unsupported("unknown system kind");
}

bool points_equal(const System& sys, const Point& a, const Point& b) {
  return distance(sys, a, b) == 0;
}

std::vector<Point> orbit_segment(const System& sys, const Point& p, long long length) {
  if (length < 1) throw BadArgs("orbit_segment: length must be >= 1");
  std::vector<Point> out;
  out.reserve(static_cast<size_t>(length));
  out.push_back(p);
  for (long long i = 1; i < length; ++i) out.push_back(apply_map(sys, out.back(), 1));
  return out;
}

static std::string word_text(const Word& w) {
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    if (w[i] >= 0 && w[i] <= 9) {
      s += static_cast<char>('0' + w[i]);
    } else {
      if (i) s += ',';
      s += std::to_string(w[i]);
    }
  }
  return s;
}

std::string point_to_text(const System& sys, const Point& p) {
  switch (sys.kind) {
    case SystemKind::sft: {
      const auto& sp = p.symbolic();
      std::ostringstream os;
      if (sys.sft.sidedness == Sidedness::two_sided)
        os << "(" << word_text(sp.left_cycle) << ")^inf ";
      os << "[" << word_text(sp.core) << "] (" << word_text(sp.right_cycle) << ")^inf";
      if (sp.origin_offset != 0) os << " @" << sp.origin_offset;
      return os.str();
    }
    case SystemKind::grid:
      return std::to_string(p.grid());
    case SystemKind::substitution:
      return "<word-level>";
    case SystemKind::product: {
      std::string s = "(";
      for (size_t i = 0; i < sys.components.size(); ++i) {
        if (i) s += ", ";
        s += point_to_text(sys.components[i], p.parts()[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

// ---- SFT structure ----

bool word_admissible(const SymbolicSystem& s, const Word& w) {
  for (int c : w)
    if (c < 0 || c >= s.alphabet) return false;
  for (size_t i = 0; i + 1 < w.size(); ++i)
    if (s.transitions(w[i], w[i + 1]) != 1) return false;
  return true;
}

BigInt count_admissible_words(const SymbolicSystem& s, long long length) {
  if (length < 0) throw BadArgs("count_admissible_words: negative length");
  if (length == 0) return 1;
  std::vector<BigInt> v(static_cast<size_t>(s.alphabet), BigInt(1));
  for (long long step = 1; step < length; ++step) {
    std::vector<BigInt> w(static_cast<size_t>(s.alphabet), BigInt(0));
    for (int a = 0; a < s.alphabet; ++a)
      for (int b = 0; b < s.alphabet; ++b)
        if (s.transitions(a, b) == 1) w[a] += v[b];
    v = std::move(w);
  }
  BigInt total = 0;
  for (const auto& x : v) total += x;
  return total;
}

void enumerate_admissible_words(const SymbolicSystem& s, int length,
                                const std::function<void(const Word&)>& visit) {
  if (length <= 0) return;
  Word w;
  w.reserve(static_cast<size_t>(length));
  std::function<void()> rec = [&]() {
    if (static_cast<int>(w.size()) == length) {
      visit(w);
      return;
    }
    for (int b = 0; b < s.alphabet; ++b) {
      if (!w.empty() && s.transitions(w.back(), b) != 1) continue;
      w.push_back(b);
      rec();
      w.pop_back();
    }
  };
  rec();
}

std::vector<int> scc_ids(const Eigen::MatrixXi& transitions) {
  int n = static_cast<int>(transitions.rows());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -2);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int counter = 0;
  std::vector<std::vector<int>> groups;

  // Iterative Tarjan; the explicit frame stack carries (vertex, next child).
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<std::pair<int, int>> frames{{root, 0}};
    while (!frames.empty()) {
      auto& [v, child] = frames.back();
      if (child == 0) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      while (child < n) {
        int w = child++;
        if (transitions(v, w) != 1) continue;
        if (index[w] == -1) {
          frames.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        groups.emplace_back();
        while (true) {
          int w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          groups.back().push_back(w);
          if (w == v) break;
        }
      }
      int finished = v;
      frames.pop_back();
      if (!frames.empty())
        low[frames.back().first] = std::min(low[frames.back().first], low[finished]);
    }
  }

  std::vector<int> out(n, -1);
  int next_id = 0;
  for (const auto& g : groups) {
    bool cyclic = g.size() > 1 || transitions(g[0], g[0]) == 1;
    if (!cyclic) continue;
    for (int v : g) out[v] = next_id;
    ++next_id;
  }
  return out;
}

bool sft_irreducible(const SymbolicSystem& s) {
  auto ids = scc_ids(s.transitions);
  for (int a = 0; a < s.alphabet; ++a)
    if (ids[a] != 0) return false;
  return true;
}

long long sft_period(const SymbolicSystem& s) {
  auto ids = scc_ids(s.transitions);
  long long g = 0;
  int groups = 0;
  for (int v = 0; v < s.alphabet; ++v) groups = std::max(groups, ids[v] + 1);
  for (int c = 0; c < groups; ++c) {
    int start = -1;
    for (int v = 0; v < s.alphabet; ++v)
      if (ids[v] == c) {
        start = v;
        break;
      }
    std::vector<long long> level(static_cast<size_t>(s.alphabet), -1);
    std::vector<int> queue{start};
    level[start] = 0;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      int v = queue[qi];
      for (int w = 0; w < s.alphabet; ++w) {
        if (s.transitions(v, w) != 1 || ids[w] != c) continue;
        if (level[w] == -1) {
          level[w] = level[v] + 1;
          queue.push_back(w);
        } else {
          g = std::gcd(g, level[v] + 1 - level[w]);
        }
      }
    }
  }
  return g < 0 ? -g : g;
}

bool sft_primitive(const SymbolicSystem& s) {
  return sft_irreducible(s) && sft_period(s) == 1;
}

bool path_of_length_exists(const SymbolicSystem& s, int from, int to, long long length) {
  if (length < 0) return false;
  if (length == 0) return from == to;
  std::vector<char> reach(static_cast<size_t>(s.alphabet), 0);
  reach[static_cast<size_t>(from)] = 1;
  // Reachability sets over a finite lattice repeat; detect the cycle so huge
  // lengths cost a bounded number of steps.
  std::map<std::vector<char>, long long> seen;
  long long t = 0;
  while (t < length) {
    auto it = seen.find(reach);
    if (it != seen.end()) {
      long long cycle = t - it->second;
      long long remaining = (length - t) % cycle;
      for (long long i = 0; i < remaining; ++i) {
        std::vector<char> next(static_cast<size_t>(s.alphabet), 0);
        for (int a = 0; a < s.alphabet; ++a)
          if (reach[a])
            for (int b = 0; b < s.alphabet; ++b)
              if (s.transitions(a, b) == 1) next[b] = 1;
        reach = std::move(next);
      }
      return reach[static_cast<size_t>(to)] != 0;
    }
    seen.emplace(reach, t);
    std::vector<char> next(static_cast<size_t>(s.alphabet), 0);
    for (int a = 0; a < s.alphabet; ++a)
      if (reach[a])
        for (int b = 0; b < s.alphabet; ++b)
          if (s.transitions(a, b) == 1) next[b] = 1;
    reach = std::move(next);
    ++t;
  }
  return reach[static_cast<size_t>(to)] != 0;
}

std::optional<Word> shortest_connector(const SymbolicSystem& s, int from, int to) {
  // BFS over letters; parent links rebuild the strictly-between letters.
  std::vector<int> parent(static_cast<size_t>(s.alphabet), -2);
  std::vector<int> queue;
  for (int b = 0; b < s.alphabet; ++b)
    if (s.transitions(from, b) == 1 && parent[b] == -2) {
      parent[b] = -1;
      queue.push_back(b);
    }
  size_t qi = 0;
  while (qi < queue.size()) {
    int v = queue[qi++];
    if (v == to) {
      Word w;
      int cur = parent[v];
      while (cur != -1) {
        w.push_back(cur);
        cur = parent[cur];
      }
      std::reverse(w.begin(), w.end());
      return w;
    }
    for (int b = 0; b < s.alphabet; ++b)
      if (s.transitions(v, b) == 1 && parent[b] == -2) {
        parent[b] = v;
        queue.push_back(b);
      }
  }
  return std::nullopt;
}

std::optional<Word> lex_path_exact(const SymbolicSystem& s, int from, int to,
                                   long long length) {
  if (length < 0) return std::nullopt;
  if (length == 0) return from == to ? std::optional<Word>(Word{}) : std::nullopt;
  if (length > 100000) throw BadArgs("lex_path_exact: length too large to materialize");
  size_t A = static_cast<size_t>(s.alphabet);
  // can_reach[t][a]: a path of exactly (length - t) edges leads from a to `to`.
  std::vector<std::vector<char>> can_reach(static_cast<size_t>(length) + 1,
                                           std::vector<char>(A, 0));
  can_reach[static_cast<size_t>(length)][static_cast<size_t>(to)] = 1;
  for (long long t = length - 1; t >= 0; --t)
    for (int a = 0; a < s.alphabet; ++a)
      for (int b = 0; b < s.alphabet; ++b)
        if (s.transitions(a, b) == 1 && can_reach[static_cast<size_t>(t + 1)][b]) {
          can_reach[static_cast<size_t>(t)][a] = 1;
          break;
        }
  if (!can_reach[0][static_cast<size_t>(from)]) return std::nullopt;
  Word between;
  int cur = from;
  for (long long t = 1; t < length; ++t) {
    for (int b = 0; b < s.alphabet; ++b)
      if (s.transitions(cur, b) == 1 && can_reach[static_cast<size_t>(t)][b]) {
        between.push_back(b);
        cur = b;
        break;
      }
  }
  if (length >= 1 && s.transitions(cur, to) != 1)
    throw Error("lex_path_exact: internal inconsistency");
  return between;
}

namespace {

// Shared driver for the two greedy walks. `step` maps a letter to its
// smallest neighbour in the walk direction; repeats split entry from cycle.
void greedy_walk(int from, const std::function<int(int)>& step, int alphabet, Word& entry,
                 std::vector<int>& raw, long long& first_repeat, long long& repeat_at) {
  std::vector<long long> seen(static_cast<size_t>(alphabet), -1);
  raw.clear();
  raw.push_back(from);
  seen[static_cast<size_t>(from)] = 0;
  while (true) {
    int nxt = step(raw.back());
    if (seen[static_cast<size_t>(nxt)] != -1) {
      first_repeat = seen[static_cast<size_t>(nxt)];
      repeat_at = static_cast<long long>(raw.size());
      break;
    }
    seen[static_cast<size_t>(nxt)] = static_cast<long long>(raw.size());
    raw.push_back(nxt);
  }
  long long start = std::max<long long>(first_repeat, 1);
  entry.assign(raw.begin() + 1, raw.begin() + start);
}

int resolve_index(const std::vector<int>& raw, long long j, long long l, long long idx) {
  if (idx < l) return raw[static_cast<size_t>(idx)];
  return raw[static_cast<size_t>(j + (idx - j) % (l - j))];
}

}  // namespace

void greedy_cycle_forward(const SymbolicSystem& s, int from, Word& entry, Word& cycle) {
  auto step = [&](int a) {
    for (int b = 0; b < s.alphabet; ++b)
      if (s.transitions(a, b) == 1) return b;
    throw Error("greedy_cycle_forward: letter without successor");
  };
  std::vector<int> raw;
  long long j = 0, l = 0;
  greedy_walk(from, step, s.alphabet, entry, raw, j, l);
  long long period = l - j, start = std::max<long long>(j, 1);
  cycle.clear();
  for (long long t = start; t < start + period; ++t)
    cycle.push_back(resolve_index(raw, j, l, t));
}

void greedy_cycle_backward(const SymbolicSystem& s, int from, Word& entry, Word& cycle) {
  auto step = [&](int a) {
    for (int b = 0; b < s.alphabet; ++b)
      if (s.transitions(b, a) == 1) return b;
    throw Error("greedy_cycle_backward: letter without predecessor");
  };
  std::vector<int> raw;
  Word walk_entry;
  long long j = 0, l = 0;
  greedy_walk(from, step, s.alphabet, walk_entry, raw, j, l);
  long long period = l - j, start = std::max<long long>(j, 1);
  // The walk runs right to left; both outputs read left to right.
  entry.assign(walk_entry.rbegin(), walk_entry.rend());
  cycle.clear();
  for (long long t = start + period - 1; t >= start; --t)
    cycle.push_back(resolve_index(raw, j, l, t));
}

std::vector<Word> admissible_cycles_up_to(const SymbolicSystem& s, int max_len) {
  std::vector<Word> out;
  auto least_rotation_and_aperiodic = [](const Word& w) {
    size_t n = w.size();
    for (size_t k = 1; k < n; ++k) {
      if (n % k == 0) {
        bool periodic = true;
        for (size_t i = 0; periodic && i < n; ++i) periodic = w[i] == w[i % k];
        if (periodic) return false;
      }
    }
    for (size_t r = 1; r < n; ++r) {
      for (size_t i = 0; i < n; ++i) {
        int a = w[(i + r) % n], b = w[i];
        if (a != b) {
          if (a < b) return false;
          break;
        }
      }
    }
    return true;
  };
  for (int len = 1; len <= max_len; ++len) {
    enumerate_admissible_words(s, len, [&](const Word& w) {
      if (s.transitions(w.back(), w.front()) != 1) return;
      if (!least_rotation_and_aperiodic(w)) return;
      out.push_back(w);
    });
  }
  return out;
}

std::vector<SymbolicPoint> periodic_points_up_to(const SymbolicSystem& s, int max_period) {
  std::vector<SymbolicPoint> out;
  for (const Word& cycle : admissible_cycles_up_to(s, max_period))
    for (long long phase = 0; phase < static_cast<long long>(cycle.size()); ++phase)
      out.push_back(periodic_point(cycle, phase));
  return out;
}

// ---- substitution language ----

bool subst_is_factor(const SubstitutionSystem& s, const Word& w) {
  if (w.empty()) return true;
  if (w.size() > s.prefix.size()) return false;
  return std::search(s.prefix.begin(), s.prefix.end(), w.begin(), w.end()) != s.prefix.end();
}

std::vector<Word> subst_factors(const SubstitutionSystem& s, int length) {
  std::set<Word> seen;
  if (length <= 0 || static_cast<size_t>(length) > s.prefix.size()) return {};
  for (size_t i = 0; i + static_cast<size_t>(length) <= s.prefix.size(); ++i)
    seen.insert(Word(s.prefix.begin() + i, s.prefix.begin() + i + length));
  return std::vector<Word>(seen.begin(), seen.end());
}

std::vector<long long> subst_occurrences(const SubstitutionSystem& s, const Word& w) {
  std::vector<long long> out;
  if (w.empty() || w.size() > s.prefix.size()) return out;
  auto it = s.prefix.begin();
  while (true) {
    it = std::search(it, s.prefix.end(), w.begin(), w.end());
    if (it == s.prefix.end()) break;
    out.push_back(it - s.prefix.begin());
    ++it;
  }
  return out;
}

std::optional<long long> subst_recurrence_bound(const SubstitutionSystem& s, int len) {
  auto factors = subst_factors(s, len);
  if (factors.empty()) return std::nullopt;
  long long bound = 0;
  for (const Word& f : factors) {
    auto occ = subst_occurrences(s, f);
    if (occ.size() < 2) return std::nullopt;
    long long worst_gap = occ.front() + 1;
    for (size_t i = 0; i + 1 < occ.size(); ++i)
      worst_gap = std::max(worst_gap, occ[i + 1] - occ[i]);
    bound = std::max(bound, worst_gap + len - 1);
  }
  return bound;
}

void subst_build_prefix(SubstitutionSystem& s, long long target) {
  int seed = -1;
  for (int a = 0; a < s.alphabet; ++a)
    if (s.rules[a].front() == a && s.rules[a].size() >= 2) {
      seed = a;
      break;
    }
  if (seed < 0)
    throw InvalidSpec("substitution: no letter starts its own image, no fixed point");
  Word cur{seed};
  while (static_cast<long long>(cur.size()) < target) {
    Word next;
    next.reserve(cur.size() * 2);
    for (int c : cur) {
      const Word& img = s.rules[static_cast<size_t>(c)];
      next.insert(next.end(), img.begin(), img.end());
      if (static_cast<long long>(next.size()) >= target) break;
    }
    if (next.size() <= cur.size())
      throw InvalidSpec("substitution: image fails to grow");
    cur = std::move(next);
  }
  cur.resize(static_cast<size_t>(target));
  s.prefix = std::move(cur);
  s.prefix_length = target;
}

// ---- zoo ----

std::vector<std::string> zoo_names() {
  return {"full-2",        "full-2-onesided", "full-3",     "golden-mean", "two-cycle",
          "disjoint-loops", "rps",            "rotation-12-4", "rotation-7-3",
          "odometer-3",     "odometer-5",     "odometer-10",   "square-8",
          "square-16",      "thue-morse"};
}

static System make_sft(const std::string& label, int alphabet,
                       std::vector<std::vector<int>> rows, Sidedness sd) {
  System sys;
  sys.kind = SystemKind::sft;
  sys.label = label;
  sys.sft.alphabet = alphabet;
  sys.sft.sidedness = sd;
  sys.sft.transitions = Eigen::MatrixXi::Zero(alphabet, alphabet);
  for (int a = 0; a < alphabet; ++a)
    for (int b = 0; b < alphabet; ++b) sys.sft.transitions(a, b) = rows[a][b];
  validate(sys);
  return sys;
}

static System make_grid(const std::string& label, long long size, GridMap map,
                        long long step, int depth) {
  System sys;
  sys.kind = SystemKind::grid;
  sys.label = label;
  sys.grid.size = size;
  sys.grid.map = map;
  sys.grid.step = step;
  sys.grid.depth = depth;
  validate(sys);
  return sys;
}

System zoo_system(const std::string& name) {
  if (name == "full-2") return make_sft(name, 2, {{1, 1}, {1, 1}}, Sidedness::two_sided);
  if (name == "full-2-onesided")
    return make_sft(name, 2, {{1, 1}, {1, 1}}, Sidedness::one_sided);
  if (name == "full-3")
    return make_sft(name, 3, {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, Sidedness::two_sided);
  if (name == "golden-mean") return make_sft(name, 2, {{1, 1}, {1, 0}}, Sidedness::two_sided);
  if (name == "two-cycle") return make_sft(name, 2, {{0, 1}, {1, 0}}, Sidedness::two_sided);
  if (name == "disjoint-loops")
    return make_sft(name, 2, {{1, 0}, {0, 1}}, Sidedness::two_sided);
  if (name == "rps")
    return make_sft(name, 3, {{1, 1, 0}, {0, 1, 1}, {1, 0, 1}}, Sidedness::two_sided);
  if (name == "rotation-12-4") return make_grid(name, 12, GridMap::rotation, 4, 0);
  if (name == "rotation-7-3") return make_grid(name, 7, GridMap::rotation, 3, 0);
  if (name == "odometer-3") return make_grid(name, 8, GridMap::odometer, 0, 3);
  if (name == "odometer-5") return make_grid(name, 32, GridMap::odometer, 0, 5);
  if (name == "odometer-10") return make_grid(name, 1024, GridMap::odometer, 0, 10);
  if (name == "square-8") return make_grid(name, 256, GridMap::square, 0, 0);
  if (name == "square-16") return make_grid(name, 65536, GridMap::square, 0, 0);
  if (name == "thue-morse") {
    System sys;
    sys.kind = SystemKind::substitution;
    sys.label = name;
    sys.subst.alphabet = 2;
    sys.subst.rules = {{0, 1}, {1, 0}};
    subst_build_prefix(sys.subst, 131072);
    validate(sys);
    return sys;
  }
  throw InvalidSpec("unknown zoo system: " + name);
}

// ---- descriptions ----

std::string sidedness_name(Sidedness s) {
  return s == Sidedness::two_sided ? "two-sided" : "one-sided";
}

std::string metric_convention(const System& sys) {
  switch (sys.kind) {
    case SystemKind::sft:
      return sys.sft.sidedness == Sidedness::two_sided
                 ? "shift metric d(x,y)=2^-min{|i|: x_i!=y_i}; open balls; strict comparisons"
                 : "shift metric d(x,y)=2^-min{i>=0: x_i!=y_i}; open balls; strict comparisons";
    case SystemKind::grid:
      if (sys.grid.map == GridMap::odometer)
        return "2-adic metric d(a,b)=2^-(v2(a-b)+1) on Z/2^depth; open balls; strict comparisons";
      return "circle metric d(a,b)=min(|a-b|,G-|a-b|)/G; open balls; strict comparisons";
    case SystemKind::substitution:
      return "shift metric on the factor language, handled word-level; open balls";
    case SystemKind::product: {
      std::string s = "max metric over components [";
      for (size_t i = 0; i < sys.components.size(); ++i) {
        if (i) s += "; ";
        s += metric_convention(sys.components[i]);
      }
      return s + "]";
    }
  }
  return "?";
}

}  // namespace orbitglue
