#include "orbitglue/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "orbitglue/errors.hpp"

namespace orbitglue {

namespace {

// ---- job document access ----
//
// Every reader carries a "where" label so a malformed job fails with the
// path of the offending field, not a bare type error.

const Json& require_field(const Json& j, const char* field, const std::string& where) {
  if (!j.is_object() || !j.contains(field))
    throw BadArgs(where + ": missing field \"" + field + "\"");
  return j.at(field);
}

std::string string_field(const Json& j, const char* field, const std::string& where) {
  const Json& v = require_field(j, field, where);
  if (!v.is_string())
    throw BadArgs(where + ": field \"" + field + "\" must be a string");
  return v.get<std::string>();
}

long long int_field(const Json& j, const char* field, const std::string& where) {
  const Json& v = require_field(j, field, where);
  if (!v.is_number_integer())
    throw BadArgs(where + ": field \"" + field + "\" must be an integer");
  return v.get<long long>();
}

long long int_or(const Json& j, const char* field, long long fallback,
                 const std::string& where) {
  if (!j.is_object() || !j.contains(field)) return fallback;
  return int_field(j, field, where);
}

// Positive knobs share one error shape so a bad job names the field exactly.
long long positive_int_or(const Json& j, const char* field, long long fallback,
                          const std::string& where) {
  long long v = int_or(j, field, fallback, where);
  if (v < 1) throw BadArgs(where + ": field \"" + field + "\" must be a positive integer");
  return v;
}

bool bool_or(const Json& j, const char* field, bool fallback, const std::string& where) {
  if (!j.is_object() || !j.contains(field)) return fallback;
  const Json& v = j.at(field);
  if (!v.is_boolean())
    throw BadArgs(where + ": field \"" + field + "\" must be a boolean");
  return v.get<bool>();
}

// Unknown fields are rejected rather than ignored: a silently dropped typo
// ("eps_lst") would otherwise run a different experiment than the one asked.
void check_fields(const Json& job, std::initializer_list<const char*> allowed) {
  for (const auto& item : job.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        ok = true;
        break;
      }
    if (!ok) throw BadArgs("job: unknown field \"" + item.key() + "\"");
  }
}

Rational positive_rational(const Json& v, const std::string& where) {
  Rational q = rational_from_json(v);
  if (q <= 0) throw BadArgs(where + ": must be positive");
  return q;
}

std::vector<Rational> eps_list_from(const Json& job, std::vector<Rational> fallback) {
  if (job.contains("eps_list")) {
    const Json& l = job.at("eps_list");
    if (!l.is_array() || l.empty())
      throw BadArgs("job.eps_list: expected a non-empty array of rationals");
    std::vector<Rational> out;
    for (const Json& e : l) out.push_back(positive_rational(e, "job.eps_list"));
    return out;
  }
  if (job.contains("eps")) return {positive_rational(job.at("eps"), "job.eps")};
  return fallback;
}

unsigned long long seed_from(const Json& job) {
  if (!job.contains("seed")) return 0;
  const Json& v = job.at("seed");
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
    throw BadArgs("job: field \"seed\" must be a non-negative integer");
  return v.get<unsigned long long>();
}

// ---- enum names ----

std::string profile_status_text(ProfileStatus s) {
  switch (s) {
    case ProfileStatus::finite: return "finite";
    case ProfileStatus::exceeds_cap: return "exceeds_cap";
    case ProfileStatus::impossible: return "impossible";
  }
  return "unknown";
}

std::string grid_map_name(GridMap m) {
  switch (m) {
    case GridMap::rotation: return "rotation";
    case GridMap::square: return "square";
    case GridMap::odometer: return "odometer";
  }
  return "unknown";
}

GridMap grid_map_from_text(const std::string& s) {
  if (s == "rotation") return GridMap::rotation;
  if (s == "square") return GridMap::square;
  if (s == "odometer") return GridMap::odometer;
  throw BadArgs("system.map: want \"rotation\", \"square\", or \"odometer\", got \"" + s + "\"");
}

Sidedness sidedness_from_text(const std::string& s) {
  if (s == "two-sided") return Sidedness::two_sided;
  if (s == "one-sided") return Sidedness::one_sided;
  throw BadArgs("system.sidedness: want \"two-sided\" or \"one-sided\", got \"" + s + "\"");
}

std::string conflict_kind_text(ConflictKind k) {
  switch (k) {
    case ConflictKind::forced_letters: return "forced_letters";
    case ConflictKind::adjacency: return "adjacency";
    case ConflictKind::no_path: return "no_path";
  }
  return "unknown";
}

Word word_from_json(const Json& v, const std::string& where) {
  if (!v.is_array()) throw BadArgs(where + ": expected an array of letters");
  Word w;
  for (const Json& e : v) {
    if (!e.is_number_integer()) throw BadArgs(where + ": letters must be integers");
    w.push_back(e.get<int>());
  }
  return w;
}

Json verdict_to_json(const Verdict& v) {
  Json j;
  j["value"] = verdict_name(v.value);
  j["exact"] = v.exact;
  j["scope"] = v.scope;
  j["certificate"] = v.certificate;
  return j;
}

Json big_list_to_json(const std::vector<BigInt>& xs) {
  Json a = Json::array();
  for (const BigInt& x : xs) a.push_back(x.str());
  return a;
}

// ---- CSV ----

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct Table {
  std::string name;  // relative to out_dir, e.g. "tables/entropy.csv"
  std::string text;
};

}  // namespace

// ---- scalars ----

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Rational rational_from_json(const Json& v) {
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    try {
      return Rational(s);
    } catch (const std::exception&) {
      throw BadArgs("rational: cannot parse \"" + s + "\" (want \"p/q\" or an integer)");
    }
  }
  if (v.is_number())
    throw BadArgs("rational: floating point values are not accepted; write \"1/4\"");
  throw BadArgs("rational: expected an integer or a \"p/q\" string");
}

// ---- systems ----

System system_from_json(const Json& spec) {
  if (spec.is_string()) return zoo_system(spec.get<std::string>());
  if (!spec.is_object())
    throw BadArgs("system: expected a zoo name or an object with \"kind\"");

  if (spec.contains("file")) {
    check_fields(spec, {"file"});
    const std::string path = string_field(spec, "file", "system");
    std::ifstream f(path, std::ios::binary);
    if (!f) throw BadArgs("system.file: cannot open \"" + path + "\"");
    Json inner;
    try {
      inner = Json::parse(f);
    } catch (const Json::parse_error& e) {
      throw BadArgs("system.file: \"" + path + "\" is not valid JSON: " + e.what());
    }
    return system_from_json(inner);
  }

  const std::string kind = string_field(spec, "kind", "system");
  System sys;
  sys.label = spec.is_object() && spec.contains("label")
                  ? string_field(spec, "label", "system")
                  : kind;

  if (kind == "sft") {
    check_fields(spec, {"kind", "label", "metric", "alphabet", "transitions", "sidedness"});
    sys.kind = SystemKind::sft;
    const Json& rows = require_field(spec, "transitions", "system");
    if (!rows.is_array() || rows.empty())
      throw BadArgs("system.transitions: expected a non-empty array of 0/1 rows");
    const int n = static_cast<int>(rows.size());
    sys.sft.alphabet = n;
    sys.sft.transitions = Eigen::MatrixXi::Zero(n, n);
    for (int a = 0; a < n; ++a) {
      const Json& row = rows.at(static_cast<size_t>(a));
      if (!row.is_array() || static_cast<int>(row.size()) != n)
        throw BadArgs("system.transitions: row " + std::to_string(a) + " must have " +
                      std::to_string(n) + " entries");
      for (int b = 0; b < n; ++b) {
        const Json& e = row.at(static_cast<size_t>(b));
        if (!e.is_number_integer() || (e.get<int>() != 0 && e.get<int>() != 1))
          throw BadArgs("system.transitions: entries must be 0 or 1");
        sys.sft.transitions(a, b) = e.get<int>();
      }
    }
    if (spec.contains("alphabet") && int_field(spec, "alphabet", "system") != n)
      throw BadArgs("system.alphabet: does not match the transition matrix size");
    sys.sft.sidedness = spec.contains("sidedness")
                            ? sidedness_from_text(string_field(spec, "sidedness", "system"))
                            : Sidedness::two_sided;
  } else if (kind == "grid") {
    check_fields(spec, {"kind", "label", "metric", "map", "size", "step", "depth"});
    sys.kind = SystemKind::grid;
    sys.grid.map = grid_map_from_text(string_field(spec, "map", "system"));
    if (sys.grid.map == GridMap::odometer) {
      const long long depth = int_field(spec, "depth", "system");
      if (depth < 1 || depth > 62)
        throw BadArgs("system.depth: must be between 1 and 62");
      sys.grid.depth = static_cast<int>(depth);
      sys.grid.size = 1LL << depth;
      if (spec.contains("size") && int_field(spec, "size", "system") != sys.grid.size)
        throw BadArgs("system.size: does not match 2^depth");
    } else {
      sys.grid.size = int_field(spec, "size", "system");
      if (sys.grid.map == GridMap::rotation)
        sys.grid.step = int_field(spec, "step", "system");
    }
  } else if (kind == "substitution") {
    check_fields(spec, {"kind", "label", "metric", "rules", "prefix_length"});
    sys.kind = SystemKind::substitution;
    const Json& rules = require_field(spec, "rules", "system");
    if (!rules.is_array() || rules.empty())
      throw BadArgs("system.rules: expected a non-empty array of image words");
    sys.subst.alphabet = static_cast<int>(rules.size());
    for (size_t a = 0; a < rules.size(); ++a) {
      Word img = word_from_json(rules.at(a), "system.rules[" + std::to_string(a) + "]");
      if (img.empty())
        throw BadArgs("system.rules[" + std::to_string(a) + "]: image must be non-empty");
      for (int c : img)
        if (c < 0 || c >= sys.subst.alphabet)
          throw BadArgs("system.rules[" + std::to_string(a) + "]: letter out of range");
      sys.subst.rules.push_back(std::move(img));
    }
    const long long target = positive_int_or(spec, "prefix_length", 65536, "system");
    subst_build_prefix(sys.subst, target);
  } else if (kind == "product") {
    check_fields(spec, {"kind", "label", "metric", "components"});
    sys.kind = SystemKind::product;
    const Json& comps = require_field(spec, "components", "system");
    if (!comps.is_array() || comps.size() < 2)
      throw BadArgs("system.components: expected an array of at least two systems");
    for (const Json& c : comps) sys.components.push_back(system_from_json(c));
  } else {
    throw BadArgs("system.kind: unknown kind \"" + kind +
                  "\" (want sft, grid, substitution, or product)");
  }

  validate(sys);
  // The metric is derived from the kind, never configured; a document that
  // names a different one describes a system this library does not model.
  if (spec.contains("metric") &&
      string_field(spec, "metric", "system") != metric_convention(sys))
    throw BadArgs("system.metric: read-only, does not match this system's convention");
  return sys;
}

Json system_to_json(const System& sys) {
  Json j;
  j["label"] = sys.label;
  j["metric"] = metric_convention(sys);
  switch (sys.kind) {
    case SystemKind::sft: {
      j["kind"] = "sft";
      j["alphabet"] = sys.sft.alphabet;
      j["sidedness"] = sidedness_name(sys.sft.sidedness);
      Json rows = Json::array();
      for (int a = 0; a < sys.sft.alphabet; ++a) {
        Json row = Json::array();
        for (int b = 0; b < sys.sft.alphabet; ++b) row.push_back(sys.sft.transitions(a, b));
        rows.push_back(row);
      }
      j["transitions"] = rows;
      break;
    }
    case SystemKind::grid: {
      j["kind"] = "grid";
      j["map"] = grid_map_name(sys.grid.map);
      j["size"] = sys.grid.size;
      if (sys.grid.map == GridMap::rotation) j["step"] = sys.grid.step;
      if (sys.grid.map == GridMap::odometer) j["depth"] = sys.grid.depth;
      break;
    }
    case SystemKind::substitution: {
      j["kind"] = "substitution";
      j["rules"] = sys.subst.rules;
      j["prefix_length"] = sys.subst.prefix_length;
      break;
    }
    case SystemKind::product: {
      j["kind"] = "product";
      Json comps = Json::array();
      for (const System& c : sys.components) comps.push_back(system_to_json(c));
      j["components"] = comps;
      break;
    }
  }
  return j;
}

// ---- points and sequences ----

Point point_from_json(const System& sys, const Json& spec) {
  Point p;
  if (sys.kind == SystemKind::grid) {
    long long z = 0;
    if (spec.is_number_integer())
      z = spec.get<long long>();
    else if (spec.is_object())
      z = int_field(spec, "z", "point");
    else
      throw BadArgs("point: grid points are integers or {\"z\": value}");
    p = Point(z);
  } else if (sys.kind == SystemKind::product) {
    const Json& parts = spec.is_array() ? spec : require_field(spec, "parts", "point");
    if (!parts.is_array() || parts.size() != sys.components.size())
      throw BadArgs("point.parts: expected one entry per product component");
    std::vector<Point> ps;
    for (size_t i = 0; i < parts.size(); ++i)
      ps.push_back(point_from_json(sys.components[i], parts.at(i)));
    p = Point(std::move(ps));
  } else if (sys.kind == SystemKind::sft) {
    if (!spec.is_object())
      throw BadArgs("point: symbolic points are {\"cycle\": [...]} or "
                    "{\"left\": [...], \"core\": [...], \"right\": [...]}");
    if (spec.contains("cycle")) {
      check_fields(spec, {"cycle", "phase", "text"});
      Word cycle = word_from_json(spec.at("cycle"), "point.cycle");
      p = Point(periodic_point(std::move(cycle), int_or(spec, "phase", 0, "point")));
    } else {
      check_fields(spec, {"left", "core", "right", "offset", "text"});
      SymbolicPoint sp;
      if (spec.contains("left")) sp.left_cycle = word_from_json(spec.at("left"), "point.left");
      sp.core = word_from_json(require_field(spec, "core", "point"), "point.core");
      if (spec.contains("right"))
        sp.right_cycle = word_from_json(spec.at("right"), "point.right");
      sp.origin_offset = int_or(spec, "offset", 0, "point");
      p = Point(std::move(sp));
    }
  } else {
    throw Unsupported("substitution systems carry no point encoding");
  }
  validate_point(sys, p);
  return p;
}

Json point_to_json(const System& sys, const Point& p) {
  Json j;
  if (p.is_grid()) {
    j["z"] = p.grid();
  } else if (p.is_symbolic()) {
    const SymbolicPoint& s = p.symbolic();
    j["left"] = s.left_cycle;
    j["core"] = s.core;
    j["right"] = s.right_cycle;
    j["offset"] = s.origin_offset;
  } else {
    Json parts = Json::array();
    for (size_t i = 0; i < p.parts().size(); ++i)
      parts.push_back(point_to_json(sys.components[i], p.parts()[i]));
    j["parts"] = parts;
  }
  j["text"] = point_to_text(sys, p);
  return j;
}

OrbitSequence sequence_from_json(const System& sys, const Json& spec) {
  if (!spec.is_array() || spec.empty())
    throw BadArgs("sequence: expected a non-empty array of {\"point\", \"length\"}");
  OrbitSequence seq;
  for (size_t i = 0; i < spec.size(); ++i) {
    const Json& e = spec.at(i);
    const std::string where = "sequence[" + std::to_string(i) + "]";
    if (!e.is_object()) throw BadArgs(where + ": expected {\"point\", \"length\"}");
    check_fields(e, {"point", "length"});
    OrbitSegment seg;
    seg.base = point_from_json(sys, require_field(e, "point", where));
    seg.length = int_field(e, "length", where);
    seq.push_back(std::move(seg));
  }
  validate_sequence(sys, seq);
  return seq;
}

// ---- profile and report converters ----

Json gluing_profile_to_json(const GluingProfile& p) {
  Json j;
  j["status"] = profile_status_text(p.status);
  j["bound"] = p.bound;
  j["radius"] = p.radius;
  j["eps"] = rational_to_string(p.eps);
  j["segment_length"] = p.segment_length;
  j["rank"] = p.rank;
  j["cap"] = p.cap;
  j["family"] = p.family;
  j["pool_descriptor"] = p.pool_descriptor;
  j["certificate"] = p.certificate;
  j["stabilized"] = p.stabilized;
  j["stabilized_at"] = p.stabilized_at;
  Json inst = Json::array();
  for (const InstanceOutcome& o : p.instances) {
    Json e;
    e["label"] = o.label;
    if (o.min_max_gap)
      e["min_max_gap"] = *o.min_max_gap;
    else
      e["min_max_gap"] = nullptr;
    e["obstruction"] = o.obstruction;
    inst.push_back(e);
  }
  j["instances"] = inst;
  return j;
}

Json specification_profile_to_json(const SpecificationProfile& p) {
  Json j;
  j["status"] = profile_status_text(p.status);
  j["bound"] = p.bound;
  j["slack"] = p.slack;
  j["radius"] = p.radius;
  j["segment_length"] = p.segment_length;
  j["rank"] = p.rank;
  j["cap"] = p.cap;
  j["certificate"] = p.certificate;
  return j;
}

Json entropy_report_to_json(const EntropyReport& r) {
  Json j;
  Json rows = Json::array();
  for (const EntropyRow& row : r.rows) {
    Json e;
    e["eps"] = rational_to_string(row.eps);
    e["n"] = row.n;
    e["count"] = row.count.str();
    e["slope"] = row.slope;
    e["exact"] = row.exact;
    rows.push_back(e);
  }
  j["rows"] = rows;
  j["h_estimate"] = r.h_estimate;
  j["exact"] = r.exact;
  if (r.oracle) {
    Json o;
    o["lo"] = r.oracle->lo;
    o["hi"] = r.oracle->hi;
    o["spectral_lo"] = r.oracle->spectral_lo;
    o["spectral_hi"] = r.oracle->spectral_hi;
    j["oracle"] = o;
  } else {
    j["oracle"] = nullptr;
  }
  j["notes"] = r.notes;
  return j;
}

Json classification_to_json(const System& sys, const ClassificationReport& r) {
  Json j;
  j["label"] = r.label;
  j["system"] = system_to_json(sys);
  j["transitive"] = verdict_to_json(r.transitive);
  j["minimal"] = verdict_to_json(r.minimal);
  j["equicontinuous"] = verdict_to_json(r.equicontinuous);
  j["glues"] = verdict_to_json(r.glues);
  j["specification"] = verdict_to_json(r.specification);
  j["gluing"] = r.gluing ? gluing_profile_to_json(*r.gluing) : Json(nullptr);
  j["spec_profile"] =
      r.spec_profile ? specification_profile_to_json(*r.spec_profile) : Json(nullptr);
  j["entropy"] = r.entropy ? entropy_report_to_json(*r.entropy) : Json(nullptr);
  if (r.periodic) {
    Json p;
    p["fixed_counts"] = big_list_to_json(r.periodic->fixed_counts);
    p["least_period"] = big_list_to_json(r.periodic->least_period);
    p["cumulative"] = big_list_to_json(r.periodic->cumulative);
    p["growth_rate"] = r.periodic->growth_rate;
    j["periodic"] = p;
  } else {
    j["periodic"] = nullptr;
  }
  j["cover_time"] = r.cover_time ? Json(*r.cover_time) : Json(nullptr);
  Json checks = Json::array();
  for (const TheoremCheck& c : r.checks) {
    Json e;
    e["id"] = c.id;
    e["statement"] = c.statement;
    e["status"] = c.status;
    e["detail"] = c.detail;
    checks.push_back(e);
  }
  j["checks"] = checks;
  j["notes"] = r.notes;
  return j;
}

Json dichotomy_to_json(const System& sys, const DichotomyResult& r) {
  Json j;
  j["eps"] = rational_to_string(r.eps);
  j["eps_fine"] = rational_to_string(r.eps_fine);
  j["radius"] = r.radius;
  j["segment_length"] = r.segment_length;
  j["span"] = r.span;
  j["n"] = r.n;
  Json sa;
  sa["holds"] = r.stay_away.holds;
  sa["exact"] = r.stay_away.exact;
  sa["detail"] = r.stay_away.detail;
  j["stay_away"] = sa;
  j["patterns"] = r.patterns;
  Json ws = Json::array();
  for (const Point& w : r.witnesses) ws.push_back(point_to_json(sys, w));
  j["witnesses"] = ws;
  Json gs = Json::array();
  for (const Gap& g : r.gaps) gs.push_back(g);
  j["gaps"] = gs;
  j["separation_verified"] = r.separation_verified;
  j["entropy_lower_bound"] = r.entropy_lower_bound;
  j["detail"] = r.detail;
  return j;
}

std::string json_to_text(const Json& j) { return j.dump(2) + "\n"; }

// ---- job runner ----

namespace {

struct JobResult {
  Json result;
  std::vector<Table> tables;
  bool checks_failed = false;
  std::string failure_note;
};

CandidatePool pool_for(const System& sys, const Json& job, unsigned long long seed) {
  const long long size = positive_int_or(job, "pool_size", 32, "job");
  return make_pool(sys, size, seed);
}

JobResult run_classify(const System& sys, const Json& job, unsigned long long seed) {
  check_fields(job, {"command", "seed", "system", "eps_list", "eps", "horizon", "n_max",
                     "segment_length", "rank", "cap", "periodic_n_max", "birkhoff_n",
                     "pool_size"});
  ClassifyOptions opt = default_options(sys);
  opt.eps_list = eps_list_from(job, opt.eps_list);
  opt.horizon = positive_int_or(job, "horizon", opt.horizon, "job");
  opt.n_max = positive_int_or(job, "n_max", opt.n_max, "job");
  opt.segment_length = positive_int_or(job, "segment_length", opt.segment_length, "job");
  opt.rank = static_cast<int>(positive_int_or(job, "rank", opt.rank, "job"));
  opt.cap = positive_int_or(job, "cap", opt.cap, "job");
  opt.periodic_n_max =
      static_cast<int>(positive_int_or(job, "periodic_n_max", opt.periodic_n_max, "job"));
  opt.birkhoff_n = positive_int_or(job, "birkhoff_n", opt.birkhoff_n, "job");
  opt.pool_size = positive_int_or(job, "pool_size", opt.pool_size, "job");
  opt.seed = seed;

  ClassificationReport rep = classify(sys, opt);

  JobResult out;
  out.result = classification_to_json(sys, rep);
  std::string csv = "id,status,statement,detail\n";
  for (const TheoremCheck& c : rep.checks) {
    csv += csv_cell(c.id) + "," + csv_cell(c.status) + "," + csv_cell(c.statement) + "," +
           csv_cell(c.detail) + "\n";
    if (c.status == "fail") {
      out.checks_failed = true;
      out.failure_note += (out.failure_note.empty() ? "" : "; ") + c.id;
    }
  }
  out.tables.push_back({"tables/checks.csv", csv});
  return out;
}

JobResult run_entropy(const System& sys, const Json& job, unsigned long long seed) {
  check_fields(job, {"command", "seed", "system", "eps_list", "eps", "n_max", "pool_size"});
  const ClassifyOptions defaults = default_options(sys);
  const std::vector<Rational> eps_list = eps_list_from(job, defaults.eps_list);
  const long long n_max = positive_int_or(job, "n_max", defaults.n_max, "job");

  // Only product systems need sampled candidates; the other lanes count from
  // the system description and must not depend on an incidental pool.
  std::optional<CandidatePool> pool;
  if (sys.kind == SystemKind::product) pool = pool_for(sys, job, seed);

  EntropyReport rep = entropy_estimate(sys, eps_list, n_max, pool ? &*pool : nullptr);

  JobResult out;
  out.result = entropy_report_to_json(rep);
  std::string csv = "n,eps,s,slope\n";
  for (const EntropyRow& row : rep.rows)
    csv += std::to_string(row.n) + "," + csv_cell(rational_to_string(row.eps)) + "," +
           row.count.str() + "," + format_double(row.slope) + "\n";
  out.tables.push_back({"tables/entropy.csv", csv});
  return out;
}

JobResult run_gluing(const System& sys, const Json& job, unsigned long long seed) {
  check_fields(job, {"command", "seed", "system", "radius", "eps", "segment_length", "rank",
                     "cap", "M_max", "pool_size", "specification"});
  const long long segment_length =
      positive_int_or(job, "segment_length",
                      sys.kind == SystemKind::substitution ? 8 : 6, "job");
  const int rank = static_cast<int>(positive_int_or(job, "rank", 2, "job"));
  long long cap = int_or(job, "cap", int_or(job, "M_max", 0, "job"), "job");
  if (cap < 0) throw BadArgs("job: field \"cap\" must be >= 0 (0 picks the default)");

  JobResult out;
  GluingProfile profile;
  if (job.contains("radius")) {
    const long long radius = int_field(job, "radius", "job");
    if (radius < 0) throw BadArgs("job: field \"radius\" must be >= 0");
    profile = decide_gluing_sft(sys, static_cast<int>(radius), segment_length, rank, cap);
    if (bool_or(job, "specification", false, "job"))
      out.result["specification"] = specification_profile_to_json(specification_profile_sft(
          sys, static_cast<int>(radius), segment_length, rank));
  } else {
    if (bool_or(job, "specification", false, "job"))
      throw BadArgs("job: \"specification\" needs the \"radius\" form of the gluing command");
    const Rational eps = positive_rational(require_field(job, "eps", "job"), "job.eps");
    std::optional<CandidatePool> pool;
    if (sys.kind != SystemKind::substitution) pool = pool_for(sys, job, seed);
    if (cap == 0) cap = 64;
    profile = gluing_profile(sys, eps, segment_length, rank, pool ? &*pool : nullptr, cap);
  }

  out.result["gluing"] = gluing_profile_to_json(profile);
  std::string csv = "label,min_max_gap,obstruction\n";
  for (const InstanceOutcome& o : profile.instances)
    csv += csv_cell(o.label) + "," +
           (o.min_max_gap ? std::to_string(*o.min_max_gap) : std::string()) + "," +
           csv_cell(o.obstruction) + "\n";
  out.tables.push_back({"tables/instances.csv", csv});
  return out;
}

JobResult run_dichotomy(const System& sys, const Json& job, unsigned long long seed) {
  check_fields(job, {"command", "seed", "system", "x", "y", "eps", "n", "cap", "pool_size"});
  const Point x = point_from_json(sys, require_field(job, "x", "job"));
  const Point y = point_from_json(sys, require_field(job, "y", "job"));
  const Rational eps = job.contains("eps")
                           ? positive_rational(job.at("eps"), "job.eps")
                           : Rational(1, 2);
  const int n = static_cast<int>(positive_int_or(job, "n", 1, "job"));
  const long long cap = int_or(job, "cap", 0, "job");
  if (cap < 0) throw BadArgs("job: field \"cap\" must be >= 0 (0 picks the default)");

  std::optional<CandidatePool> pool;
  if (sys.kind != SystemKind::substitution) pool = pool_for(sys, job, seed);

  JobResult out;
  try {
    DichotomyResult d =
        dichotomy_construction(sys, x, y, eps, n, cap, pool ? &*pool : nullptr);
    out.result = dichotomy_to_json(sys, d);
    out.result["status"] = "constructed";
    std::string csv = "index,pattern,point\n";
    for (size_t i = 0; i < d.witnesses.size(); ++i)
      csv += std::to_string(i) + "," +
             csv_cell(i < d.patterns.size() ? d.patterns[i] : std::string()) + "," +
             csv_cell(point_to_text(sys, d.witnesses[i])) + "\n";
    out.tables.push_back({"tables/witnesses.csv", csv});
  } catch (const GluingFailed& e) {
    // Expected negative: the construction needs a finite gluing bound, and
    // proving there is none at this scale is a successful run.
    out.result["status"] = "obstructed";
    out.result["obstruction"] = "gluing";
    out.result["message"] = e.what();
    out.result["eps"] = rational_to_string(eps);
  } catch (const StayAwayViolated& e) {
    out.result["status"] = "obstructed";
    out.result["obstruction"] = "stay-away";
    out.result["message"] = e.what();
    out.result["eps"] = rational_to_string(eps);
  }
  return out;
}

JobResult run_shadow(const System& sys, const Json& job, unsigned long long /*seed*/) {
  check_fields(job, {"command", "seed", "system", "sequence", "gap", "radius", "eps"});
  const OrbitSequence seq = sequence_from_json(sys, require_field(job, "sequence", "job"));
  const Json& gspec = require_field(job, "gap", "job");
  if (!gspec.is_array()) throw BadArgs("job.gap: expected an array of integers");
  Gap gap;
  for (const Json& e : gspec) {
    if (!e.is_number_integer()) throw BadArgs("job.gap: entries must be integers");
    gap.push_back(e.get<long long>());
  }
  validate_gap(seq, gap);

  JobResult out;
  if (sys.kind == SystemKind::sft) {
    const long long radius = int_field(job, "radius", "job");
    if (radius < 0) throw BadArgs("job: field \"radius\" must be >= 0");
    ShadowSearch s = find_shadow_sft(sys, seq, gap, static_cast<int>(radius));
    out.result["found"] = s.found;
    if (s.witness) {
      out.result["witness"] = point_to_json(sys, *s.witness);
      // Agreement out to radius r is exactly the strict 2^-r ball.
      ShadowVerdict v = verify_shadow(sys, *s.witness, seq, gap, pow2(-radius));
      out.result["verified"] = v.accepted;
    } else {
      out.result["witness"] = nullptr;
    }
    if (s.conflict) {
      Json c;
      c["kind"] = conflict_kind_text(s.conflict->kind);
      c["coordinate"] = s.conflict->coordinate;
      c["have"] = s.conflict->have;
      c["want"] = s.conflict->want;
      c["detail"] = s.conflict->detail;
      out.result["conflict"] = c;
    } else {
      out.result["conflict"] = nullptr;
    }
  } else if (sys.kind == SystemKind::grid) {
    const Rational eps = positive_rational(require_field(job, "eps", "job"), "job.eps");
    std::optional<long long> z = find_shadow_grid(sys, seq, gap, eps);
    out.result["found"] = z.has_value();
    if (z) {
      out.result["witness"] = point_to_json(sys, Point(*z));
      ShadowVerdict v = verify_shadow(sys, Point(*z), seq, gap, eps);
      out.result["verified"] = v.accepted;
    } else {
      out.result["witness"] = nullptr;
    }
    out.result["conflict"] = nullptr;
  } else {
    throw Unsupported("shadow search runs on SFT and grid systems");
  }

  const std::vector<long long> starts = shadow_schedule(seq, gap);
  std::string csv = "segment,start,length\n";
  for (size_t i = 0; i < seq.size(); ++i)
    csv += std::to_string(i) + "," + std::to_string(starts[i]) + "," +
           std::to_string(seq[i].length) + "\n";
  out.tables.push_back({"tables/schedule.csv", csv});
  return out;
}

JobResult run_periodic(const System& sys, const Json& job, unsigned long long /*seed*/) {
  check_fields(job, {"command", "seed", "system", "n_max"});
  const int n_max = static_cast<int>(positive_int_or(job, "n_max", 10, "job"));
  PeriodicGrowth g = periodic_counts(sys, n_max);

  JobResult out;
  out.result["fixed_counts"] = big_list_to_json(g.fixed_counts);
  out.result["least_period"] = big_list_to_json(g.least_period);
  out.result["cumulative"] = big_list_to_json(g.cumulative);
  out.result["growth_rate"] = g.growth_rate;
  std::string csv = "n,fixed,least_period,cumulative\n";
  for (size_t i = 0; i < g.fixed_counts.size(); ++i)
    csv += std::to_string(i + 1) + "," + g.fixed_counts[i].str() + "," +
           g.least_period[i].str() + "," + g.cumulative[i].str() + "\n";
  out.tables.push_back({"tables/periodic.csv", csv});
  return out;
}

void write_artifacts(const std::string& out_dir, const Json& report,
                     const std::vector<Table>& tables) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "tables", ec);
  if (ec) throw Error("cannot create output directory " + out_dir + ": " + ec.message());
  auto write_one = [&](const std::string& rel, const std::string& text) {
    const fs::path path = fs::path(out_dir) / rel;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
    if (!f) throw Error("short write on " + path.string());
  };
  write_one("report.json", json_to_text(report));
  for (const Table& t : tables) write_one(t.name, t.text);
}

Json error_report(int exit_code, const std::string& message) {
  Json j;
  j["error"]["exit_code"] = exit_code;
  j["error"]["message"] = message;
  return j;
}

}  // namespace

JobOutcome run_job(const Json& job, const std::string& out_dir, bool ci, int threads) {
  JobOutcome out;
  try {
    if (threads < 1) throw BadArgs("threads: must be >= 1");
    if (!job.is_object()) throw BadArgs("job: expected a JSON object");
    const std::string command = string_field(job, "command", "job");
    const unsigned long long seed = seed_from(job);
    const System sys = system_from_json(require_field(job, "system", "job"));

    JobResult res;
    if (command == "classify")
      res = run_classify(sys, job, seed);
    else if (command == "entropy")
      res = run_entropy(sys, job, seed);
    else if (command == "gluing")
      res = run_gluing(sys, job, seed);
    else if (command == "dichotomy")
      res = run_dichotomy(sys, job, seed);
    else if (command == "shadow")
      res = run_shadow(sys, job, seed);
    else if (command == "periodic")
      res = run_periodic(sys, job, seed);
    else
      throw BadArgs("job: unknown command \"" + command +
                    "\" (want classify, entropy, gluing, dichotomy, shadow, or periodic)");

    out.report["command"] = command;
    out.report["seed"] = seed;
    out.report["system"] = system_to_json(sys);
    out.report["result"] = res.result;
    for (const Table& t : res.tables) out.table_files.push_back(t.name);
    out.report["tables"] = out.table_files;

    out.exit_code = 0;
    if (ci && res.checks_failed) {
      out.exit_code = 2;
      out.report["ci_failure"] = "cross-checks failed: " + res.failure_note;
    }
    write_artifacts(out_dir, out.report, res.tables);
  } catch (const GluingFailed& e) {
    // Only the dichotomy handler consumes these; anywhere else is a bug.
    out.exit_code = 3;
    out.report = error_report(3, e.what());
  } catch (const StayAwayViolated& e) {
    out.exit_code = 3;
    out.report = error_report(3, e.what());
  } catch (const InvalidSpec& e) {
    out.exit_code = 1;
    out.report = error_report(1, e.what());
  } catch (const Error& e) {
    // Domain preconditions (NotAnSft, NotMinimal, Unsupported, ...): the job
    // asked a question the system does not support.
    out.exit_code = 1;
    out.report = error_report(1, e.what());
  } catch (const Json::exception& e) {
    out.exit_code = 1;
    out.report = error_report(1, std::string("job: malformed document: ") + e.what());
  } catch (const std::exception& e) {
    out.exit_code = 3;
    out.report = error_report(3, e.what());
  }
  return out;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"gluing-orbit toolkit: shadowing, gluing bounds, entropy, classification"};
  std::string job_path;
  std::string out_dir = "out";
  bool ci = false;
  int threads = 1;
  app.add_option("--job", job_path, "path to the job document (JSON)")->required();
  app.add_option("--out", out_dir, "output directory for report.json and tables/");
  app.add_flag("--ci", ci, "escalate failed cross-checks to exit code 2");
  app.add_option("--threads", threads, "worker threads; affects speed only, never results");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << error_report(1, e.what()).dump() << "\n";
    return 1;
  }

  Json job;
  {
    std::ifstream f(job_path, std::ios::binary);
    if (!f) {
      std::cerr << error_report(1, "cannot open job file: " + job_path).dump() << "\n";
      return 1;
    }
    try {
      job = Json::parse(f);
    } catch (const Json::parse_error& e) {
      std::cerr << error_report(1, std::string("job file is not valid JSON: ") + e.what()).dump()
                << "\n";
      return 1;
    }
  }

  const JobOutcome out = run_job(job, out_dir, ci, threads);
  if (out.exit_code == 0 || out.exit_code == 2) {
    std::cout << "wrote " << out_dir << "/report.json and " << out.table_files.size()
              << " table(s)\n";
    if (out.exit_code == 2)
      std::cerr << error_report(2, out.report.value("ci_failure", "cross-checks failed")).dump()
                << "\n";
  } else {
    std::cerr << out.report.dump() << "\n";
  }
  return out.exit_code;
}

}  // namespace orbitglue
