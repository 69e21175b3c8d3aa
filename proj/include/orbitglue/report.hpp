#pragma once

// JSON encoding of systems, points, and results, plus the job driver behind
// the command line tool. Everything emitted is deterministic: keys are
// sorted, doubles go through shortest round-trip formatting, and the only
// randomness is the seeded pool sampler.

#include <nlohmann/json.hpp>
#include <string>

#include "orbitglue/classify.hpp"

namespace orbitglue {

using Json = nlohmann::json;

System system_from_json(const Json& spec);
Json system_to_json(const System& sys);

Point point_from_json(const System& sys, const Json& spec);
Json point_to_json(const System& sys, const Point& p);

OrbitSequence sequence_from_json(const System& sys, const Json& spec);
Rational rational_from_json(const Json& v);  // accepts "p/q" strings and integers

Json gluing_profile_to_json(const GluingProfile& p);
Json specification_profile_to_json(const SpecificationProfile& p);
Json entropy_report_to_json(const EntropyReport& r);
Json classification_to_json(const System& sys, const ClassificationReport& r);
Json dichotomy_to_json(const System& sys, const DichotomyResult& r);

std::string format_double(double v);
std::string json_to_text(const Json& j);  // sorted keys, stable layout

struct JobOutcome {
  int exit_code = 0;  // 0 ok, 1 invalid input, 2 cross-check failure, 3 internal
  Json report;
  std::vector<std::string> table_files;
};

// Runs one job document end to end and writes report.json plus tables/*.csv
// under out_dir. `ci` escalates failed cross-checks to exit code 2.
JobOutcome run_job(const Json& job, const std::string& out_dir, bool ci, int threads);

int cli_main(int argc, char** argv);

}  // namespace orbitglue
