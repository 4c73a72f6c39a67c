#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lorentz/plan.hpp"

namespace lorentz {

// One predictor-vs-estimate comparison.
struct Record {
  std::string id;
  std::string predictor_id;
  std::string estimator_id;
  double predicted = 0.0;
  double estimated = 0.0;
  double sigma = 0.0;
  double z_score = 0.0;    // (estimated - predicted) / sigma; 0 when sigma = 0
  double tolerance = 0.0;  // pass iff |estimated - predicted| <= tolerance
  bool pass = false;
  std::uint64_t seed = 0;
};

Record make_record(std::string id, std::string predictor_id, std::string estimator_id,
                   double predicted, double estimated, double sigma, double tolerance,
                   std::uint64_t seed);

struct RunReport {
  std::string experiment;
  std::string config_hash;
  std::string version;
  std::vector<std::uint64_t> seeds;
  unsigned workers = 1;
  std::vector<Record> records;
  std::map<std::string, double> timings;  // seconds
  std::vector<std::string> artifacts;     // paths written
  std::string result_json;                // text of <experiment>.result.json

  bool all_pass() const;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> output_dir;
};

const char* library_version();

// Validates, executes and writes artifacts under the plan's output directory.
// Hypothesis failures found by `validate` are thrown after the diagnostics are written.
RunReport run_plan(ExperimentPlan plan, const RunOverrides& overrides = {});

}  // namespace lorentz
