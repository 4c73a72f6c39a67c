#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lorentz/geometry.hpp"
#include "lorentz/kernels.hpp"

namespace lorentz {

// One [phi] or [psi] block: a value on one obstacle (or all obstacles) of a cell.
struct ObservableEntry {
  Cell cell;
  int obstacle = -1;  // -1: every obstacle
  double value = 0.0;
  double imag = 0.0;
  bool operator==(const ObservableEntry&) const = default;
};

// Plan file:
//   experiment = llt
//   config = square04.cfg        # relative to the plan file
//   output_dir = out/llt
//   [params]
//   n = 125, 250
//   trajectories = 100000
//   seed = 1
//   [phi]                        # repeatable, mixing and coboundary only
//   cell = 0 0
//   obstacle = all
//   value = 1
struct ExperimentPlan {
  std::string experiment;
  std::string config_path;  // as written
  std::string output_dir;   // as written
  std::map<std::string, std::string> params;  // canonical text
  std::vector<ObservableEntry> phi, psi;
  std::string base_dir = ".";  // directory relative paths resolve against; not serialized

  bool operator==(const ExperimentPlan& o) const {
    return experiment == o.experiment && config_path == o.config_path &&
           output_dir == o.output_dir && params == o.params && phi == o.phi && psi == o.psi;
  }

  bool has(const std::string& key) const { return params.count(key) != 0; }
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::int64_t require_int(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::vector<std::int64_t> get_ints(const std::string& key) const;
  std::vector<Cell> get_cells(const std::string& key, std::vector<Cell> fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  Convention convention() const;

  std::string resolve(const std::string& path) const;
  std::string resolved_config() const { return resolve(config_path); }
  std::string resolved_output() const { return resolve(output_dir); }
};

const std::vector<std::string>& experiment_names();
bool is_monte_carlo(const std::string& experiment);

// Sets a parameter from text, normalizing it; throws on unknown keys or bad values.
void set_param(ExperimentPlan& plan, const std::string& key, const std::string& value);

ExperimentPlan parse_plan(const std::string& text, const std::string& base_dir = ".");
ExperimentPlan load_plan(const std::string& path);
std::string serialize_plan(const ExperimentPlan& plan);

// Fail-fast domain checks (n ranges, counts, required files).
void validate_plan(const ExperimentPlan& plan);

}  // namespace lorentz
