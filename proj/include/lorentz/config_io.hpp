#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lorentz/geometry.hpp"
#include "lorentz/oracle.hpp"

namespace lorentz {

// Contents of a config file:
//   dimension = 2
//   max_direction = 8          # optional
//   [disk]                     # repeatable
//   cx = 0
//   cy = 0
//   r = 0.4
//   [law]                      # optional; oracle step law
//   cutoff = 4096
//   quartic = 0                # optional
//   [tail]                     # repeatable; omitted -> taken from the disks
//   L = 0 0
//   w = 1 0
//   c = 0.3
//   [core]                     # repeatable; omitted -> remaining mass at 0
//   k = 1 0
//   weight = 0.5
struct ConfigFile {
  int dimension = 2;
  int max_direction = kDefaultMaxDirection;
  std::vector<Disk> disks;
  bool has_law = false;
  std::int64_t cutoff = 0;
  double quartic = 0.0;
  std::vector<TailSpec> tails;
  CorePmf core;

  std::string canonical() const;
  std::uint64_t hash() const;
};

ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::string& path);

// Throws EmptyConfigError when the file lists no disks.
ScattererConfig scatterer_config(const ConfigFile& cf);
// Throws DomainError when the file has no [law] section.
StepLaw step_law(const ConfigFile& cf);

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

}  // namespace lorentz
