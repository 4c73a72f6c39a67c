#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "lorentz/geometry.hpp"

namespace lorentz {

// Sectioned key-value text:
//   # comment
//   key = value          (top level, before any section)
//   [section]
//   key = value
// Keys may not repeat inside one section. Only sections listed as repeatable
// may appear more than once.

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
  int column = 0;  // column of the first value character
};

struct KvSection {
  std::string name;  // empty for the top level
  int line = 0;
  std::vector<KvEntry> entries;

  const KvEntry* find(const std::string& key) const;
  const KvEntry& require(const std::string& key) const;
  // Throws UnknownKeyError for the first key outside `allowed`.
  void check_keys(const std::set<std::string>& allowed) const;
};

struct KvDocument {
  std::vector<KvSection> sections;  // sections[0] is the top level

  const KvSection& top() const { return sections.front(); }
  std::vector<const KvSection*> all(const std::string& name) const;
  const KvSection* first(const std::string& name) const;
  void check_sections(const std::set<std::string>& allowed) const;
};

KvDocument parse_kv(const std::string& text, const std::set<std::string>& repeatable);
KvDocument parse_kv_file(const std::string& path, const std::set<std::string>& repeatable);
std::string serialize_kv(const KvDocument& doc);

std::string read_text_file(const std::string& path);

std::int64_t kv_int(const KvEntry& e);
double kv_double(const KvEntry& e);
std::vector<std::int64_t> kv_int_list(const KvEntry& e);  // "125, 250 500"
std::vector<Cell> kv_cell_list(const KvEntry& e);         // "0 0, 1 0"

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace lorentz
