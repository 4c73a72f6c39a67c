#include "lorentz/config_io.hpp"

#include <cstdio>
#include <sstream>

#include "lorentz/corridors.hpp"
#include "lorentz/error.hpp"
#include "lorentz/keyvalue.hpp"

namespace lorentz {

namespace {

Cell single_cell(const KvEntry& e) {
  auto cells = kv_cell_list(e);
  if (cells.size() != 1) throw ParseError("expected one integer pair", e.line, e.column);
  return cells.front();
}

std::string cell_text(Cell c) { return std::to_string(c.x) + " " + std::to_string(c.y); }

}  // namespace

ConfigFile parse_config(const std::string& text) {
  KvDocument doc = parse_kv(text, {"disk", "tail", "core"});
  doc.check_sections({"disk", "law", "tail", "core"});
  ConfigFile cf;
  const KvSection& top = doc.top();
  top.check_keys({"dimension", "max_direction"});
  cf.dimension = int(kv_int(top.require("dimension")));
  if (cf.dimension != 1 && cf.dimension != 2) {
    const KvEntry& e = top.require("dimension");
    throw DomainError(std::to_string(e.line) + ": dimension must be 1 or 2");
  }
  if (const KvEntry* e = top.find("max_direction")) {
    cf.max_direction = int(kv_int(*e));
    if (cf.max_direction < 1)
      throw DomainError(std::to_string(e->line) + ": max_direction must be >= 1");
  }
  for (const KvSection* s : doc.all("disk")) {
    s->check_keys({"cx", "cy", "r"});
    cf.disks.push_back({{kv_double(s->require("cx")), kv_double(s->require("cy"))},
                        kv_double(s->require("r"))});
  }
  if (const KvSection* s = doc.first("law")) {
    s->check_keys({"cutoff", "quartic"});
    cf.has_law = true;
    cf.cutoff = kv_int(s->require("cutoff"));
    if (const KvEntry* e = s->find("quartic")) cf.quartic = kv_double(*e);
  }
  for (const KvSection* s : doc.all("tail")) {
    s->check_keys({"L", "w", "c"});
    cf.tails.push_back({single_cell(s->require("L")), single_cell(s->require("w")),
                        kv_double(s->require("c"))});
  }
  for (const KvSection* s : doc.all("core")) {
    s->check_keys({"k", "weight"});
    cf.core.push_back({single_cell(s->require("k")), kv_double(s->require("weight"))});
  }
  if ((!cf.tails.empty() || !cf.core.empty()) && !cf.has_law)
    throw MissingRequiredError("[tail] and [core] sections need a [law] section");
  return cf;
}

ConfigFile load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string ConfigFile::canonical() const {
  std::ostringstream out;
  out << "dimension = " << dimension << "\nmax_direction = " << max_direction << '\n';
  for (const Disk& d : disks)
    out << "[disk]\ncx = " << format_double(d.center.x) << "\ncy = " << format_double(d.center.y)
        << "\nr = " << format_double(d.radius) << '\n';
  if (has_law) out << "[law]\ncutoff = " << cutoff << "\nquartic = " << format_double(quartic) << '\n';
  for (const TailSpec& t : tails)
    out << "[tail]\nL = " << cell_text(t.L) << "\nw = " << cell_text(t.w)
        << "\nc = " << format_double(t.c) << '\n';
  for (const auto& [k, w] : core)
    out << "[core]\nk = " << cell_text(k) << "\nweight = " << format_double(w) << '\n';
  return out.str();
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t ConfigFile::hash() const { return fnv1a64(canonical()); }

ScattererConfig scatterer_config(const ConfigFile& cf) {
  if (cf.disks.empty()) throw EmptyConfigError("config lists no [disk] sections");
  return build_config(cf.disks, cf.dimension);
}

StepLaw step_law(const ConfigFile& cf) {
  if (!cf.has_law) throw DomainError("config has no [law] section");
  std::vector<TailSpec> tails = cf.tails;
  if (tails.empty()) {
    ScattererConfig sc = scatterer_config(cf);
    auto corridors = enumerate_corridors(sc, cf.max_direction);
    if (corridors.empty()) throw NoCorridorError("no corridor to derive a tail from");
    tails = tail_spec_from_table(tail_table(sc, corridors), cf.dimension);
  }
  return build_step_law(tails, cf.cutoff, cf.dimension, cf.core.empty() ? nullptr : &cf.core,
                        cf.quartic);
}

}  // namespace lorentz
