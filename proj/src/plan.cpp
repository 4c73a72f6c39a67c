#include "lorentz/plan.hpp"

#include <filesystem>
#include <set>
#include <sstream>

#include "lorentz/error.hpp"
#include "lorentz/keyvalue.hpp"

namespace lorentz {

namespace fs = std::filesystem;

namespace {

enum class ParamType { kInt, kIntList, kDouble, kDoubleList, kCells, kConvention, kText };

const std::map<std::string, ParamType>& param_types() {
  static const std::map<std::string, ParamType> t = {
      {"n", ParamType::kIntList},        {"trajectories", ParamType::kInt},
      {"samples", ParamType::kInt},      {"seed", ParamType::kInt},
      {"workers", ParamType::kInt},      {"block_size", ParamType::kInt},
      {"m", ParamType::kInt},            {"order", ParamType::kInt},
      {"max_direction", ParamType::kInt}, {"n_min", ParamType::kInt},
      {"n_max", ParamType::kInt},        {"dimension", ParamType::kInt},
      {"rel_tol", ParamType::kDouble},   {"z_tol", ParamType::kDouble},
      {"mean_phi", ParamType::kDouble},  {"mean_psi", ParamType::kDouble},
      {"sigma2", ParamType::kDoubleList}, {"K", ParamType::kDoubleList},
      {"targets", ParamType::kCells},    {"convention", ParamType::kConvention},
      {"inputs", ParamType::kText},
  };
  return t;
}

const std::map<std::string, std::set<std::string>>& allowed_params() {
  static const std::set<std::string> mc = {"seed", "workers", "block_size", "rel_tol", "z_tol",
                                           "max_direction"};
  auto with = [](std::set<std::string> base, std::initializer_list<std::string> extra) {
    base.insert(extra);
    return base;
  };
  static const std::map<std::string, std::set<std::string>> a = {
      {"validate", {"max_direction"}},
      {"corridors", {"max_direction"}},
      {"tail", with(mc, {"samples", "n_min", "n_max"})},
      {"llt", with(mc, {"n", "trajectories", "targets", "order", "convention"})},
      {"mixing", with(mc, {"n", "trajectories", "convention"})},
      {"coboundary", with(mc, {"n", "trajectories", "convention", "m"})},
      {"oracle", {"n", "convention", "rel_tol"}},
      {"predict", {"n", "targets", "order", "convention", "sigma2", "dimension", "mean_phi",
                   "mean_psi", "K", "max_direction"}},
      {"report", {"inputs"}},
  };
  return a;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

std::vector<double> double_list(const KvEntry& e) {
  std::vector<double> out;
  std::string v = e.value;
  for (char& c : v)
    if (c == ',') c = ' ';
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(kv_double({e.key, tok, e.line, e.column}));
  if (out.empty()) throw ParseError("empty list", e.line, e.column);
  return out;
}

std::string canonical_value(const KvEntry& e, ParamType type) {
  switch (type) {
    case ParamType::kInt:
      return std::to_string(kv_int(e));
    case ParamType::kIntList: {
      std::vector<std::string> s;
      for (auto v : kv_int_list(e)) s.push_back(std::to_string(v));
      return join(s, ", ");
    }
    case ParamType::kDouble:
      return format_double(kv_double(e));
    case ParamType::kDoubleList: {
      std::vector<std::string> s;
      for (double v : double_list(e)) s.push_back(format_double(v));
      return join(s, " ");
    }
    case ParamType::kCells: {
      std::vector<std::string> s;
      for (Cell c : kv_cell_list(e)) s.push_back(std::to_string(c.x) + " " + std::to_string(c.y));
      return join(s, ", ");
    }
    case ParamType::kConvention:
      return convention_name(parse_convention(e.value));
    case ParamType::kText: {
      std::vector<std::string> s;
      std::string item;
      std::istringstream in(e.value);
      while (std::getline(in, item, ',')) {
        auto a = item.find_first_not_of(" \t");
        auto b = item.find_last_not_of(" \t");
        if (a == std::string::npos) throw ParseError("empty list item", e.line, e.column);
        s.push_back(item.substr(a, b - a + 1));
      }
      return join(s, ", ");
    }
  }
  return e.value;
}

void set_param_entry(ExperimentPlan& plan, const KvEntry& e) {
  auto allowed = allowed_params().find(plan.experiment);
  if (allowed == allowed_params().end() || !allowed->second.count(e.key))
    throw UnknownKeyError(std::to_string(e.line) + ": unknown parameter '" + e.key + "' for " +
                          plan.experiment);
  plan.params[e.key] = canonical_value(e, param_types().at(e.key));
}

KvEntry param_entry(const ExperimentPlan& plan, const std::string& key) {
  return {key, plan.params.at(key), 0, 1};
}

ObservableEntry parse_observable(const KvSection& s) {
  s.check_keys({"cell", "obstacle", "value", "imag"});
  ObservableEntry o;
  auto cells = kv_cell_list(s.require("cell"));
  if (cells.size() != 1) {
    const KvEntry& e = s.require("cell");
    throw ParseError("expected one cell", e.line, e.column);
  }
  o.cell = cells.front();
  if (const KvEntry* e = s.find("obstacle")) {
    if (e->value == "all") {
      o.obstacle = -1;
    } else {
      o.obstacle = int(kv_int(*e));
      if (o.obstacle < 0) throw ParseError("obstacle must be >= 0 or 'all'", e->line, e->column);
    }
  }
  o.value = kv_double(s.require("value"));
  if (const KvEntry* e = s.find("imag")) o.imag = kv_double(*e);
  return o;
}

void write_observables(std::ostringstream& out, const char* name,
                       const std::vector<ObservableEntry>& obs) {
  for (const auto& o : obs) {
    out << "\n[" << name << "]\ncell = " << o.cell.x << ' ' << o.cell.y << "\nobstacle = "
        << (o.obstacle < 0 ? std::string("all") : std::to_string(o.obstacle))
        << "\nvalue = " << format_double(o.value) << "\nimag = " << format_double(o.imag) << '\n';
  }
}

bool needs_config(const ExperimentPlan& p) {
  if (p.experiment == "report") return false;
  if (p.experiment == "predict" && p.has("sigma2")) return false;
  return true;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"validate", "corridors", "tail",
                                                 "llt",      "mixing",    "coboundary",
                                                 "oracle",   "predict",   "report"};
  return names;
}

bool is_monte_carlo(const std::string& e) {
  return e == "tail" || e == "llt" || e == "mixing" || e == "coboundary";
}

std::int64_t ExperimentPlan::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? kv_int(param_entry(*this, key)) : fallback;
}

std::int64_t ExperimentPlan::require_int(const std::string& key) const {
  if (!has(key)) throw MissingRequiredError("missing required parameter '" + key + "'");
  return kv_int(param_entry(*this, key));
}

double ExperimentPlan::get_double(const std::string& key, double fallback) const {
  return has(key) ? kv_double(param_entry(*this, key)) : fallback;
}

std::vector<std::int64_t> ExperimentPlan::get_ints(const std::string& key) const {
  if (!has(key)) throw MissingRequiredError("missing required parameter '" + key + "'");
  return kv_int_list(param_entry(*this, key));
}

std::vector<Cell> ExperimentPlan::get_cells(const std::string& key,
                                            std::vector<Cell> fallback) const {
  return has(key) ? kv_cell_list(param_entry(*this, key)) : fallback;
}

std::string ExperimentPlan::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? params.at(key) : fallback;
}

Convention ExperimentPlan::convention() const {
  return parse_convention(get_string("convention", "derived"));
}

std::string ExperimentPlan::resolve(const std::string& path) const {
  fs::path p(path);
  if (p.is_absolute()) return p.string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

void set_param(ExperimentPlan& plan, const std::string& key, const std::string& value) {
  if (!param_types().count(key)) throw UnknownKeyError("unknown parameter '" + key + "'");
  set_param_entry(plan, {key, value, 0, 1});
}

ExperimentPlan parse_plan(const std::string& text, const std::string& base_dir) {
  KvDocument doc = parse_kv(text, {"phi", "psi"});
  doc.check_sections({"params", "phi", "psi"});
  const KvSection& top = doc.top();
  top.check_keys({"experiment", "config", "output_dir"});
  ExperimentPlan plan;
  plan.base_dir = base_dir.empty() ? "." : base_dir;
  const KvEntry& ex = top.require("experiment");
  plan.experiment = ex.value;
  if (!allowed_params().count(plan.experiment))
    throw ParseError("unknown experiment '" + ex.value + "'", ex.line, ex.column);
  if (const KvEntry* e = top.find("config")) plan.config_path = e->value;
  plan.output_dir = top.require("output_dir").value;
  if (const KvSection* s = doc.first("params"))
    for (const KvEntry& e : s->entries) {
      if (!param_types().count(e.key))
        throw UnknownKeyError(std::to_string(e.line) + ": unknown parameter '" + e.key + "'");
      set_param_entry(plan, e);
    }
  const bool observables = plan.experiment == "mixing" || plan.experiment == "coboundary";
  for (const KvSection* s : doc.all("phi")) {
    if (!observables) throw UnknownKeyError(std::to_string(s->line) + ": [phi] not used by " + plan.experiment);
    plan.phi.push_back(parse_observable(*s));
  }
  for (const KvSection* s : doc.all("psi")) {
    if (!observables) throw UnknownKeyError(std::to_string(s->line) + ": [psi] not used by " + plan.experiment);
    plan.psi.push_back(parse_observable(*s));
  }
  return plan;
}

ExperimentPlan load_plan(const std::string& path) {
  std::string dir = fs::path(path).parent_path().string();
  return parse_plan(read_text_file(path), dir.empty() ? "." : dir);
}

std::string serialize_plan(const ExperimentPlan& plan) {
  std::ostringstream out;
  out << "experiment = " << plan.experiment << '\n';
  if (!plan.config_path.empty()) out << "config = " << plan.config_path << '\n';
  out << "output_dir = " << plan.output_dir << '\n';
  if (!plan.params.empty()) {
    out << "\n[params]\n";
    for (const auto& [k, v] : plan.params) out << k << " = " << v << '\n';
  }
  write_observables(out, "phi", plan.phi);
  write_observables(out, "psi", plan.psi);
  return out.str();
}

void validate_plan(const ExperimentPlan& plan) {
  const std::string& ex = plan.experiment;
  if (!allowed_params().count(ex)) throw DomainError("unknown experiment '" + ex + "'");
  if (needs_config(plan)) {
    if (plan.config_path.empty()) throw MissingRequiredError("plan has no config path");
    if (!fs::exists(plan.resolved_config()))
      throw IoError("config file not found: " + plan.resolved_config());
  }
  if (plan.output_dir.empty()) throw MissingRequiredError("plan has no output_dir");
  auto positive = [&](const std::string& key) {
    if (plan.has(key) && plan.get_int(key, 1) < 1) throw DomainError(key + " must be >= 1");
  };
  for (const char* k : {"trajectories", "samples", "workers", "block_size", "max_direction"})
    positive(k);
  if (is_monte_carlo(ex)) {
    plan.require_int("seed");
    if (plan.get_int("seed", 0) < 0) throw DomainError("seed must be >= 0");
  }
  if (ex == "tail") {
    plan.require_int("samples");
    if (plan.get_int("n_min", 8) < 1 || plan.get_int("n_max", 20) < plan.get_int("n_min", 8))
      throw DomainError("need 1 <= n_min <= n_max");
  }
  if (ex == "llt" || ex == "mixing" || ex == "coboundary") plan.require_int("trajectories");
  if (ex == "llt" || ex == "mixing" || ex == "coboundary" || ex == "oracle" || ex == "predict") {
    std::int64_t m = ex == "coboundary" ? plan.get_int("m", 1) : 0;
    if (ex == "coboundary" && m < 1) throw DomainError("m must be >= 1");
    for (std::int64_t n : plan.get_ints("n"))
      if (n - m < 3)
        throw DomainError(ex == "coboundary" ? "coboundary requires n - m >= 3, got n = " +
                                                   std::to_string(n)
                                             : "n must be >= 3, got " + std::to_string(n));
  }
  if (plan.has("order")) {
    auto o = plan.get_int("order", 0);
    if (o != 0 && o != 1) throw UnsupportedOrderError("order must be 0 or 1");
  }
  if (ex == "mixing" || ex == "coboundary") {
    if (plan.phi.empty() || plan.psi.empty())
      throw EmptySupportError(ex + " needs [phi] and [psi] blocks");
  }
  if (ex == "predict" && plan.has("sigma2")) {
    auto d = plan.get_int("dimension", 2);
    if (d != 1 && d != 2) throw DomainError("dimension must be 1 or 2");
    std::size_t want = d == 1 ? 1 : 4;
    std::istringstream in(plan.params.at("sigma2"));
    std::size_t count = 0;
    std::string tok;
    while (in >> tok) ++count;
    if (count != want)
      throw DomainError("sigma2 needs " + std::to_string(want) + " entries for dimension " +
                        std::to_string(d));
  }
  if (plan.has("K")) {
    std::istringstream in(plan.params.at("K"));
    std::size_t count = 0;
    std::string tok;
    while (in >> tok) ++count;
    if (count != 2) throw DomainError("K needs 2 entries");
  }
}

}  // namespace lorentz
