#include "lorentz/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lorentz/config_io.hpp"
#include "lorentz/corridors.hpp"
#include "lorentz/error.hpp"
#include "lorentz/keyvalue.hpp"
#include "lorentz/montecarlo.hpp"
#include "lorentz/oracle.hpp"

#ifndef LORENTZ_VERSION
#define LORENTZ_VERSION "0.0.0"
#endif

namespace lorentz {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell_name(Cell c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

json cell_json(Cell c) { return json::array({c.x, c.y}); }
json vec_json(Vec2 v) { return json::array({v.x, v.y}); }
json complex_json(complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const SigmaMatrix& s) {
  json m = json::array();
  for (int i = 0; i < s.dimension; ++i)
    for (int j = 0; j < s.dimension; ++j) m.push_back(s.a[i][j]);
  return m;
}

// All artifact files go through one writer so every file carries the same header.
class ArtifactWriter {
 public:
  ArtifactWriter(std::string dir, std::string hash, std::string seeds)
      : dir_(std::move(dir)), hash_(std::move(hash)), seeds_(std::move(seeds)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create " + dir_ + ": " + ec.message());
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    out << "# config_hash=" << hash_ << " seed=" << seeds_ << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << '\n';
    }
    text(name, out.str());
  }

  void gnuplot(const std::string& name, const std::string& body) {
    text(name, "# config_hash=" + hash_ + " seed=" + seeds_ + "\n" + body);
  }

  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  void text(const std::string& name, const std::string& content) {
    std::string path = (fs::path(dir_) / name).string();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    f << content;
    if (!f) throw IoError("write failed: " + path);
    written_.push_back(path);
  }

  const std::vector<std::string>& written() const { return written_; }
  const std::string& hash() const { return hash_; }
  const std::string& seeds() const { return seeds_; }

 private:
  std::string dir_, hash_, seeds_;
  std::vector<std::string> written_;
};

json histogram_sidecar(const SparseHistogram& h, const std::string& hash) {
  json seeds = json::array();
  for (const auto& r : h.provenance)
    seeds.push_back({{"seed", r.seed}, {"first_stream", r.first}, {"streams", r.count}});
  return {{"config_hash", hash},
          {"total", h.total},
          {"overflow", h.overflow_count},
          {"tangent", h.tangent_count},
          {"distinct_cells", h.counts.size()},
          {"streams", seeds}};
}

std::vector<std::vector<std::string>> histogram_rows(const SparseHistogram& h) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [k, c] : h.counts)
    rows.push_back({std::to_string(k.x), std::to_string(k.y), std::to_string(c)});
  return rows;
}

void write_histogram(ArtifactWriter& w, const std::string& stem, const SparseHistogram& h) {
  w.csv(stem + ".hist.csv", {"kx", "ky", "count"}, histogram_rows(h));
  w.json_file(stem + ".hist.json", histogram_sidecar(h, w.hash()));
}

json record_json(const Record& r) {
  return {{"id", r.id},
          {"predictor_id", r.predictor_id},
          {"estimator_id", r.estimator_id},
          {"predicted", r.predicted},
          {"estimated", r.estimated},
          {"sigma", r.sigma},
          {"z_score", r.z_score},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"seed", r.seed}};
}

struct Context {
  ExperimentPlan plan;
  std::optional<ConfigFile> config;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  int max_direction = kDefaultMaxDirection;
  RunReport report;
  json payload = json::object();
};

RunOptions run_options(const Context& ctx) {
  RunOptions o;
  o.seed = ctx.seed;
  o.workers = ctx.workers;
  o.block_size = std::uint64_t(ctx.plan.get_int("block_size", 4096));
  return o;
}

struct Geometry {
  ScattererConfig sc;
  std::vector<Corridor> corridors;
  SigmaMatrix sigma2;
};

Geometry load_geometry(const Context& ctx) {
  Geometry g;
  g.sc = scatterer_config(*ctx.config);
  g.corridors = enumerate_corridors(g.sc, ctx.max_direction);
  g.sigma2 = sigma_squared(g.corridors, g.sc.boundary_length, g.sc.dimension);
  return g;
}

CellObservable build_observable(const std::vector<ObservableEntry>& entries,
                                const ScattererConfig& sc) {
  CellObservable obs;
  const int count = int(sc.disks.size());
  for (const auto& e : entries) {
    complex v{e.value, e.imag};
    Cell cell = e.cell;
    if (sc.dimension == 1) cell.y = 0;
    if (e.obstacle < 0) {
      for (int j = 0; j < count; ++j) obs.set(cell, j, obs.at(cell, j) + v);
    } else {
      if (e.obstacle >= count)
        throw DomainError("observable obstacle " + std::to_string(e.obstacle) + " out of range");
      obs.set(cell, e.obstacle, obs.at(cell, e.obstacle) + v);
    }
  }
  return obs;
}

bool has_imag(const std::vector<ObservableEntry>& a, const std::vector<ObservableEntry>& b) {
  for (const auto& e : a)
    if (e.imag != 0.0) return true;
  for (const auto& e : b)
    if (e.imag != 0.0) return true;
  return false;
}

std::string predictor_tag(const char* name, Convention conv) {
  return std::string(name) + "." + convention_name(conv);
}

// ---------------------------------------------------------------- experiments

json corridors_json(const std::vector<Corridor>& corridors) {
  json list = json::array();
  for (const Corridor& c : corridors) {
    json tp = json::array();
    for (const auto& t : c.tangency_points)
      tp.push_back({{"obstacle", t.obstacle},
                    {"translate", cell_json(t.translate)},
                    {"point", vec_json(t.point)},
                    {"line", t.line},
                    {"position", t.position}});
    json co = json::array();
    for (const auto& f : c.coefficients)
      co.push_back({{"from", f.from}, {"to", f.to}, {"sign", f.sign}, {"value", f.value}});
    list.push_back({{"direction", cell_json(c.direction)},
                    {"width", c.width},
                    {"lower", c.lower},
                    {"upper", c.upper},
                    {"n_C", c.n_tangencies()},
                    {"tangency_points", tp},
                    {"coefficients", co}});
  }
  return list;
}

void run_validate(Context& ctx, ArtifactWriter& w) {
  json diag;
  diag["max_direction"] = ctx.max_direction;
  ScattererConfig sc;
  try {
    sc = scatterer_config(*ctx.config);
    diag["disjoint"] = true;
  } catch (const OverlapError& e) {
    diag["disjoint"] = false;
    diag["error"] = e.what();
    w.json_file("validate.json", diag);
    throw;
  }
  HorizonCertificate cert = check_infinite_horizon(sc, ctx.max_direction);
  diag["infinite_horizon"] = cert.infinite;
  if (cert.infinite)
    diag["witness"] = {{"direction", cell_json(cert.direction)},
                       {"point", vec_json(cert.point)},
                       {"offset", cert.offset}};
  auto corridors = enumerate_corridors(sc, ctx.max_direction);
  json dirs = json::array();
  for (const auto& c : corridors) dirs.push_back(cell_json(c.direction));
  diag["corridors"] = dirs;
  if (corridors.empty()) {
    diag["error"] = "no corridor";
    w.json_file("validate.json", diag);
    ctx.payload = diag;
    throw NoCorridorError("finite horizon: no corridor up to max_direction " +
                          std::to_string(ctx.max_direction));
  }
  SigmaMatrix s = sigma_squared(corridors, sc.boundary_length, sc.dimension);
  diag["sigma2"] = matrix_json(s);
  diag["det"] = s.det();
  diag["nondegenerate"] = s.nondegenerate();
  diag["predictors_enabled"] = s.nondegenerate();
  ctx.payload = diag;
  w.json_file("validate.json", diag);
  if (!s.nondegenerate())
    throw DegenerateSigmaError("det Sigma^2 = " + num(s.det()) +
                               ": all corridors parallel, predictors disabled");
}

void run_corridors(Context& ctx, ArtifactWriter& w) {
  ScattererConfig sc = scatterer_config(*ctx.config);
  auto corridors = enumerate_corridors(sc, ctx.max_direction);
  SigmaMatrix s = sigma_squared(corridors, sc.boundary_length, sc.dimension);
  SigmaMatrix sp = sigma_squared_pairs(corridors, sc.boundary_length, sc.dimension);
  TailTable table = tail_table(sc, corridors);
  SigmaMatrix st = sigma_squared_tail(table, sc.dimension);

  json tail = json::array();
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : table.entries) {
    tail.push_back({{"L", cell_json(e.L)}, {"w", cell_json(e.w)}, {"c", e.c}});
    rows.push_back({std::to_string(e.L.x), std::to_string(e.L.y), std::to_string(e.w.x),
                    std::to_string(e.w.y), num(e.c)});
  }
  json widths = json::array(), dirs = json::array(), ncs = json::array();
  for (const auto& c : corridors) {
    dirs.push_back(cell_json(c.direction));
    widths.push_back(c.width);
    ncs.push_back(c.n_tangencies());
  }
  ctx.payload = {{"max_direction", ctx.max_direction},
                 {"boundary_length", sc.boundary_length},
                 {"directions", dirs},
                 {"widths", widths},
                 {"n_C", ncs},
                 {"corridors", corridors_json(corridors)},
                 {"Sigma2", matrix_json(s)},
                 {"det", s.det()},
                 {"nondegenerate", s.nondegenerate()},
                 {"Sigma2_pairs", matrix_json(sp)},
                 {"Sigma2_tail", matrix_json(st)},
                 {"tail_table", tail}};
  w.json_file("corridors.json", ctx.payload);
  w.csv("tail_table.csv", {"Lx", "Ly", "wx", "wy", "c"}, rows);

  for (int i = 0; i < s.dimension; ++i)
    for (int j = 0; j < s.dimension; ++j) {
      std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
      ctx.report.records.push_back(make_record("sigma2.pairs." + ij, "sigma2.corridor_sum",
                                               "sigma2.pair_sum", s.a[i][j], sp.a[i][j], 0.0,
                                               1e-12, 0));
      ctx.report.records.push_back(make_record("sigma2.tail." + ij, "sigma2.corridor_sum",
                                               "sigma2.tail_sum", s.a[i][j], st.a[i][j], 0.0,
                                               1e-12, 0));
    }
  for (const Corridor& c : corridors) {
    std::map<std::pair<int, int>, double> sums;
    for (const auto& f : c.coefficients) sums[{f.from, f.sign}] += f.value;
    double worst = 1.0;
    for (const auto& [k, v] : sums)
      if (std::abs(v - 1.0) > std::abs(worst - 1.0)) worst = v;
    ctx.report.records.push_back(make_record("coefficient_sum.w=" + cell_name(c.direction),
                                             "unit", "corridor.coefficients", 1.0, worst, 0.0,
                                             1e-12, 0));
  }
}

void run_tail(Context& ctx, ArtifactWriter& w) {
  Geometry g;
  g.sc = scatterer_config(*ctx.config);
  g.corridors = enumerate_corridors(g.sc, ctx.max_direction);
  if (g.corridors.empty()) throw NoCorridorError("finite horizon: no tail to compare");
  const auto spec = tail_spec_from_table(tail_table(g.sc, g.corridors), g.sc.dimension);
  const std::uint64_t samples = std::uint64_t(ctx.plan.require_int("samples"));
  const auto n_min = ctx.plan.get_int("n_min", 8), n_max = ctx.plan.get_int("n_max", 20);
  const double rel = ctx.plan.get_double("rel_tol", 0.2), z = ctx.plan.get_double("z_tol", 3.0);

  auto t0 = std::chrono::steady_clock::now();
  SparseHistogram h = estimate_tail(g.sc, samples, run_options(ctx));
  ctx.report.timings["sampling_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_histogram(w, "tail", h);

  std::map<Cell, std::vector<TailSpec>> by_w;
  for (const auto& t : spec) by_w[t.w].push_back(t);
  std::vector<std::vector<std::string>> rows;
  json pooled = json::array();
  for (const auto& [dir, entries] : by_w) {
    double c = 0.0;
    for (const auto& t : entries) c += t.c;
    std::string plot_rows;
    for (std::int64_t N = n_min; N <= n_max; ++N) {
      std::set<Cell> sites;
      for (const auto& t : entries) sites.insert(t.L + t.w * N);
      std::uint64_t hits = 0;
      for (Cell k : sites) hits += h.count(k);
      EstimateWithCI e = proportion_estimate(hits, h.valid());
      const double n3 = double(N) * double(N) * double(N);
      const double sigma = n3 * (e.wilson_high - e.wilson_low) / (2.0 * e.wilson_z);
      const double est = n3 * e.value;
      Record r = make_record("tail.w=" + cell_name(dir) + ".N=" + std::to_string(N),
                             "tail.c_sum", "estimate_tail.pooled", c, est, sigma,
                             std::max(z * sigma, rel * c), ctx.seed);
      ctx.report.records.push_back(r);
      rows.push_back({std::to_string(dir.x), std::to_string(dir.y), std::to_string(N),
                      std::to_string(hits), std::to_string(h.valid()), num(est), num(sigma),
                      num(c)});
      pooled.push_back({{"w", cell_json(dir)}, {"N", N}, {"count", hits}, {"estimate", est},
                        {"sigma", sigma}, {"predicted", c}});
    }
  }
  w.csv("tail.csv", {"wx", "wy", "N", "count", "valid", "estimate", "sigma", "predicted"}, rows);
  w.gnuplot("tail.gp",
            "set datafile separator ','\n"
            "set xlabel 'N'\nset ylabel 'N^3 p(N)'\n"
            "plot 'tail.csv' every ::1 using 3:6:7 with yerrorbars title 'estimate', \\\n"
            "     'tail.csv' every ::1 using 3:8 with lines title 'predicted'\n");
  ctx.payload = {{"samples", samples},
                 {"overflow", h.overflow_count},
                 {"tangent", h.tangent_count},
                 {"pooled", pooled}};
}

void run_llt(Context& ctx, ArtifactWriter& w) {
  Geometry g = load_geometry(ctx);
  KernelParams kp = make_kernel_params(g.sigma2);
  const auto n_list = ctx.plan.get_ints("n");
  const auto targets = ctx.plan.get_cells("targets", {Cell{0, 0}});
  const std::uint64_t traj = std::uint64_t(ctx.plan.require_int("trajectories"));
  const int order = int(ctx.plan.get_int("order", 0));
  const Convention conv = ctx.plan.convention();
  const double rel = ctx.plan.get_double("rel_tol", 0.25), z = ctx.plan.get_double("z_tol", 3.0);

  auto t0 = std::chrono::steady_clock::now();
  auto ests = estimate_llt_multi(g.sc, n_list, targets, traj, run_options(ctx));
  ctx.report.timings["sampling_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<std::vector<std::string>> rows;
  json out = json::array();
  const Convention other = conv == Convention::kDerived ? Convention::kStated : Convention::kDerived;
  for (const auto& le : ests) {
    write_histogram(w, "llt_n" + std::to_string(le.n), le.histogram);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const Cell N = targets[i];
      const auto& e = le.estimates[i];
      LLTPrediction p = llt_predict(le.n, N, kp, {}, order, conv);
      LLTPrediction alt = llt_predict(le.n, N, kp, {}, order, other);
      const double pred = p.total.real();
      ctx.report.records.push_back(make_record(
          "llt.n=" + std::to_string(le.n) + ".N=" + cell_name(N),
          predictor_tag(order == 0 ? "llt.order0" : "llt.order1", conv), "estimate_llt", pred,
          e.value, e.sigma, std::max(z * e.sigma, rel * std::abs(pred)), ctx.seed));
      rows.push_back({std::to_string(le.n), std::to_string(N.x), std::to_string(N.y),
                      num(e.value), num(e.sigma), num(e.wilson_low), num(e.wilson_high),
                      num(p.leading.real()), num(pred), num(alt.total.real()),
                      std::to_string(le.histogram.valid()),
                      std::to_string(le.histogram.overflow_count)});
      out.push_back({{"n", le.n},
                     {"N", cell_json(N)},
                     {"estimate", e.value},
                     {"sigma", e.sigma},
                     {"wilson", {e.wilson_low, e.wilson_high}},
                     {"leading", p.leading.real()},
                     {"predicted", pred},
                     {std::string("predicted_") + convention_name(other), alt.total.real()},
                     {"error_scale", p.error_scale},
                     {"dropped", le.histogram.overflow_count}});
    }
  }
  w.csv("llt.csv",
        {"n", "Nx", "Ny", "estimate", "sigma", "wilson_low", "wilson_high", "leading",
         "predicted", std::string("predicted_") + convention_name(other), "valid", "dropped"},
        rows);
  w.gnuplot("llt.gp",
            "set datafile separator ','\nset logscale xy\n"
            "set xlabel 'n'\nset ylabel 'P(kappa_n = N)'\n"
            "plot 'llt.csv' every ::1 using 1:4:5 with yerrorbars title 'estimate', \\\n"
            "     'llt.csv' every ::1 using 1:8 with linespoints title 'leading', \\\n"
            "     'llt.csv' every ::1 using 1:9 with linespoints title 'predicted'\n");
  ctx.payload = {{"trajectories", traj},
                 {"order", order},
                 {"convention", convention_name(conv)},
                 {"Sigma2", matrix_json(g.sigma2)},
                 {"rows", out}};
}

void run_correlation(Context& ctx, ArtifactWriter& w, bool coboundary) {
  Geometry g = load_geometry(ctx);
  KernelParams kp = make_kernel_params(g.sigma2);
  const auto n_list = ctx.plan.get_ints("n");
  const std::uint64_t traj = std::uint64_t(ctx.plan.require_int("trajectories"));
  const int m = int(ctx.plan.get_int("m", 1));
  const Convention conv = ctx.plan.convention();
  const double rel = ctx.plan.get_double("rel_tol", 0.25), z = ctx.plan.get_double("z_tol", 3.0);
  const CellObservable phi = build_observable(ctx.plan.phi, g.sc);
  const CellObservable psi = build_observable(ctx.plan.psi, g.sc);
  const complex iphi = observable_integral(g.sc, phi), ipsi = observable_integral(g.sc, psi);
  const bool imag = has_imag(ctx.plan.phi, ctx.plan.psi);
  const std::string name = coboundary ? "coboundary" : "mixing";

  std::vector<std::vector<std::string>> rows;
  json out = json::array();
  double sampling = 0.0;
  for (std::int64_t n : n_list) {
    auto t0 = std::chrono::steady_clock::now();
    CorrelationEstimate ce = coboundary
                                 ? coboundary_estimate(g.sc, phi, psi, n, m, traj, run_options(ctx))
                                 : estimate_mixing(g.sc, phi, psi, n, traj, run_options(ctx));
    sampling += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const complex pred = coboundary ? coboundary_predict(n, m, kp, iphi, ipsi, conv)
                                    : mixing_predict(n, kp, iphi, ipsi, conv);
    const auto& re = ce.estimate.re;
    const auto& im = ce.estimate.im;
    const std::string id = name + ".n=" + std::to_string(n) + (coboundary ? ".m=" + std::to_string(m) : "");
    const std::string pid = predictor_tag(coboundary ? "coboundary" : "mixing", conv);
    const std::string eid = coboundary ? "coboundary_estimate" : "estimate_mixing";
    ctx.report.records.push_back(make_record(id + (imag ? ".re" : ""), pid, eid, pred.real(),
                                             re.value, re.sigma,
                                             std::max(z * re.sigma, rel * std::abs(pred)),
                                             ctx.seed));
    if (imag)
      ctx.report.records.push_back(make_record(id + ".im", pid, eid, pred.imag(), im.value,
                                               im.sigma,
                                               std::max(z * im.sigma, rel * std::abs(pred)),
                                               ctx.seed));
    rows.push_back({std::to_string(n), num(re.value), num(re.sigma), num(im.value),
                    num(im.sigma), num(pred.real()), num(pred.imag()),
                    std::to_string(re.count), std::to_string(ce.dropped)});
    out.push_back({{"n", n},
                   {"estimate", {re.value, im.value}},
                   {"sigma", {re.sigma, im.sigma}},
                   {"predicted", complex_json(pred)},
                   {"dropped", ce.dropped}});
  }
  ctx.report.timings["sampling_s"] = sampling;
  w.csv(name + ".csv",
        {"n", "estimate_re", "sigma_re", "estimate_im", "sigma_im", "predicted_re",
         "predicted_im", "valid", "dropped"},
        rows);
  w.gnuplot(name + ".gp",
            "set datafile separator ','\nset logscale x\n"
            "set xlabel 'n'\nset ylabel 'correlation'\n"
            "plot '" + name + ".csv' every ::1 using 1:2:3 with yerrorbars title 'estimate', \\\n"
            "     '" + name + ".csv' every ::1 using 1:6 with linespoints title 'predicted'\n");
  ctx.payload = {{"trajectories", traj},
                 {"convention", convention_name(conv)},
                 {"integral_phi", complex_json(iphi)},
                 {"integral_psi", complex_json(ipsi)},
                 {"rows", out}};
  if (coboundary) ctx.payload["m"] = m;
}

void run_oracle(Context& ctx, ArtifactWriter& w) {
  StepLaw law = step_law(*ctx.config);
  const auto n_list = ctx.plan.get_ints("n");
  const Convention conv = ctx.plan.convention();
  const double rel = ctx.plan.get_double("rel_tol", 0.1);
  KernelParams kp = make_kernel_params(law.sigma2());

  auto t0 = std::chrono::steady_clock::now();
  auto rows = llt_residual_scan(law, n_list, conv);
  ctx.report.timings["oracle_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<std::vector<std::string>> csv;
  json out = json::array();
  bool r1_below = true, r1_decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double pred = llt_predict(r.n, Cell{}, kp, {}, 0, conv).total.real();
    ctx.report.records.push_back(make_record("oracle.n=" + std::to_string(r.n),
                                             predictor_tag("llt.order0", conv),
                                             "exact_distribution", pred, r.p0, 0.0,
                                             rel * std::abs(pred), 0));
    r1_below = r1_below && r.r1 < r.r0;
    if (i > 0) r1_decreasing = r1_decreasing && r.r1 < rows[i - 1].r1;
    csv.push_back({std::to_string(r.n), std::to_string(r.window), num(r.p0), num(r.r0),
                   num(r.r1), num(r.r1_log), num(r.wrap_bound)});
    out.push_back({{"n", r.n}, {"window", r.window}, {"p0", r.p0}, {"r0", r.r0}, {"r1", r.r1},
                   {"r1_log", r.r1_log}, {"wrap_bound", r.wrap_bound}});
  }
  double r1_log_max = 0.0;
  for (const auto& r : rows) r1_log_max = std::max(r1_log_max, r.r1_log);
  w.csv("oracle.csv", {"n", "window", "p0", "r0", "r1", "r1_log", "wrap_bound"}, csv);
  w.gnuplot("oracle.gp",
            "set datafile separator ','\nset logscale xy\n"
            "set xlabel 'n'\nset ylabel 'residual'\n"
            "plot 'oracle.csv' every ::1 using 1:4 with linespoints title 'r0', \\\n"
            "     'oracle.csv' every ::1 using 1:5 with linespoints title 'r1'\n");
  ctx.payload = {{"convention", convention_name(conv)},
                 {"Sigma2", matrix_json(law.sigma2())},
                 {"cutoff", law.cutoff},
                 {"rows", out},
                 {"r1_below_r0", r1_below},
                 {"r1_decreasing", r1_decreasing},
                 {"r1_log_ratio", rows.empty() || rows.front().r1_log == 0.0
                                      ? 0.0
                                      : r1_log_max / rows.front().r1_log}};
}

std::vector<double> doubles(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(kv_double({"", tok, 0, 1}));
  return out;
}

void run_predict(Context& ctx, ArtifactWriter& w) {
  SigmaMatrix s;
  if (ctx.plan.has("sigma2")) {
    auto v = doubles(ctx.plan.params.at("sigma2"));
    s.dimension = int(ctx.plan.get_int("dimension", 2));
    if (s.dimension == 1) {
      s.a[0][0] = v.at(0);
    } else {
      s.a[0][0] = v.at(0);
      s.a[0][1] = v.at(1);
      s.a[1][0] = v.at(2);
      s.a[1][1] = v.at(3);
    }
  } else {
    s = load_geometry(ctx).sigma2;
  }
  KernelParams kp = make_kernel_params(s);
  ObservableMoments mo;
  mo.mean_phi = ctx.plan.get_double("mean_phi", 1.0);
  mo.mean_psi = ctx.plan.get_double("mean_psi", 1.0);
  if (ctx.plan.has("K")) {
    auto k = doubles(ctx.plan.params.at("K"));
    mo.K = {complex{k.at(0)}, complex{k.at(1)}};
  }
  const int order = int(ctx.plan.get_int("order", 0));
  const Convention conv = ctx.plan.convention();
  const auto targets = ctx.plan.get_cells("targets", {Cell{0, 0}});
  json out = json::array();
  std::vector<std::vector<std::string>> rows;
  for (std::int64_t n : ctx.plan.get_ints("n"))
    for (Cell N : targets) {
      LLTPrediction p = llt_predict(n, N, kp, mo, order, conv);
      out.push_back({{"n", n},
                     {"N", cell_json(N)},
                     {"total", complex_json(p.total)},
                     {"leading", complex_json(p.leading)},
                     {"loglog_correction", complex_json(p.loglog_correction)},
                     {"first_order", complex_json(p.first_order)},
                     {"error_scale", p.error_scale}});
      rows.push_back({std::to_string(n), std::to_string(N.x), std::to_string(N.y),
                      num(p.total.real()), num(p.leading.real()),
                      num(p.loglog_correction.real()), num(p.first_order.real()),
                      num(p.error_scale)});
    }
  ctx.payload = {{"Sigma2", matrix_json(s)},
                 {"order", order},
                 {"convention", convention_name(conv)},
                 {"predictions", out}};
  w.json_file("predict.json", ctx.payload);
  w.csv("predict.csv",
        {"n", "Nx", "Ny", "total", "leading", "loglog_correction", "first_order", "error_scale"},
        rows);
}

void run_report(Context& ctx, ArtifactWriter& w) {
  std::vector<std::string> inputs;
  if (ctx.plan.has("inputs")) {
    std::istringstream in(ctx.plan.params.at("inputs"));
    std::string item;
    while (std::getline(in, item, ',')) {
      auto a = item.find_first_not_of(' ');
      inputs.push_back(ctx.plan.resolve(item.substr(a)));
    }
  } else {
    for (const auto& e : fs::recursive_directory_iterator(ctx.plan.resolved_output())) {
      std::string name = e.path().filename().string();
      if (name.size() > 12 && name.ends_with(".result.json") && name != "report.result.json")
        inputs.push_back(e.path().string());
    }
    std::sort(inputs.begin(), inputs.end());
  }
  json runs = json::array();
  std::ostringstream md;
  md << "# Run report\n\n";
  md << "| run | record | predictor | estimator | predicted | estimated | sigma | z | tolerance | pass |\n";
  md << "|---|---|---|---|---|---|---|---|---|---|\n";
  std::size_t total = 0, passed = 0;
  for (const auto& path : inputs) {
    json r;
    try {
      r = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what(), 1, 1);
    }
    json recs = json::array();
    for (auto rec : r.value("records", json::array())) {
      const double pred = rec.value("predicted", 0.0), est = rec.value("estimated", 0.0);
      const double sigma = rec.value("sigma", 0.0);
      rec["z_score"] = sigma > 0.0 ? (est - pred) / sigma : 0.0;
      ++total;
      if (rec.value("pass", false)) ++passed;
      md << "| " << r.value("experiment", "?") << " | " << rec.value("id", "") << " | "
         << rec.value("predictor_id", "") << " | " << rec.value("estimator_id", "") << " | "
         << num(pred) << " | " << num(est) << " | " << num(sigma) << " | "
         << num(rec["z_score"].get<double>()) << " | " << num(rec.value("tolerance", 0.0))
         << " | " << (rec.value("pass", false) ? "yes" : "no") << " |\n";
      recs.push_back(rec);
    }
    runs.push_back({{"file", path},
                    {"experiment", r.value("experiment", "")},
                    {"config_hash", r.value("config_hash", "")},
                    {"seeds", r.value("seeds", json::array())},
                    {"records", recs}});
  }
  md << "\n" << passed << " of " << total << " records within tolerance.\n";
  ctx.payload = {{"runs", runs}, {"records", total}, {"passed", passed}};
  w.json_file("report.json", ctx.payload);
  w.text("report.md", md.str());
}

}  // namespace

Record make_record(std::string id, std::string predictor_id, std::string estimator_id,
                   double predicted, double estimated, double sigma, double tolerance,
                   std::uint64_t seed) {
  Record r;
  r.id = std::move(id);
  r.predictor_id = std::move(predictor_id);
  r.estimator_id = std::move(estimator_id);
  r.predicted = predicted;
  r.estimated = estimated;
  r.sigma = sigma;
  r.z_score = sigma > 0.0 ? (estimated - predicted) / sigma : 0.0;
  r.tolerance = tolerance;
  r.pass = std::abs(estimated - predicted) <= tolerance;
  r.seed = seed;
  return r;
}

bool RunReport::all_pass() const {
  for (const auto& r : records)
    if (!r.pass) return false;
  return true;
}

const char* library_version() { return LORENTZ_VERSION; }

RunReport run_plan(ExperimentPlan plan, const RunOverrides& ov) {
  if (ov.seed) set_param(plan, "seed", std::to_string(*ov.seed));
  if (ov.workers) {
    if (is_monte_carlo(plan.experiment)) set_param(plan, "workers", std::to_string(*ov.workers));
  }
  if (ov.output_dir) {
    plan.output_dir = fs::absolute(*ov.output_dir).string();
  }
  validate_plan(plan);

  Context ctx;
  ctx.plan = plan;
  ctx.seed = std::uint64_t(plan.get_int("seed", 0));
  ctx.workers = unsigned(plan.get_int("workers", 1));
  std::string hash = "none";
  if (!plan.config_path.empty() && !(plan.experiment == "predict" && plan.has("sigma2")) &&
      plan.experiment != "report") {
    ctx.config = load_config(plan.resolved_config());
    ctx.max_direction = int(plan.get_int("max_direction", ctx.config->max_direction));
    hash = hex64(ctx.config->hash());
  }
  ctx.report.experiment = plan.experiment;
  ctx.report.config_hash = hash;
  ctx.report.version = LORENTZ_VERSION;
  ctx.report.workers = ctx.workers;
  if (is_monte_carlo(plan.experiment)) ctx.report.seeds = {ctx.seed};

  std::string seeds = is_monte_carlo(plan.experiment) ? std::to_string(ctx.seed) : "none";
  ArtifactWriter w(plan.resolved_output(), hash, seeds);

  auto write_result = [&] {
    json recs = json::array();
    for (const auto& r : ctx.report.records) recs.push_back(record_json(r));
    json seeds_json = json::array();
    for (auto s : ctx.report.seeds)
      seeds_json.push_back({{"seed", s}, {"first_stream", 0}, {"counter", 0}});
    json result = {{"experiment", plan.experiment},
                   {"config_hash", hash},
                   {"version", ctx.report.version},
                   {"seeds", seeds_json},
                   {"workers", ctx.workers},
                   {"plan", serialize_plan(plan)},
                   {"records", recs},
                   {"timings", ctx.report.timings},
                   {"payload", ctx.payload}};
    ctx.report.result_json = result.dump(2) + "\n";
    w.text(plan.experiment + ".result.json", ctx.report.result_json);
    ctx.report.artifacts = w.written();
  };

  auto t0 = std::chrono::steady_clock::now();
  const std::string& ex = plan.experiment;
  if (ex == "validate") {
    try {
      run_validate(ctx, w);
    } catch (const Error&) {
      ctx.report.timings["total_s"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_result();
      throw;
    }
  } else if (ex == "corridors") {
    run_corridors(ctx, w);
  } else if (ex == "tail") {
    run_tail(ctx, w);
  } else if (ex == "llt") {
    run_llt(ctx, w);
  } else if (ex == "mixing") {
    run_correlation(ctx, w, false);
  } else if (ex == "coboundary") {
    run_correlation(ctx, w, true);
  } else if (ex == "oracle") {
    run_oracle(ctx, w);
  } else if (ex == "predict") {
    run_predict(ctx, w);
  } else if (ex == "report") {
    run_report(ctx, w);
  }
  ctx.report.timings["total_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_result();
  return ctx.report;
}

}  // namespace lorentz
