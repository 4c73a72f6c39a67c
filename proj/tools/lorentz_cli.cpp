// Command-line front end: one subcommand per experiment.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lorentz/error.hpp"
#include "lorentz/plan.hpp"
#include "lorentz/runner.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 2, kHypothesis = 3, kNumeric = 4, kTolerance = 5 };

int exit_code(lorentz::ErrorKind k) {
  using lorentz::ErrorKind;
  switch (k) {
    case ErrorKind::Overlap:
    case ErrorKind::NoCorridor:
    case ErrorKind::DegenerateSigma:
      return kHypothesis;
    case ErrorKind::HorizonOverflow:
    case ErrorKind::TangentRay:
    case ErrorKind::WrapBoundExceeded:
    case ErrorKind::OverflowAbort:
      return kNumeric;
    default:
      return kUsage;
  }
}

struct Options {
  std::string plan, config, out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool strict = false;
  std::vector<std::string> sets;
  // predict shortcuts
  std::string n, N, sigma2, convention, K;
  std::optional<int> order, dimension;
  std::optional<double> mean_phi, mean_psi;
};

lorentz::ExperimentPlan make_plan(const std::string& sub, const Options& o) {
  lorentz::ExperimentPlan plan;
  if (!o.plan.empty()) {
    plan = lorentz::load_plan(o.plan);
    if (plan.experiment != sub)
      throw lorentz::DomainError("plan is for '" + plan.experiment + "', not '" + sub + "'");
  } else {
    plan.experiment = sub;
    plan.output_dir = o.out.empty() ? "lorentz-out" : o.out;
  }
  if (!o.config.empty()) {
    plan.config_path = o.plan.empty() ? o.config : std::filesystem::absolute(o.config).string();
  }
  for (const auto& kv : o.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw lorentz::ParseError("expected key=value in --set", 1, 1);
    lorentz::set_param(plan, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.n.empty()) lorentz::set_param(plan, "n", o.n);
  if (!o.N.empty()) lorentz::set_param(plan, "targets", o.N);
  if (!o.sigma2.empty()) lorentz::set_param(plan, "sigma2", o.sigma2);
  if (!o.convention.empty()) lorentz::set_param(plan, "convention", o.convention);
  if (!o.K.empty()) lorentz::set_param(plan, "K", o.K);
  if (o.order) lorentz::set_param(plan, "order", std::to_string(*o.order));
  if (o.dimension) lorentz::set_param(plan, "dimension", std::to_string(*o.dimension));
  if (o.mean_phi) lorentz::set_param(plan, "mean_phi", std::to_string(*o.mean_phi));
  if (o.mean_psi) lorentz::set_param(plan, "mean_psi", std::to_string(*o.mean_psi));
  return plan;
}

int execute(const std::string& sub, const Options& o) {
  try {
    lorentz::ExperimentPlan plan = make_plan(sub, o);
    lorentz::RunOverrides ov;
    ov.seed = o.seed;
    ov.workers = o.workers;
    if (!o.out.empty() && !o.plan.empty()) ov.output_dir = o.out;
    lorentz::RunReport rep = lorentz::run_plan(plan, ov);
    if (sub == "corridors" || sub == "predict" || sub == "validate") {
      auto j = nlohmann::ordered_json::parse(rep.result_json);
      std::cout << j["payload"].dump(2) << "\n";
    }
    std::size_t failed = 0;
    for (const auto& r : rep.records) {
      std::printf("%-40s predicted=%.6g estimated=%.6g sigma=%.3g z=%.2f %s\n", r.id.c_str(),
                  r.predicted, r.estimated, r.sigma, r.z_score, r.pass ? "pass" : "FAIL");
      if (!r.pass) ++failed;
    }
    for (const auto& a : rep.artifacts) std::fprintf(stderr, "wrote %s\n", a.c_str());
    if (failed && o.strict) {
      std::fprintf(stderr, "%zu record(s) outside tolerance\n", failed);
      return kTolerance;
    }
    return kOk;
  } catch (const lorentz::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", lorentz::error_kind_name(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic Lorentz gas experiments"};
  app.set_version_flag("--version", std::string(lorentz::library_version()));
  app.require_subcommand(1);
  Options o;
  const char* help[] = {
      "validate", "check disjointness, infinite horizon and det Sigma^2",
      "corridors", "enumerate corridors, Sigma^2 and the tail table",
      "tail", "Monte Carlo histogram of one free flight",
      "llt", "Monte Carlo P(kappa_n = N) against the LLT predictor",
      "mixing", "Monte Carlo correlation of cell observables",
      "coboundary", "Monte Carlo finite difference of correlations",
      "oracle", "exact convolution residual scan for a step law",
      "predict", "evaluate the LLT predictor",
      "report", "aggregate result files into report.json and report.md",
  };
  for (std::size_t i = 0; i < std::size(help); i += 2) {
    CLI::App* sub = app.add_subcommand(help[i], help[i + 1]);
    sub->add_option("--plan", o.plan, "plan file");
    sub->add_option("--config", o.config, "config file (overrides the plan's)");
    sub->add_option("--seed", o.seed, "rng seed");
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output directory");
    sub->add_flag("--strict", o.strict, "exit 5 when a record is outside tolerance");
    sub->add_option("--set", o.sets, "plan parameter key=value");
    if (std::string(help[i]) == "predict") {
      sub->add_option("--n", o.n, "n values");
      sub->add_option("--N", o.N, "targets, e.g. \"0 0, 1 0\"");
      sub->add_option("--sigma2", o.sigma2, "Sigma^2 entries (1 or 4, row-major)");
      sub->add_option("--dimension", o.dimension, "1 or 2");
      sub->add_option("--order", o.order, "0 or 1");
      sub->add_option("--convention", o.convention, "stated or derived");
      sub->add_option("--mean-phi", o.mean_phi, "integral of phi");
      sub->add_option("--mean-psi", o.mean_psi, "integral of psi");
      sub->add_option("--K", o.K, "K vector (two reals)");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  for (CLI::App* sub : app.get_subcommands()) return execute(sub->get_name(), o);
  return kUsage;
}
