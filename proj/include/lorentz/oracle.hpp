#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "lorentz/kernels.hpp"
#include "lorentz/rng.hpp"

namespace lorentz {

struct TailSpec {
  Cell L;
  Cell w;  // prime direction; (1, 0) or (-1, 0) when d = 1
  double c = 0.0;
};

struct StepLaw {
  int dimension = 1;
  std::vector<TailSpec> tail_spec;
  std::int64_t cutoff = 0;
  double quartic = 0.0;  // coefficient of the optional beta/N^4 term
  std::vector<std::pair<Cell, double>> pmf;  // sorted by cell
  std::vector<double> cumulative;

  double prob(Cell k) const;
  Cell sample(CounterRng& rng) const;
  SigmaMatrix sigma2() const;
  double second_moment() const;        // E|X|^2
  std::int64_t support_radius() const; // max |k|_inf over the support
  double total_mass() const;
};

using CorePmf = std::vector<std::pair<Cell, double>>;

StepLaw build_step_law(const std::vector<TailSpec>& tail_spec, std::int64_t cutoff,
                       int dimension, const CorePmf* core = nullptr, double quartic = 0.0);

// Tail spec matching a billiard tail table: one entry per canonical signed w.
std::vector<TailSpec> tail_spec_from_table(const TailTable& table, int dimension);

complex psi_eval(const StepLaw& law, Point t);
complex lambda_eval(const StepLaw& law, Point t);

inline constexpr double kMaxWrapBound = 1e-8;

struct ConvolutionGrid {
  int dimension = 1;
  std::int64_t side = 0;
  std::vector<double> values;  // index (k mod side), row-major (x slowest) when d = 2
  double wrap_bound = 0.0;
  double min_raw = 0.0;        // most negative value before clipping

  double at(Cell k) const;
  double total() const;
};

double wrap_bound(const StepLaw& law, std::int64_t n, std::int64_t side);
std::int64_t choose_window(const StepLaw& law, std::int64_t n);

// Holds the transform of a law's pmf on one window; evaluates P(S_n = N).
class SpectralOracle {
 public:
  SpectralOracle(const StepLaw& law, std::int64_t side);
  ~SpectralOracle();
  SpectralOracle(const SpectralOracle&) = delete;
  SpectralOracle& operator=(const SpectralOracle&) = delete;

  std::int64_t side() const { return side_; }
  ConvolutionGrid grid(std::int64_t n) const;
  // Direct inverse sum at one site (d = 1); falls back to the grid when d = 2.
  double probability(std::int64_t n, Cell N) const;

 private:
  const StepLaw& law_;
  int dimension_;
  std::int64_t side_;
  std::vector<double> spectrum_;  // real part of the half-spectrum
};

ConvolutionGrid exact_distribution(const StepLaw& law, std::int64_t n, std::int64_t window = 0);
ConvolutionGrid exact_distribution_squaring(const StepLaw& law, std::int64_t n,
                                            std::int64_t window = 0);

struct ResidualRow {
  std::int64_t n = 0;
  std::int64_t window = 0;
  double p0 = 0.0;
  double r0 = 0.0;
  double r1 = 0.0;
  double r1_log = 0.0;
  double wrap_bound = 0.0;
};

std::vector<ResidualRow> llt_residual_scan(const StepLaw& law,
                                           const std::vector<std::int64_t>& n_list,
                                           Convention conv = Convention::kDerived);

double exact_second_difference(const StepLaw& law, std::int64_t n, Cell N);
double exact_coboundary(const StepLaw& law, std::int64_t n, int m);

// E[|S_n|^2 ; |S_n|_inf <= radius] from a grid.
double truncated_second_moment(const ConvolutionGrid& g, std::int64_t radius);

}  // namespace lorentz
