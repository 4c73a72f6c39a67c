#include "lorentz/oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "lorentz/error.hpp"

namespace lorentz {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::int64_t kMaxSide1 = std::int64_t(1) << 27;
constexpr std::int64_t kMaxSide2 = std::int64_t(1) << 12;

std::int64_t wrap_index(std::int64_t k, std::int64_t side) {
  std::int64_t r = k % side;
  return r < 0 ? r + side : r;
}

bool is_pow2(std::int64_t x) { return x > 0 && (x & (x - 1)) == 0; }

// Neumaier compensated sum.
struct Accumulator {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
    else comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

double real_power(double h, std::int64_t n) {
  if (h >= 0.0) return std::pow(h, double(n));
  double v = std::pow(-h, double(n));
  return (n % 2 == 0) ? v : -v;
}

struct FftwReal {
  double* p = nullptr;
  explicit FftwReal(std::size_t n) : p(fftw_alloc_real(n)) {
    if (!p) throw std::bad_alloc();
  }
  ~FftwReal() { fftw_free(p); }
};

struct FftwComplex {
  fftw_complex* p = nullptr;
  explicit FftwComplex(std::size_t n) : p(fftw_alloc_complex(n)) {
    if (!p) throw std::bad_alloc();
  }
  ~FftwComplex() { fftw_free(p); }
};

std::size_t half_size(int d, std::int64_t side) {
  std::size_t h = std::size_t(side / 2 + 1);
  return d == 1 ? h : std::size_t(side) * h;
}

std::size_t full_size(int d, std::int64_t side) {
  return d == 1 ? std::size_t(side) : std::size_t(side) * std::size_t(side);
}

void forward(int d, std::int64_t side, double* in, fftw_complex* out) {
  fftw_plan plan = d == 1 ? fftw_plan_dft_r2c_1d(int(side), in, out, FFTW_ESTIMATE)
                          : fftw_plan_dft_r2c_2d(int(side), int(side), in, out, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

void inverse(int d, std::int64_t side, fftw_complex* in, double* out) {
  fftw_plan plan = d == 1 ? fftw_plan_dft_c2r_1d(int(side), in, out, FFTW_ESTIMATE)
                          : fftw_plan_dft_c2r_2d(int(side), int(side), in, out, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

void place_pmf(const StepLaw& law, std::int64_t side, double* buf) {
  std::fill(buf, buf + full_size(law.dimension, side), 0.0);
  for (const auto& [k, p] : law.pmf) {
    if (law.dimension == 1) buf[wrap_index(k.x, side)] += p;
    else buf[wrap_index(k.x, side) * side + wrap_index(k.y, side)] += p;
  }
}

void check_window(const StepLaw& law, std::int64_t n, std::int64_t side) {
  if (!is_pow2(side)) throw DomainError("window must be a power of two");
  if (side / 2 <= law.support_radius())
    throw WrapBoundExceededError("window does not contain the step support");
  double b = wrap_bound(law, n, side);
  if (b > kMaxWrapBound)
    throw WrapBoundExceededError("wrap bound " + std::to_string(b) + " exceeds 1e-8 for side " +
                                 std::to_string(side));
}

ConvolutionGrid finish_grid(int d, std::int64_t side, std::vector<double> values, double bound) {
  ConvolutionGrid g;
  g.dimension = d;
  g.side = side;
  g.wrap_bound = bound;
  double scale = 1.0 / double(full_size(d, side));
  for (double& v : values) {
    v *= scale;
    g.min_raw = std::min(g.min_raw, v);
    if (v < 0.0) v = 0.0;
  }
  g.values = std::move(values);
  return g;
}

bool rays_overlap(const TailSpec& a, const TailSpec& b) {
  auto in_line = [](Cell v, Cell w) {
    // v in Z w for prime w
    if (v.x * w.y - v.y * w.x != 0) return false;
    return true;
  };
  if (a.w == b.w && in_line(a.L - b.L, a.w)) return true;
  if (a.w == -b.w && in_line(a.L + b.L, a.w)) return true;
  return false;
}

}  // namespace

double StepLaw::prob(Cell k) const {
  auto it = std::lower_bound(pmf.begin(), pmf.end(), k,
                             [](const auto& e, Cell key) { return e.first < key; });
  return (it != pmf.end() && it->first == k) ? it->second : 0.0;
}

Cell StepLaw::sample(CounterRng& rng) const {
  double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  std::size_t i = std::min<std::size_t>(it - cumulative.begin(), pmf.size() - 1);
  return pmf[i].first;
}

SigmaMatrix StepLaw::sigma2() const {
  SigmaMatrix m;
  m.dimension = dimension;
  for (const TailSpec& t : tail_spec) {
    m.a[0][0] += t.c * double(t.w.x * t.w.x);
    if (dimension == 2) {
      m.a[0][1] += t.c * double(t.w.x * t.w.y);
      m.a[1][0] += t.c * double(t.w.x * t.w.y);
      m.a[1][1] += t.c * double(t.w.y * t.w.y);
    }
  }
  return m;
}

double StepLaw::second_moment() const {
  Accumulator acc;
  for (const auto& [k, p] : pmf) acc.add(p * double(k.x * k.x + k.y * k.y));
  return acc.value();
}

std::int64_t StepLaw::support_radius() const {
  std::int64_t r = 0;
  for (const auto& e : pmf) r = std::max({r, std::abs(e.first.x), std::abs(e.first.y)});
  return r;
}

double StepLaw::total_mass() const {
  Accumulator acc;
  for (const auto& e : pmf) acc.add(e.second);
  return acc.value();
}

StepLaw build_step_law(const std::vector<TailSpec>& tail_spec, std::int64_t cutoff, int dimension,
                       const CorePmf* core, double quartic) {
  if (dimension != 1 && dimension != 2) throw DomainError("dimension must be 1 or 2");
  if (cutoff < 8) throw DomainError("cutoff must be >= 8");
  for (const TailSpec& t : tail_spec) {
    if (!(t.c > 0.0)) throw DomainError("tail constants must be positive");
    if (dimension == 1 && (t.w.y != 0 || t.L.y != 0))
      throw DomainError("d = 1 tail spec must have zero second coordinates");
    if (std::gcd(std::abs(t.w.x), std::abs(t.w.y)) != 1)
      throw NonPrimeDirectionError("tail direction (" + std::to_string(t.w.x) + "," +
                                   std::to_string(t.w.y) + ") is not prime");
  }
  for (std::size_t i = 0; i < tail_spec.size(); ++i)
    for (std::size_t j = i + 1; j < tail_spec.size(); ++j)
      if (rays_overlap(tail_spec[i], tail_spec[j]))
        throw OverlappingTailError("tail entries " + std::to_string(i) + " and " +
                                   std::to_string(j) + " share infinitely many sites");

  std::map<Cell, double> mass;
  Accumulator tail;
  for (const TailSpec& t : tail_spec) {
    for (std::int64_t N = 1; N <= cutoff; ++N) {
      double dn = double(N);
      double p = t.c / (dn * dn * dn);
      if (quartic != 0.0) p += quartic / (dn * dn * dn * dn);
      Cell k = t.L + t.w * N;
      mass[k] += p;
      mass[-k] += p;
      tail.add(2.0 * p);
    }
  }
  double rest = 1.0 - tail.value();
  if (!(rest > 0.0)) throw MassOverflowError("tail mass " + std::to_string(tail.value()) + " >= 1");

  if (core && !core->empty()) {
    Accumulator w;
    std::map<Cell, double> cm;
    for (const auto& [k, p] : *core) {
      if (p < 0.0) throw DomainError("core weights must be nonnegative");
      if (dimension == 1 && k.y != 0) throw DomainError("d = 1 core must lie on the axis");
      cm[k] += p;
      w.add(p);
    }
    for (const auto& [k, p] : cm) {
      auto it = cm.find(-k);
      if (it == cm.end() || it->second != p) throw DomainError("core pmf must be symmetric");
    }
    if (!(w.value() > 0.0)) throw DomainError("core has zero total weight");
    for (const auto& [k, p] : cm) mass[k] += rest * p / w.value();
  } else {
    mass[Cell{0, 0}] += rest;
  }

  StepLaw law;
  law.dimension = dimension;
  law.tail_spec = tail_spec;
  law.cutoff = cutoff;
  law.quartic = quartic;
  law.pmf.assign(mass.begin(), mass.end());
  Accumulator acc;
  law.cumulative.reserve(law.pmf.size());
  for (const auto& e : law.pmf) {
    acc.add(e.second);
    law.cumulative.push_back(acc.value());
  }
  return law;
}

std::vector<TailSpec> tail_spec_from_table(const TailTable& table, int dimension) {
  std::map<std::pair<Cell, Cell>, double> merged;
  for (const TailEntry& e : table.entries) {
    bool canonical = e.w.x > 0 || (e.w.x == 0 && e.w.y > 0);
    if (!canonical) continue;
    if (dimension == 1) {
      if (e.w.x == 0) continue;
      if (std::abs(e.w.x) != 1)
        throw NonPrimeDirectionError("direction projects to a non-unit step in d = 1");
      merged[{Cell{e.L.x, 0}, Cell{e.w.x, 0}}] += e.c;
    } else {
      merged[{e.L, e.w}] += e.c;
    }
  }
  std::vector<TailSpec> out;
  for (const auto& [key, c] : merged) out.push_back({key.first, key.second, c});
  return out;
}

complex psi_eval(const StepLaw& law, Point t) {
  if (std::hypot(t[0], law.dimension == 2 ? t[1] : 0.0) > kPi)
    throw DomainError("psi_eval requires |t| <= pi");
  Accumulator re, im;
  for (const auto& [k, p] : law.pmf) {
    double x = t[0] * double(k.x) + (law.dimension == 2 ? t[1] * double(k.y) : 0.0);
    double s = std::sin(0.5 * x);
    re.add(2.0 * p * s * s);
    im.add(-p * std::sin(x));
  }
  return {re.value(), im.value()};
}

complex lambda_eval(const StepLaw& law, Point t) {
  Accumulator re, im;
  for (const auto& [k, p] : law.pmf) {
    double x = t[0] * double(k.x) + (law.dimension == 2 ? t[1] * double(k.y) : 0.0);
    re.add(p * std::cos(x));
    im.add(p * std::sin(x));
  }
  return {re.value(), im.value()};
}

double ConvolutionGrid::at(Cell k) const {
  if (dimension == 1) return values[std::size_t(wrap_index(k.x, side))];
  return values[std::size_t(wrap_index(k.x, side) * side + wrap_index(k.y, side))];
}

double ConvolutionGrid::total() const {
  Accumulator acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

double wrap_bound(const StepLaw& law, std::int64_t n, std::int64_t side) {
  const double half = double(side / 2);
  if (half > double(n) * double(law.support_radius())) return 0.0;
  return std::min(1.0, double(n) * law.second_moment() / (half * half));
}

std::int64_t choose_window(const StepLaw& law, std::int64_t n) {
  const std::int64_t cap = law.dimension == 1 ? kMaxSide1 : kMaxSide2;
  for (std::int64_t side = 16; side <= cap; side *= 2) {
    if (side / 2 <= law.support_radius()) continue;
    if (wrap_bound(law, n, side) <= kMaxWrapBound) return side;
  }
  throw WrapBoundExceededError("no window up to " + std::to_string(cap) +
                               " keeps the wrap bound below 1e-8 for n = " + std::to_string(n));
}

SpectralOracle::SpectralOracle(const StepLaw& law, std::int64_t side)
    : law_(law), dimension_(law.dimension), side_(side) {
  if (!is_pow2(side)) throw DomainError("window must be a power of two");
  if (side / 2 <= law.support_radius())
    throw WrapBoundExceededError("window does not contain the step support");
  const std::size_t hs = half_size(dimension_, side_);
  FftwComplex out(hs);
  {
    FftwReal in(full_size(dimension_, side_));
    place_pmf(law_, side_, in.p);
    forward(dimension_, side_, in.p, out.p);
  }
  // symmetric law: the transform is real up to rounding
  spectrum_.resize(hs);
  for (std::size_t i = 0; i < hs; ++i) spectrum_[i] = out.p[i][0];
}

SpectralOracle::~SpectralOracle() = default;

ConvolutionGrid SpectralOracle::grid(std::int64_t n) const {
  if (n < 1) throw DomainError("n must be >= 1");
  check_window(law_, n, side_);
  const std::size_t hs = spectrum_.size();
  FftwComplex work(hs);
  for (std::size_t i = 0; i < hs; ++i) {
    work.p[i][0] = real_power(spectrum_[i], n);
    work.p[i][1] = 0.0;
  }
  std::vector<double> values(full_size(dimension_, side_));
  inverse(dimension_, side_, work.p, values.data());
  return finish_grid(dimension_, side_, std::move(values), wrap_bound(law_, n, side_));
}

double SpectralOracle::probability(std::int64_t n, Cell N) const {
  if (dimension_ == 2) return grid(n).at(N);
  check_window(law_, n, side_);
  const std::int64_t half = side_ / 2;
  const std::int64_t r = wrap_index(N.x, side_);
  Accumulator acc;
  acc.add(real_power(spectrum_[0], n));
  acc.add(real_power(spectrum_[std::size_t(half)], n) * ((r % 2 == 0) ? 1.0 : -1.0));
  const double step = 2.0 * kPi / double(side_);
  for (std::int64_t k = 1; k < half; ++k) {
    double h = real_power(spectrum_[std::size_t(k)], n);
    if (h == 0.0) continue;
    std::int64_t phase = (k * r) % side_;  // k, r < 2^27
    acc.add(2.0 * h * std::cos(step * double(phase)));
  }
  return acc.value() / double(side_);
}

ConvolutionGrid exact_distribution(const StepLaw& law, std::int64_t n, std::int64_t window) {
  if (window == 0) window = choose_window(law, n);
  check_window(law, n, window);
  SpectralOracle oracle(law, window);
  return oracle.grid(n);
}

ConvolutionGrid exact_distribution_squaring(const StepLaw& law, std::int64_t n,
                                            std::int64_t window) {
  if (n < 1) throw DomainError("n must be >= 1");
  if (window == 0) window = choose_window(law, n);
  check_window(law, n, window);
  const int d = law.dimension;
  const std::size_t fs = full_size(d, window), hs = half_size(d, window);
  const double scale = 1.0 / double(fs);

  // convolution of two real grids through full complex spectra
  auto convolve = [&](const std::vector<double>& a, const std::vector<double>& b) {
    FftwReal in(fs);
    FftwComplex fa(hs), fb(hs);
    std::copy(a.begin(), a.end(), in.p);
    forward(d, window, in.p, fa.p);
    std::copy(b.begin(), b.end(), in.p);
    forward(d, window, in.p, fb.p);
    for (std::size_t i = 0; i < hs; ++i) {
      double re = fa.p[i][0] * fb.p[i][0] - fa.p[i][1] * fb.p[i][1];
      double im = fa.p[i][0] * fb.p[i][1] + fa.p[i][1] * fb.p[i][0];
      fa.p[i][0] = re * scale;
      fa.p[i][1] = im * scale;
    }
    std::vector<double> out(fs);
    inverse(d, window, fa.p, out.data());
    return out;
  };

  std::vector<double> base(fs), result;
  {
    FftwReal tmp(fs);
    place_pmf(law, window, tmp.p);
    std::copy(tmp.p, tmp.p + fs, base.begin());
  }
  bool have = false;
  for (std::int64_t e = n; e > 0; e >>= 1) {
    if (e & 1) {
      result = have ? convolve(result, base) : base;
      have = true;
    }
    if (e > 1) base = convolve(base, base);
  }
  ConvolutionGrid g;
  g.dimension = d;
  g.side = window;
  g.wrap_bound = wrap_bound(law, n, window);
  for (double& v : result) {
    g.min_raw = std::min(g.min_raw, v);
    if (v < 0.0) v = 0.0;
  }
  g.values = std::move(result);
  return g;
}

std::vector<ResidualRow> llt_residual_scan(const StepLaw& law,
                                           const std::vector<std::int64_t>& n_list,
                                           Convention conv) {
  KernelParams params = make_kernel_params(law.sigma2());
  const int d = law.dimension;
  const double i0 = params.gauss_norm;
  std::vector<ResidualRow> rows;
  std::int64_t prev = 0;
  for (std::int64_t n : n_list) {
    if (n < 16) throw DomainError("llt_residual_scan requires n >= 16");
    if (n <= prev) throw DomainError("n_list must be increasing");
    prev = n;
    ResidualRow row;
    row.n = n;
    row.window = choose_window(law, n);
    row.wrap_bound = wrap_bound(law, n, row.window);
    SpectralOracle oracle(law, row.window);
    row.p0 = oracle.probability(n, Cell{});
    const double scaled = std::pow(a_n(n), d) * row.p0;
    const double sign = conv == Convention::kStated ? 1.0 : -1.0;
    row.r0 = std::abs(scaled - i0);
    row.r1 = std::abs(scaled - i0 * (1.0 + sign * 0.5 * d * loglog_ratio(n)));
    row.r1_log = row.r1 * std::log(double(n));
    rows.push_back(row);
  }
  return rows;
}

double exact_second_difference(const StepLaw& law, std::int64_t n, Cell N) {
  if (n < 1) throw DomainError("n must be >= 1");
  SpectralOracle oracle(law, choose_window(law, n));
  if (law.dimension == 2) {
    ConvolutionGrid g = oracle.grid(n);
    return g.at(N) + g.at(-N) - 2.0 * g.at(Cell{});
  }
  return oracle.probability(n, N) + oracle.probability(n, -N) -
         2.0 * oracle.probability(n, Cell{});
}

double exact_coboundary(const StepLaw& law, std::int64_t n, int m) {
  if (m < 1) throw DomainError("coboundary order m must be >= 1");
  if (n - m < 16) throw DomainError("exact_coboundary requires n - m >= 16");
  SpectralOracle oracle(law, choose_window(law, n));
  Accumulator acc;
  double binom = 1.0;
  for (int k = 0; k <= m; ++k) {
    double p = oracle.probability(n - k, Cell{});
    acc.add(((k % 2 == 0) ? binom : -binom) * p);
    binom = binom * double(m - k) / double(k + 1);
  }
  return acc.value();
}

double truncated_second_moment(const ConvolutionGrid& g, std::int64_t radius) {
  Accumulator acc;
  const std::int64_t half = g.side / 2;
  auto signed_index = [&](std::int64_t i) { return i >= half ? i - g.side : i; };
  if (g.dimension == 1) {
    for (std::int64_t i = 0; i < g.side; ++i) {
      std::int64_t k = signed_index(i);
      if (std::abs(k) <= radius) acc.add(g.values[std::size_t(i)] * double(k * k));
    }
  } else {
    for (std::int64_t i = 0; i < g.side; ++i) {
      std::int64_t kx = signed_index(i);
      if (std::abs(kx) > radius) continue;
      for (std::int64_t j = 0; j < g.side; ++j) {
        std::int64_t ky = signed_index(j);
        if (std::abs(ky) > radius) continue;
        acc.add(g.values[std::size_t(i * g.side + j)] * double(kx * kx + ky * ky));
      }
    }
  }
  return acc.value();
}

}  // namespace lorentz
