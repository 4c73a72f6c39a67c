#include "lorentz/kernels.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "lorentz/error.hpp"

namespace lorentz {

namespace {

constexpr double kPi = std::numbers::pi;

// Coefficients c[a][k] of sum c s^a q^k.
using Poly2 = std::vector<std::vector<double>>;

// Applies div A grad to P(q) exp(-q/2); returns the new P.
std::vector<double> apply_laplacian(const std::vector<double>& P, int d) {
  std::vector<double> out(P.size() + 1, 0.0);
  for (std::size_t k = 0; k < P.size(); ++k) {
    double c = P[k];
    if (c == 0.0) continue;
    double kk = double(k);
    if (k >= 1) out[k - 1] += 4.0 * kk * (kk - 1.0) * c + 2.0 * d * kk * c;
    out[k] += -4.0 * kk * c - d * c;
    out[k + 1] += c;
  }
  return out;
}

// Applies N . grad to sum c s^a q^k exp(-q/2), with m = N^T A^{-1} N.
Poly2 apply_directional(const Poly2& P, double m) {
  Poly2 out(P.size() + 1, std::vector<double>(P.empty() ? 1 : P[0].size(), 0.0));
  for (std::size_t a = 0; a < P.size(); ++a) {
    for (std::size_t k = 0; k < P[a].size(); ++k) {
      double c = P[a][k];
      if (c == 0.0) continue;
      if (a >= 1) out[a - 1][k] += double(a) * m * c;
      if (k >= 1) out[a + 1][k - 1] += 2.0 * double(k) * c;
      out[a + 1][k] -= c;
    }
  }
  return out;
}

void check_n(std::int64_t n, std::int64_t min_n) {
  if (n < min_n)
    throw DomainError("n must be >= " + std::to_string(min_n) + ", got " + std::to_string(n));
}

Point lattice_point(Cell N, double scale) { return {double(N.x) * scale, double(N.y) * scale}; }

}  // namespace

const char* convention_name(Convention c) {
  return c == Convention::kStated ? "stated" : "derived";
}

Convention parse_convention(const std::string& s) {
  if (s == "stated") return Convention::kStated;
  if (s == "derived") return Convention::kDerived;
  throw DomainError("unknown convention '" + s + "' (expected stated or derived)");
}

KernelParams make_kernel_params(const SigmaMatrix& s) {
  KernelParams p;
  p.sigma2 = s;
  p.dimension = s.dimension;
  if (!s.nondegenerate()) throw DegenerateSigmaError("Sigma^2 is degenerate (det <= 0)");
  if (s.dimension == 1) {
    p.det = s.a[0][0];
    p.inv[0][0] = 1.0 / s.a[0][0];
    p.gauss_norm = 1.0 / std::sqrt(2.0 * kPi * p.det);
  } else {
    p.det = s.det();
    p.inv[0][0] = s.a[1][1] / p.det;
    p.inv[1][1] = s.a[0][0] / p.det;
    p.inv[0][1] = -s.a[0][1] / p.det;
    p.inv[1][0] = -s.a[1][0] / p.det;
    p.gauss_norm = 1.0 / std::sqrt(4.0 * kPi * kPi * p.det);
  }
  return p;
}

double a_n(std::int64_t n) {
  check_n(n, 2);
  double x = double(n);
  return std::sqrt(x * std::log(x));
}

double loglog_ratio(std::int64_t n) {
  check_n(n, 3);
  double l = std::log(double(n));
  return std::log(l) / l;
}

double inv_form(const KernelParams& p, Point x, Point y) {
  if (p.dimension == 1) return x[0] * p.inv[0][0] * y[0];
  return x[0] * (p.inv[0][0] * y[0] + p.inv[0][1] * y[1]) +
         x[1] * (p.inv[1][0] * y[0] + p.inv[1][1] * y[1]);
}

double kernel_I(int l1, int l2, Cell N, const KernelParams& p, Point x) {
  if (l1 < 0 || l1 > 3 || l2 < 0 || l2 > 4)
    throw UnsupportedOrderError("kernel order (" + std::to_string(l1) + "," +
                                std::to_string(l2) + ") not implemented");
  const int d = p.dimension;
  Point n = {double(N.x), d == 1 ? 0.0 : double(N.y)};
  if (d == 1) x[1] = 0.0;
  std::vector<double> radial{1.0};
  for (int i = 0; i < l2; ++i) radial = apply_laplacian(radial, d);
  Poly2 poly(1, radial);
  poly[0].resize(radial.size() + l1, 0.0);
  const double m = inv_form(p, n, n);
  for (int i = 0; i < l1; ++i) poly = apply_directional(poly, m);

  const double q = inv_form(p, x, x);
  const double s = inv_form(p, n, x);
  double acc = 0.0;
  double sa = 1.0;
  for (std::size_t a = 0; a < poly.size(); ++a) {
    double qk = 1.0, row = 0.0;
    for (std::size_t k = 0; k < poly[a].size(); ++k) {
      row += poly[a][k] * qk;
      qk *= q;
    }
    acc += row * sa;
    sa *= s;
  }
  return acc * p.gauss_norm * std::exp(-0.5 * q);
}

double I0(const KernelParams& p, Point X) {
  if (p.dimension == 1) X[1] = 0.0;
  return p.gauss_norm * std::exp(-0.5 * inv_form(p, X, X));
}

std::array<complex, 2> I1(const KernelParams& p, Point X) {
  if (p.dimension == 1) X[1] = 0.0;
  double g = I0(p, X);
  Point ax = {p.inv[0][0] * X[0] + p.inv[0][1] * X[1], p.inv[1][0] * X[0] + p.inv[1][1] * X[1]};
  return {complex{0.0, -ax[0] * g}, complex{0.0, -ax[1] * g}};
}

double I2(const KernelParams& p, Point X) {
  if (p.dimension == 1) X[1] = 0.0;
  return (inv_form(p, X, X) - p.dimension) * I0(p, X);
}

std::array<complex, 2> I3(const KernelParams& p, Point X) {
  if (p.dimension == 1) X[1] = 0.0;
  double f = p.dimension + 2 - inv_form(p, X, X);
  auto v = I1(p, X);
  return {v[0] * f, v[1] * f};
}

double gaussian_laplacian_power(int m, int d) {
  if (m < 0) throw DomainError("negative Laplacian power");
  std::vector<double> radial{1.0};
  for (int i = 0; i < m; ++i) radial = apply_laplacian(radial, d);
  return radial[0];
}

LLTPrediction llt_predict(std::int64_t n, Cell N, const KernelParams& p,
                          const ObservableMoments& mo, int order, Convention conv) {
  check_n(n, 3);
  if (order != 0 && order != 1) throw UnsupportedOrderError("llt order must be 0 or 1");
  const int d = p.dimension;
  if (d == 1) N.y = 0;
  const double an = a_n(n);
  const double eps = loglog_ratio(n);
  const Point X = lattice_point(N, 1.0 / an);
  const double q = inv_form(p, X, X);
  const double g = I0(p, X) / std::pow(an, d);

  LLTPrediction r;
  r.leading = mo.mean_phi * mo.mean_psi * g;
  const double sign = conv == Convention::kStated ? -1.0 : 1.0;
  r.loglog_correction = r.leading * (sign * (q - d) * eps / 2.0);
  if (order == 1) {
    Point n_pt = lattice_point(N, 1.0);
    complex ak = complex{p.inv[0][0] * n_pt[0] + p.inv[0][1] * n_pt[1]} * mo.K[0];
    if (d == 2) ak += complex{p.inv[1][0] * n_pt[0] + p.inv[1][1] * n_pt[1]} * mo.K[1];
    r.first_order = g * ak / (an * an) * (1.0 - 0.5 * (d + 2 - q) * eps);
  }
  r.total = r.leading + r.loglog_correction + r.first_order;
  r.error_scale = std::pow(an, -d - 1) / std::log(double(n));
  return r;
}

complex mixing_predict(std::int64_t n, const KernelParams& p, complex int_phi, complex int_psi,
                       Convention conv) {
  check_n(n, 3);
  const int d = p.dimension;
  const double sign = conv == Convention::kStated ? 1.0 : -1.0;
  double f = (1.0 + sign * 0.5 * d * loglog_ratio(n)) * p.gauss_norm / std::pow(a_n(n), d);
  return int_phi * int_psi * f;
}

complex coboundary_predict(std::int64_t n, int m, const KernelParams& p, complex int_phi,
                           complex int_psi, Convention conv) {
  check_n(n, 3);
  if (m < 1) throw DomainError("coboundary order m must be >= 1");
  const int d = p.dimension;
  const double ln = std::log(double(n));
  const double eps = loglog_ratio(n);
  const double sign = conv == Convention::kStated ? -1.0 : 1.0;
  const Point zero = {0.0, 0.0};
  double bracket = kernel_I(0, m, Cell{}, p, zero) +
                   sign * kernel_I(0, m + 1, Cell{}, p, zero) * eps / 2.0;
  double scale = std::pow(ln + std::log(ln), m) / (std::pow(2.0, m) * std::pow(a_n(n), d + 2 * m));
  return int_phi * int_psi * (scale * bracket);
}

complex second_difference_predict(std::int64_t n, Cell N, const KernelParams& p, complex int_phi,
                                  complex int_psi, Convention conv) {
  check_n(n, 3);
  const int d = p.dimension;
  if (d == 1) N.y = 0;
  if (N.x == 0 && N.y == 0) throw ZeroDisplacementError("second difference needs N != 0");
  const Point np = lattice_point(N, 1.0);
  const double sign = conv == Convention::kStated ? 1.0 : -1.0;
  double f = -inv_form(p, np, np) * p.gauss_norm / std::pow(a_n(n), d + 2) *
             (1.0 + sign * (d + 2) * loglog_ratio(n) / 2.0);
  return int_phi * int_psi * f;
}

}  // namespace lorentz
