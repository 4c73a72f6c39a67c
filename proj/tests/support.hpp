// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lorentz/geometry.hpp"
#include "lorentz/kernels.hpp"

namespace support {

inline constexpr double kPi = 3.14159265358979323846;

inline lorentz::ScattererConfig square(double r, int dimension = 2) {
  return lorentz::build_config({{{0.0, 0.0}, r}}, dimension);
}

struct BruteHit {
  int obstacle = -1;
  lorentz::Cell cell;
  double t = std::numeric_limits<double>::infinity();
};

// Smallest t > t_min with |start + t v - (c + cell)| = r over every translate
// whose cell lies in [-R, R]^2 around the start.
inline BruteHit brute_force_hit(const lorentz::ScattererConfig& cfg, lorentz::Vec2 start,
                                lorentz::Vec2 v, int R, double t_min = 1e-9) {
  BruteHit best;
  const auto cx = std::int64_t(std::floor(start.x)), cy = std::int64_t(std::floor(start.y));
  for (std::int64_t i = cx - R; i <= cx + R; ++i)
    for (std::int64_t j = cy - R; j <= cy + R; ++j)
      for (int k = 0; k < int(cfg.disks.size()); ++k) {
        const auto& d = cfg.disks[std::size_t(k)];
        double px = start.x - (d.center.x + double(i));
        double py = start.y - (d.center.y + double(j));
        double b = px * v.x + py * v.y;
        double c = px * px + py * py - d.radius * d.radius;
        double disc = b * b - c;
        if (disc < 0) continue;
        double t = -b - std::sqrt(disc);
        if (t > t_min && t < best.t) best = {k, {i, j}, t};
      }
  return best;
}

// mu-bar measure of one-step displacements (N, j), |j| <= jmax, for a single
// disk of radius r per cell. Integrates the invariant line measure dp da over
// oriented lines leaving the disk at the origin (midpoint rule, na x np nodes).
inline double first_hit_measure(double r, std::int64_t N, std::int64_t jmax, int na = 3000,
                                int np = 6000) {
  std::vector<std::pair<double, double>> centers;
  for (std::int64_t i = -1; i <= N + 2; ++i)
    for (std::int64_t j = -jmax - 2; j <= jmax + 2; ++j)
      if (i != 0 || j != 0) centers.push_back({double(i), double(j)});
  const double amax = 2.5 / double(N - 1);
  const double da = 2 * amax / na, dp = 2 * r / np;
  std::uint64_t hits = 0;
  for (int ia = 0; ia < na; ++ia) {
    const double a = -amax + (ia + 0.5) * da;
    const double vx = std::cos(a), vy = std::sin(a);
    for (int ip = 0; ip < np; ++ip) {
      const double p = -r + (ip + 0.5) * dp;
      const double s = std::sqrt(r * r - p * p);
      const double x = -p * vy + s * vx, y = p * vx + s * vy;
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double px = x - centers[k].first, py = y - centers[k].second;
        const double b = px * vx + py * vy;
        const double disc = b * b - (px * px + py * py - r * r);
        if (disc <= 0) continue;
        const double t = -b - std::sqrt(disc);
        if (t > 1e-12 && t < best) best = t, arg = k;
      }
      hits += best < std::numeric_limits<double>::infinity() &&
              centers[arg].first == double(N) && std::abs(centers[arg].second) <= double(jmax);
    }
  }
  return double(hits) * da * dp / (4 * kPi * r);
}

// Asymptotic Kolmogorov distribution tail P(K > lambda).
inline double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

// One-sample KS p-value against a continuous cdf.
template <class Cdf>
double ks_pvalue(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
  }
  const double sn = std::sqrt(n);
  return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

// (2 pi)^-d times the integral over R^d of
//   (-i u.N)^l1 (-A u.u)^l2 exp(-i u.x) exp(-A u.u / 2) du
// by nested adaptive Gauss-Kronrod after the substitution u = L^-T v, A = L L^T.
inline double fourier_kernel(int l1, int l2, lorentz::Cell N, const double A[2][2], int d,
                             lorentz::Point x, double tol = 1e-12) {
  using boost::math::quadrature::gauss_kronrod;
  using cplx = std::complex<double>;
  const double Nx = double(N.x), Ny = d == 2 ? double(N.y) : 0.0;
  const cplx ipow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};  // (-i)^k
  const cplx pre = ipow[l1 % 4];
  const double cut = 14.0;
  if (d == 1) {
    const double s = 1.0 / std::sqrt(A[0][0]);
    auto f = [&](double v) {
      double u = v * s;
      double q = v * v;
      cplx val = pre * std::pow(u * Nx, l1) * std::pow(-q, l2) * std::exp(-0.5 * q) *
                 std::exp(cplx(0.0, -u * x[0]));
      return val.real();
    };
    double r = gauss_kronrod<double, 61>::integrate(f, -cut, cut, 20, tol);
    return r * s / (2.0 * kPi);
  }
  // A^{-1} = M^T M with M = L^{-1}; u = M^T v, du = det M dv, A u.u = |v|^2.
  const double l11 = std::sqrt(A[0][0]);
  const double l21 = A[1][0] / l11;
  const double l22 = std::sqrt(A[1][1] - l21 * l21);
  const double m11 = 1.0 / l11, m22 = 1.0 / l22, m21 = -l21 / (l11 * l22);
  const double detM = m11 * m22;
  auto inner = [&](double v1) {
    auto g = [&](double v2) {
      double u1 = m11 * v1 + m21 * v2;
      double u2 = m22 * v2;
      double q = v1 * v1 + v2 * v2;
      cplx val = pre * std::pow(u1 * Nx + u2 * Ny, l1) * std::pow(-q, l2) *
                 std::exp(-0.5 * q) * std::exp(cplx(0.0, -(u1 * x[0] + u2 * x[1])));
      return val.real();
    };
    return gauss_kronrod<double, 61>::integrate(g, -cut, cut, 20, tol);
  };
  double r = gauss_kronrod<double, 61>::integrate(inner, -cut, cut, 20, tol);
  return r * detM / (4.0 * kPi * kPi);
}

}  // namespace support
