#include <cmath>

#include "doctest.h"
#include "lorentz/error.hpp"
#include "lorentz/kernels.hpp"
#include "support.hpp"

using namespace lorentz;
using support::kPi;

namespace {

KernelParams scalar_params(double s, int d) { return make_kernel_params(SigmaMatrix::scalar(s, d)); }

KernelParams generic_params() {
  SigmaMatrix s;
  s.a[0][0] = 0.7;
  s.a[0][1] = s.a[1][0] = 0.2;
  s.a[1][1] = 0.45;
  return make_kernel_params(s);
}

}  // namespace

TEST_CASE("a_n") {
  CHECK(a_n(100) == doctest::Approx(21.459660).epsilon(1e-7));
  CHECK(a_n(3) == doctest::Approx(1.815444).epsilon(1e-6));
  CHECK(a_n(2) == doctest::Approx(1.177410).epsilon(1e-6));
  CHECK_THROWS_AS(a_n(1), DomainError);
  CHECK_THROWS_AS(loglog_ratio(2), DomainError);
  CHECK(loglog_ratio(1000) == doctest::Approx(std::log(std::log(1000.0)) / std::log(1000.0)));
}

TEST_CASE("kernel_I matches Fourier quadrature") {
  auto p = generic_params();
  const double A[2][2] = {{0.7, 0.2}, {0.2, 0.45}};
  const Cell Ns[] = {{0, 0}, {1, 0}, {1, 1}};
  const double xs[] = {-1.2, -0.5, 0.0, 0.4, 1.1};
  int checked = 0;
  for (int l1 = 0; l1 <= 2; ++l1)
    for (int l2 = 0; l2 <= 2; ++l2)
      for (Cell N : Ns)
        for (double x0 : xs)
          for (double x1 : xs) {
            double got = kernel_I(l1, l2, N, p, {x0, x1});
            double ref = support::fourier_kernel(l1, l2, N, A, 2, {x0, x1}, 1e-11);
            REQUIRE(std::abs(got - ref) <= 1e-6 * (1.0 + std::abs(ref)));
            ++checked;
          }
  CHECK(checked > 150);

  auto q = scalar_params(0.3, 1);
  const double A1[2][2] = {{0.3, 0}, {0, 0}};
  for (int l1 = 0; l1 <= 3; ++l1)
    for (int l2 = 0; l2 <= 3; ++l2)
      for (double x0 : xs) {
        double got = kernel_I(l1, l2, {1, 0}, q, {x0, 0.0});
        double ref = support::fourier_kernel(l1, l2, {1, 0}, A1, 1, {x0, 0.0}, 1e-12);
        REQUIRE(std::abs(got - ref) <= 1e-6 * (1.0 + std::abs(ref)));
      }
}

TEST_CASE("kernel parity and normalization") {
  auto p = generic_params();
  const Point x{0.3, -0.8}, mx{-0.3, 0.8};
  for (int l1 = 0; l1 <= 3; ++l1)
    for (int l2 = 0; l2 <= 3; ++l2) {
      double a = kernel_I(l1, l2, {1, 1}, p, x), b = kernel_I(l1, l2, {1, 1}, p, mx);
      CHECK(a == doctest::Approx((l1 % 2 ? -1.0 : 1.0) * b).epsilon(1e-12));
    }
  // The density integrates to one; Riemann sum on a fine grid.
  double sum = 0.0;
  const double h = 0.02;
  for (double u = -6; u <= 6; u += h)
    for (double v = -6; v <= 6; v += h) sum += I0(p, {u, v});
  CHECK(sum * h * h == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("exact identities at the origin") {
  auto p = scalar_params(0.0159155, 2);
  const Point zero{0, 0};
  CHECK(I0(p, zero) == doctest::Approx(10.0).epsilon(1e-5));
  CHECK(I0(p, zero) == doctest::Approx(1.0 / (2 * kPi * 0.0159155)).epsilon(1e-14));
  for (auto v : I1(p, zero)) CHECK(std::abs(v) == 0.0);
  for (auto v : I3(p, zero)) CHECK(std::abs(v) == 0.0);
  CHECK(I2(p, zero) == doctest::Approx(-2.0 * I0(p, zero)).epsilon(1e-14));
  CHECK(kernel_I(0, 1, {}, p, zero) == doctest::Approx(I2(p, zero)).epsilon(1e-14));

  auto g = generic_params();
  const Point x{0.4, -0.25};
  CHECK(kernel_I(0, 1, {}, g, x) == doctest::Approx(I2(g, x)).epsilon(1e-13));
  CHECK(kernel_I(0, 0, {}, g, x) == doctest::Approx(I0(g, x)).epsilon(1e-14));
  // I1 is the Fourier image of (-i u) times the density, so component j is
  // the l1 = 1 kernel along e_j multiplied by i.
  auto v1 = I1(g, x);
  CHECK(v1[0].imag() == doctest::Approx(kernel_I(1, 0, {1, 0}, g, x)).epsilon(1e-13));
  CHECK(v1[1].imag() == doctest::Approx(kernel_I(1, 0, {0, 1}, g, x)).epsilon(1e-13));
  auto v3 = I3(g, x);
  CHECK(v3[0].imag() == doctest::Approx(-kernel_I(1, 1, {1, 0}, g, x)).epsilon(1e-12));
}

TEST_CASE("Laplacian powers of the Gaussian at zero") {
  CHECK(gaussian_laplacian_power(0, 2) == 1.0);
  CHECK(gaussian_laplacian_power(1, 2) == -2.0);
  CHECK(gaussian_laplacian_power(2, 2) == 8.0);
  CHECK(gaussian_laplacian_power(1, 1) == -1.0);
  CHECK(gaussian_laplacian_power(2, 1) == 3.0);
  CHECK(gaussian_laplacian_power(3, 1) == -15.0);
  CHECK(gaussian_laplacian_power(3, 2) == -48.0);
  CHECK_THROWS_AS(gaussian_laplacian_power(-1, 2), DomainError);
}

TEST_CASE("llt predictor values") {
  auto p = scalar_params(0.0159155, 2);
  ObservableMoments unit;
  const double n = 1e4, ln = std::log(n), eps = std::log(ln) / ln;
  const double g = 1.0 / (2 * kPi * 0.0159155);

  auto st = llt_predict(10000, {}, p, unit, 0, Convention::kStated);
  CHECK(st.total.real() == doctest::Approx(g * (1 + eps) / (n * ln)).epsilon(1e-12));
  CHECK(st.total.real() == doctest::Approx(1.34750e-4).epsilon(3e-4));
  auto dv = llt_predict(10000, {}, p, unit, 0, Convention::kDerived);
  CHECK(dv.total.real() == doctest::Approx(g * (1 - eps) / (n * ln)).epsilon(1e-12));
  CHECK(dv.leading.real() == doctest::Approx(st.leading.real()).epsilon(1e-15));
  CHECK(dv.error_scale == doctest::Approx(std::pow(n * ln, -1.5) / ln).epsilon(1e-12));

  auto m = mixing_predict(500, p, 1.0, 1.0, Convention::kStated);
  const double l5 = std::log(500.0);
  CHECK(m.real() == doctest::Approx(g * (1 + std::log(l5) / l5) / (500 * l5)).epsilon(1e-12));
  CHECK(m.real() == doctest::Approx(4.16515e-3).epsilon(3e-4));

  CHECK_THROWS_AS(llt_predict(10000, {}, p, unit, 2), UnsupportedOrderError);
  CHECK_THROWS_AS(llt_predict(2, {}, p, unit, 0), DomainError);
  CHECK_THROWS_AS(make_kernel_params(SigmaMatrix::scalar(0.0, 2)), DegenerateSigmaError);
}

TEST_CASE("mixing equals llt at N = 0 with unit moments") {
  auto p = generic_params();
  ObservableMoments unit;
  for (std::int64_t n : {125, 1000, 1 << 18})
    for (auto c : {Convention::kStated, Convention::kDerived}) {
      complex a = mixing_predict(n, p, 1.0, 1.0, c);
      complex b = llt_predict(n, {}, p, unit, 0, c).total;
      CHECK(a.real() == doctest::Approx(b.real()).epsilon(1e-14));
    }
}

TEST_CASE("predictors are bilinear in the observable integrals") {
  auto p = generic_params();
  const complex a{0.4, -0.3}, b{1.7, 0.2};
  complex m1 = mixing_predict(800, p, a, b), m0 = mixing_predict(800, p, 1.0, 1.0);
  CHECK(std::abs(m1 - a * b * m0) <= 1e-15 * std::abs(m1));
  complex c1 = coboundary_predict(800, 2, p, a, b), c0 = coboundary_predict(800, 2, p, 1.0, 1.0);
  CHECK(std::abs(c1 - a * b * c0) <= 1e-15 * std::abs(c1));
  complex s1 = second_difference_predict(800, {1, 0}, p, a, b);
  complex s0 = second_difference_predict(800, {1, 0}, p, 1.0, 1.0);
  CHECK(std::abs(s1 - a * b * s0) <= 1e-15 * std::abs(s1));
}

TEST_CASE("second difference scaling and sign") {
  auto p = scalar_params(0.3, 1);
  const std::int64_t n = 1 << 18;
  double one = second_difference_predict(n, {1, 0}, p, 1.0, 1.0).real();
  double two = second_difference_predict(n, {2, 0}, p, 1.0, 1.0).real();
  CHECK(one < 0.0);
  CHECK(two / one == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(second_difference_predict(n, {-1, 0}, p, 1.0, 1.0).real() == doctest::Approx(one));
  CHECK_THROWS_AS(second_difference_predict(n, {0, 0}, p, 1.0, 1.0), ZeroDisplacementError);
  // dimension one ignores the second coordinate
  CHECK_THROWS_AS(second_difference_predict(n, {0, 3}, p, 1.0, 1.0), ZeroDisplacementError);

  // leading behaviour: a_n^3 |D| -> 1 / (A sqrt(2 pi A))
  const double lead = 1.0 / (0.3 * std::sqrt(2 * kPi * 0.3));
  double an = a_n(n);
  double scaled = -one * an * an * an;
  CHECK(scaled / lead == doctest::Approx(1.0 - 1.5 * loglog_ratio(n)).epsilon(1e-12));
}

TEST_CASE("coboundary predictor") {
  auto p = scalar_params(0.3, 1);
  const std::int64_t n = 1 << 18;
  double c1 = coboundary_predict(n, 1, p, 1.0, 1.0).real();
  CHECK(c1 < 0.0);  // the correlation decreases in n
  const double ln = std::log(double(n)), an = a_n(n);
  const double g0 = 1.0 / std::sqrt(2 * kPi * 0.3);
  // I_{0,1}(0) = -g0, I_{0,2}(0) = 3 g0
  double expect = (ln + std::log(ln)) / (2 * an * an * an) * (-g0 + 3 * g0 * loglog_ratio(n) / 2);
  CHECK(c1 == doctest::Approx(expect).epsilon(1e-12));
  CHECK_THROWS_AS(coboundary_predict(n, 0, p, 1.0, 1.0), DomainError);
}

TEST_CASE("unsupported kernel orders") {
  auto p = generic_params();
  CHECK_THROWS_AS(kernel_I(4, 0, {1, 0}, p, {0, 0}), UnsupportedOrderError);
  CHECK_THROWS_AS(kernel_I(0, 5, {1, 0}, p, {0, 0}), UnsupportedOrderError);
  CHECK_THROWS_AS(kernel_I(-1, 0, {1, 0}, p, {0, 0}), UnsupportedOrderError);
  CHECK_THROWS_AS(parse_convention("other"), DomainError);
  CHECK(parse_convention("stated") == Convention::kStated);
}
