#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>

#include "lorentz/corridors.hpp"

namespace lorentz {

using complex = std::complex<double>;
using Point = std::array<double, 2>;  // second coordinate ignored when d = 1

// Sign convention for the log log n / log n corrections.
// kStated uses the opposite sign to kDerived; kDerived follows the
// defining Fourier integrals (I_{0,1} = (A^{-1}x.x - d) I_0 is the image of
// (-Au.u), not of (Au.u)).
enum class Convention { kStated, kDerived };

const char* convention_name(Convention c);
Convention parse_convention(const std::string& s);

struct KernelParams {
  SigmaMatrix sigma2;
  int dimension = 2;
  double inv[2][2] = {{0, 0}, {0, 0}};
  double det = 0.0;
  double gauss_norm = 0.0;  // 1 / sqrt((2 pi)^d det A)
};

// Throws DegenerateSigmaError when det <= 0.
KernelParams make_kernel_params(const SigmaMatrix& sigma2);

double a_n(std::int64_t n);
// log log n / log n, natural logarithms; requires n >= 3.
double loglog_ratio(std::int64_t n);

// x^T A^{-1} y
double inv_form(const KernelParams& p, Point x, Point y);

// (N . grad)^l1 (div A grad)^l2 of the N(0, A) density at x.
// Supports 0 <= l1 <= 3, 0 <= l2 <= 4.
double kernel_I(int l1, int l2, Cell N, const KernelParams& p, Point x);

double I0(const KernelParams& p, Point X);
std::array<complex, 2> I1(const KernelParams& p, Point X);
double I2(const KernelParams& p, Point X);
std::array<complex, 2> I3(const KernelParams& p, Point X);

// m-th power of the Laplacian of exp(-|x|^2/2) at 0 in dimension d.
double gaussian_laplacian_power(int m, int d);

struct ObservableMoments {
  complex mean_phi{1.0, 0.0};
  complex mean_psi{1.0, 0.0};
  std::array<complex, 2> K{complex{0.0}, complex{0.0}};
};

struct LLTPrediction {
  complex total;
  complex leading;
  complex loglog_correction;
  complex first_order;
  double error_scale = 0.0;
};

LLTPrediction llt_predict(std::int64_t n, Cell N, const KernelParams& p,
                          const ObservableMoments& moments, int order,
                          Convention conv = Convention::kDerived);

complex mixing_predict(std::int64_t n, const KernelParams& p, complex int_phi, complex int_psi,
                       Convention conv = Convention::kDerived);

// Backward m-th difference in n of the correlation.
complex coboundary_predict(std::int64_t n, int m, const KernelParams& p, complex int_phi,
                           complex int_psi, Convention conv = Convention::kDerived);

complex second_difference_predict(std::int64_t n, Cell N, const KernelParams& p, complex int_phi,
                                  complex int_psi, Convention conv = Convention::kDerived);

}  // namespace lorentz
