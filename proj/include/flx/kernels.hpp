#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <numbers>

#include "flx/types.hpp"

namespace flx {

// Argument above which Bessel functions use the Hankel asymptotic expansion.
// Below it the ascending series is summed in long double; both branches agree
// to ~1e-13 at the seam.
inline constexpr double kHankelSwitch = 16.0;

template <std::floating_point T>
struct BesselPair {
  T j;
  T y;
};

// Ascending series for J_0, Y_0. Accurate for x up to ~20 when T = long double.
template <std::floating_point T>
BesselPair<T> bessel0_series(T x) {
  const T q = x * x / 4;
  const T egamma = std::numbers::egamma_v<T>;
  T term = 1;
  T harmonic = 0;
  T j = 1;
  T ysum = 0;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (T(k) * T(k));
    harmonic += T(1) / T(k);
    j += term;
    ysum -= harmonic * term;  // (-1)^{k+1} H_k q^k / (k!)^2
    if (std::abs(term) * (1 + harmonic) < std::numeric_limits<T>::epsilon() * T(1e-3)) break;
  }
  const T y = T(2) / std::numbers::pi_v<T> * ((std::log(x / 2) + egamma) * j + ysum);
  return {j, y};
}

// Ascending series for J_1, Y_1.
template <std::floating_point T>
BesselPair<T> bessel1_series(T x) {
  const T q = x * x / 4;
  const T egamma = std::numbers::egamma_v<T>;
  T term = x / 2;  // (x/2)^{2k+1} (-1)^k / (k!(k+1)!)
  T j = term;
  // psi(k+1) + psi(k+2) = H_k + H_{k+1} - 2 gamma
  T hk = 0;
  T ysum = (hk + T(1) - 2 * egamma) * term;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (T(k) * T(k + 1));
    hk += T(1) / T(k);
    j += term;
    ysum += (2 * hk + T(1) / T(k + 1) - 2 * egamma) * term;
    if (std::abs(term) * (2 + 2 * hk) < std::numeric_limits<T>::epsilon() * T(1e-3)) break;
  }
  const T pi = std::numbers::pi_v<T>;
  const T y = -T(2) / (pi * x) + T(2) / pi * std::log(x / 2) * j - ysum / pi;
  return {j, y};
}

// Hankel asymptotic expansion of H_nu^(1), nu in {0, 1}, optimally truncated.
template <std::floating_point T>
BesselPair<T> bessel_asymptotic(int nu, T x) {
  using C = std::complex<T>;
  const T mu = T(4 * nu * nu);
  C sum(1, 0);
  C ik(1, 0);
  T a = 1;
  T last = 1;
  for (int k = 1; k < 120; ++k) {
    a *= (mu - T((2 * k - 1) * (2 * k - 1))) / (T(k) * 8 * x);
    if (std::abs(a) > last) break;
    ik *= C(0, 1);
    sum += ik * a;
    last = std::abs(a);
    if (last < std::numeric_limits<T>::epsilon() * T(1e-3)) break;
  }
  const T pi = std::numbers::pi_v<T>;
  const T phase = x - T(nu) * pi / 2 - pi / 4;
  const C h = std::sqrt(T(2) / (pi * x)) * std::polar(T(1), phase) * sum;
  return {h.real(), h.imag()};
}

BesselPair<double> bessel0(double x);
BesselPair<double> bessel1(double x);

inline std::complex<double> hankel1_0(double x) {
  const auto b = bessel0(x);
  return {b.j, b.y};
}
inline std::complex<double> hankel1_1(double x) {
  const auto b = bessel1(x);
  return {b.j, b.y};
}

struct KernelEval {
  cdouble value;
  CPoint gradient = CPoint::Zero();  // with respect to y
  bool has_gradient = false;
};

// Outgoing Helmholtz fundamental solution e^{i kappa r}/(4 pi r). kappa is
// the effective background wavenumber k sqrt(b0/a0); kappa = 0 gives Laplace.
KernelEval green3d(double kappa, const Point& x, const Point& y, bool with_gradient = false);

// 2D outgoing fundamental solution (i/4) H_0^(1)(kappa r), kappa > 0.
KernelEval green2d(double kappa, const Point& x, const Point& y, bool with_gradient = false);

// Laplace kernels.
double green0_3d(const Point& x, const Point& y);
double green0_2d(const Point& x, const Point& y);

// Near-field constant of the 2D kernel:
// Phi_k = Phi_0 + E + O(r^2 log r), E = i/4 - (log(kappa/2) + gamma_Euler)/(2 pi).
cdouble constant_E(double kappa);

// Smooth parts used on self-blocks, evaluated without cancellation.
// 3D: (e^{i kappa r} - 1)/(4 pi r), r >= 0.
cdouble green3d_remainder(double kappa, double r);
// 2D: Phi_kappa - Phi_0 - E, r >= 0 (vanishes at r = 0).
cdouble green2d_remainder(double kappa, double r);

// Dimension dispatch on the Helmholtz kernel value.
cdouble helmholtz(int dim, double kappa, const Point& x, const Point& y);

// Per-thread call counters, used to check that 2D and 3D code paths stay apart.
struct KernelCounters {
  std::uint64_t green2d = 0;
  std::uint64_t green3d = 0;
};
KernelCounters kernel_counters();
void reset_kernel_counters();

}  // namespace flx
