#include "flx/kernels.hpp"

#include <cmath>

namespace flx {
namespace {

thread_local KernelCounters tl_counters;

constexpr double kInv4Pi = 1.0 / (4.0 * kPi);
constexpr double kInv2Pi = 1.0 / (2.0 * kPi);

}  // namespace

BesselPair<double> bessel0(double x) {
  if (x < kHankelSwitch) {
    const auto b = bessel0_series<long double>(x);
    return {static_cast<double>(b.j), static_cast<double>(b.y)};
  }
  return bessel_asymptotic<double>(0, x);
}

BesselPair<double> bessel1(double x) {
  if (x < kHankelSwitch) {
    const auto b = bessel1_series<long double>(x);
    return {static_cast<double>(b.j), static_cast<double>(b.y)};
  }
  return bessel_asymptotic<double>(1, x);
}

KernelEval green3d(double kappa, const Point& x, const Point& y, bool with_gradient) {
  ++tl_counters.green3d;
  const Point d = y - x;
  const double r = d.norm();
  if (r == 0.0) throw DomainError("green3d: coincident points");
  KernelEval out;
  out.value = std::polar(kInv4Pi / r, kappa * r);
  if (with_gradient) {
    const cdouble radial = out.value * cdouble(-1.0 / r, kappa);
    out.gradient = (radial / r) * d.cast<cdouble>();
    out.has_gradient = true;
  }
  return out;
}

KernelEval green2d(double kappa, const Point& x, const Point& y, bool with_gradient) {
  ++tl_counters.green2d;
  if (!(kappa > 0.0)) throw DomainError("green2d: wavenumber must be positive");
  const Point d = y - x;
  const double r = d.norm();
  if (r == 0.0) throw DomainError("green2d: coincident points");
  KernelEval out;
  out.value = cdouble(0.0, 0.25) * hankel1_0(kappa * r);
  if (with_gradient) {
    const cdouble radial = cdouble(0.0, -0.25) * kappa * hankel1_1(kappa * r);
    out.gradient = (radial / r) * d.cast<cdouble>();
    out.has_gradient = true;
  }
  return out;
}

double green0_3d(const Point& x, const Point& y) {
  const double r = (x - y).norm();
  if (r == 0.0) throw DomainError("green0_3d: coincident points");
  return kInv4Pi / r;
}

double green0_2d(const Point& x, const Point& y) {
  const double r = (x - y).norm();
  if (r == 0.0) throw DomainError("green0_2d: coincident points");
  return -kInv2Pi * std::log(r);
}

cdouble constant_E(double kappa) {
  if (!(kappa > 0.0)) throw DomainError("constant_E: wavenumber must be positive");
  return {-kInv2Pi * (std::log(kappa / 2.0) + std::numbers::egamma), 0.25};
}

cdouble green3d_remainder(double kappa, double r) {
  if (r == 0.0) return {0.0, kappa * kInv4Pi};
  const double z = kappa * r;
  const double s = std::sin(z / 2.0);
  return cdouble(-2.0 * s * s, std::sin(z)) * (kInv4Pi / r);
}

cdouble green2d_remainder(double kappa, double r) {
  if (r == 0.0) return {0.0, 0.0};
  const double z = kappa * r;
  if (z >= kHankelSwitch) {
    return cdouble(0.0, 0.25) * hankel1_0(z) + kInv2Pi * std::log(r) - constant_E(kappa);
  }
  // Expand (i/4)H_0 = (i/4)J_0 - Y_0/4 and cancel the log and constant
  // terms analytically; what is left starts at O(z^2 log z).
  using T = long double;
  const T q = T(z) * T(z) / 4;
  T term = 1;
  T harmonic = 0;
  T j0m1 = 0;  // J_0 - 1
  T ysum = 0;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (T(k) * T(k));
    harmonic += T(1) / T(k);
    j0m1 += term;
    ysum -= harmonic * term;
    if (std::abs(term) * (1 + harmonic) < std::numeric_limits<T>::epsilon() * T(1e-3)) break;
  }
  const T inv2pi = 1 / (2 * std::numbers::pi_v<T>);
  const T logc = std::log(T(kappa) / 2) + std::numbers::egamma_v<T>;
  const T re = -inv2pi * (logc * j0m1 + std::log(T(r)) * j0m1 + ysum);
  const T im = j0m1 / 4;
  return {static_cast<double>(re), static_cast<double>(im)};
}

cdouble helmholtz(int dim, double kappa, const Point& x, const Point& y) {
  return dim == 2 ? green2d(kappa, x, y).value : green3d(kappa, x, y).value;
}

KernelCounters kernel_counters() { return tl_counters; }
void reset_kernel_counters() { tl_counters = {}; }

}  // namespace flx
