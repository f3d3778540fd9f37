#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "flx/kernels.hpp"

using namespace flx;

namespace {

// J0, Y0, J1, Y1 from mpmath (30 digits).
struct BesselRow {
  double x, j0, y0, j1, y1;
};
const std::vector<BesselRow> kBessel = {
    {0.5, 0.93846980724081290423, -0.44451873350670655715, 0.24226845767487388638, -1.4714723926702430692},
    {1.0, 0.76519768655796655145, 0.088256964215676957983, 0.44005058574493351596, -0.78121282130028871655},
    {5.0, -0.17759677131433830435, -0.30851762524903378007, -0.32757913759146522204, 0.1478631433912268448},
    {15.9, -0.16497049948567060953, 0.11315496565176706111, 0.10802789006306502792, 0.16860643140069137573},
    {16.1, -0.18302369246531048507, 0.077620758701382402309, 0.071979418622449990505, 0.18551971729151600474},
    {20.0, 0.16702466434058315473, 0.062640596809383831162, 0.066833124175850045579, -0.16551161436252129586},
    {50.0, 0.055812327669251815005, -0.098064995470077079029, -0.097511828125175137661, -0.056795668562014767942},
};

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("Bessel functions match high-precision references") {
    for (const auto& r : kBessel) {
      CAPTURE(r.x);
      const auto b0 = bessel0(r.x);
      const auto b1 = bessel1(r.x);
      CHECK(b0.j == doctest::Approx(r.j0).epsilon(1e-12));
      CHECK(b0.y == doctest::Approx(r.y0).epsilon(1e-12));
      CHECK(b1.j == doctest::Approx(r.j1).epsilon(1e-12));
      CHECK(b1.y == doctest::Approx(r.y1).epsilon(1e-12));
    }
  }

  TEST_CASE("Wronskian J0 Y0' - J0' Y0 = 2/(pi z)") {
    for (double z : {1.0, 3.0, 12.0, 16.0, 30.0}) {
      const auto b0 = bessel0(z);
      const auto b1 = bessel1(z);
      // J0' = -J1, Y0' = -Y1
      const double w = b0.j * (-b1.y) - (-b1.j) * b0.y;
      CHECK(std::abs(w - 2.0 / (kPi * z)) < 1e-10);
    }
  }

  TEST_CASE("series and asymptotic branches agree at the switch radius") {
    for (double x : {kHankelSwitch * 0.999, kHankelSwitch, kHankelSwitch * 1.001}) {
      const auto s0 = bessel0_series<long double>(x);
      const auto a0 = bessel_asymptotic<long double>(0, x);
      const auto s1 = bessel1_series<long double>(x);
      const auto a1 = bessel_asymptotic<long double>(1, x);
      CHECK(std::abs(static_cast<double>(s0.j - a0.j)) < 1e-10);
      CHECK(std::abs(static_cast<double>(s0.y - a0.y)) < 1e-10);
      CHECK(std::abs(static_cast<double>(s1.j - a1.j)) < 1e-10);
      CHECK(std::abs(static_cast<double>(s1.y - a1.y)) < 1e-10);
    }
  }

  TEST_CASE("3D kernel values") {
    const Point o = Point::Zero();
    CHECK(green3d(0.0, o, Point(1, 0, 0)).value.real() == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-15));
    CHECK(green3d(0.0, o, Point(1, 0, 0)).value.imag() == 0.0);
    const auto v = green3d(1.0, o, Point(0, kPi, 0)).value;
    CHECK(std::abs(v - cdouble(-1.0 / (4.0 * kPi * kPi), 0.0)) < 1e-15);
    for (double k : {0.3, 7.0, 41.0}) {
      const double r = 2.5;
      CHECK(std::abs(green3d(k, o, Point(0, 0, r)).value) == doctest::Approx(1.0 / (4.0 * kPi * r)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(green3d(1.0, o, o), DomainError);
  }

  TEST_CASE("2D kernel values and errors") {
    const Point o = Point::Zero();
    CHECK(green0_2d(o, Point(1, 0, 0)) == 0.0);
    const double kappa = 2.0, r = 1.0;
    const auto v = green2d(kappa, o, Point(r, 0, 0)).value;
    const auto b = bessel0(kappa * r);
    CHECK(std::abs(v - cdouble(0.0, 0.25) * cdouble(b.j, b.y)) < 1e-15);
    CHECK_THROWS_AS(green2d(1.0, o, o), DomainError);
    CHECK_THROWS_AS(green2d(0.0, o, Point(1, 0, 0)), DomainError);
    CHECK_THROWS_AS(green2d(-1.0, o, Point(1, 0, 0)), DomainError);
  }

  TEST_CASE("constant E") {
    const double g = std::numbers::egamma;
    const cdouble e2 = constant_E(2.0);
    CHECK(e2.real() == doctest::Approx(-0.09186672629915399038).epsilon(1e-13));
    CHECK(e2.imag() == 0.25);
    CHECK(constant_E(2.0 * std::numbers::e).real() == doctest::Approx(-(1.0 + g) / (2.0 * kPi)).epsilon(1e-14));
    for (double k : {1e-3, 0.7, 13.0, 400.0}) CHECK(constant_E(k).imag() == 0.25);
    CHECK_THROWS_AS(constant_E(0.0), DomainError);
  }

  TEST_CASE("reciprocity is exact") {
    const Point x(0.3, -1.2, 0.7), y(-0.4, 0.5, 2.0);
    for (double k : {0.0, 1.0, 9.0}) CHECK(green3d(k, x, y).value == green3d(k, y, x).value);
    const Point x2(0.3, -1.2, 0.0), y2(-0.4, 0.5, 0.0);
    for (double k : {0.5, 3.0, 30.0}) CHECK(green2d(k, x2, y2).value == green2d(k, y2, x2).value);
  }

  TEST_CASE("gradients match central differences") {
    const Point x(0.1, 0.2, -0.3);
    const Point dir = Point(1.0, -2.0, 0.5).normalized();
    for (double r : {1e-3, 0.1, 1.0, 10.0, 100.0}) {
      for (double k : {0.0, 1.0, 50.0}) {
        if (k * r > 1e3) continue;
        const Point y = x + r * dir;
        const auto e = green3d(k, x, y, true);
        REQUIRE(e.has_gradient);
        // Step small relative to both r and the wavelength.
        const double step = 1e-4 * std::min(r, 1.0 / std::max(k, 1.0));
        for (int a = 0; a < 3; ++a) {
          Point yp = y, ym = y;
          yp[a] += step;
          ym[a] -= step;
          const cdouble fd = (green3d(k, x, yp).value - green3d(k, x, ym).value) / (2.0 * step);
          const double scale = e.gradient.norm();
          CAPTURE(r);
          CAPTURE(k);
          CHECK(std::abs(fd - e.gradient[a]) <= 1e-6 * scale);
        }
      }
    }
    const Point x2(0.1, 0.2, 0.0);
    for (double r : {0.05, 1.0, 20.0}) {
      const double k = 3.0;
      const Point y = x2 + r * Point(0.6, 0.8, 0.0);
      const auto e = green2d(k, x2, y, true);
      const double step = 1e-5 * std::min(r, 1.0 / k);
      for (int a = 0; a < 2; ++a) {
        Point yp = y, ym = y;
        yp[a] += step;
        ym[a] -= step;
        const cdouble fd = (green2d(k, x2, yp).value - green2d(k, x2, ym).value) / (2.0 * step);
        CHECK(std::abs(fd - e.gradient[a]) <= 1e-6 * e.gradient.norm());
      }
    }
  }

  TEST_CASE("2D near-field decomposition remainder decays like r^2 log r") {
    const double k = 1.7;
    std::vector<double> rs, res;
    for (int m = 4; m <= 12; ++m) {
      const double r = std::ldexp(1.0, -m);
      const Point o = Point::Zero(), y(r, 0, 0);
      const cdouble d = green2d(k, o, y).value - green0_2d(o, y) - constant_E(k);
      rs.push_back(r);
      res.push_back(std::abs(d));
      CHECK(std::abs(d - green2d_remainder(k, r)) < 1e-13);
    }
    CHECK(slope(rs, res) >= 1.8);
    CHECK(green2d_remainder(k, 0.0) == cdouble(0.0, 0.0));
  }

  TEST_CASE("3D remainder is the smooth part of the kernel") {
    const double k = 2.3;
    CHECK(std::abs(green3d_remainder(k, 0.0) - cdouble(0.0, k / (4.0 * kPi))) < 1e-15);
    const double tiny = 1e-8;  // Taylor: i k/(4 pi) - k^2 r/(8 pi)
    CHECK(std::abs(green3d_remainder(k, tiny) - cdouble(-k * k * tiny / (8.0 * kPi), k / (4.0 * kPi))) < 1e-15);
    for (double r : {1e-3, 0.5, 4.0}) {
      const cdouble ref = green3d(k, Point::Zero(), Point(r, 0, 0)).value - 1.0 / (4.0 * kPi * r);
      CHECK(std::abs(green3d_remainder(k, r) - ref) <= 1e-9 * std::abs(ref) + 1e-12);
    }
  }

  TEST_CASE("kernel call counters separate dimensions") {
    reset_kernel_counters();
    (void)helmholtz(2, 1.0, Point::Zero(), Point(1, 0, 0));
    CHECK(kernel_counters().green2d == 1);
    CHECK(kernel_counters().green3d == 0);
    (void)helmholtz(3, 1.0, Point::Zero(), Point(1, 0, 0));
    CHECK(kernel_counters().green3d == 1);
  }
}
