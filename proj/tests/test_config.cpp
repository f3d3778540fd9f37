#include "doctest.h"

#include <cmath>
#include <string>

#include "flx/config.hpp"

using namespace flx;

namespace {

const char* kMinimal3d = R"({
  "dim": 3,
  "shape": {"kind": "ball3d", "diameter": 1.0},
  "delta": 0.05,
  "centers": [[0, 0, 0]],
  "regime": {"kind": "third", "c_b": 1.0}
})";

std::string pair_doc(double distance, double delta, double t) {
  return R"({"dim": 3, "shape": {"kind": "ball3d", "diameter": 1.0}, "delta": )" + std::to_string(delta) +
         R"(, "centers": [[0, 0, 0], [)" + std::to_string(distance) + R"(, 0, 0]], "spacing": {"t": )" +
         std::to_string(t) + R"(, "d0": 1.0}, "regime": {"kind": "third", "c_b": 1.0}})";
}

std::string error_of(const std::string& doc) {
  try {
    (void)parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal single-particle document") {
    const auto cfg = parse_config(kMinimal3d);
    CHECK(cfg.dim == 3);
    CHECK(cfg.size() == 1);
    CHECK(cfg.delta == 0.05);
    CHECK(cfg.regime.kind == Regime::third);
    CHECK(std::isinf(min_particle_distance(cfg)));
  }

  TEST_CASE("overlap is reported with particle indices") {
    const std::string doc = R"({"dim": 3, "shape": {"kind": "ball3d", "diameter": 1.0}, "delta": 0.1,
      "centers": [[0, 0, 0], [5, 0, 0], [0.05, 0, 0]], "spacing": {"t": 0, "d0": 0.001},
      "regime": {"kind": "third"}})";
    CHECK(error_of(doc) == "particles overlap: j=1,3");
  }

  TEST_CASE("spacing law check") {
    // 0.25 >= 1 * 0.04^0.5 = 0.2 (support gap 0.21)
    CHECK_NOTHROW(parse_config(pair_doc(0.25, 0.04, 0.5)));
    CHECK(error_of(pair_doc(0.22, 0.04, 0.5)).find("spacing law") != std::string::npos);
    CHECK(spacing_law(3, 0.04, 0.5, 1.0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(spacing_law(2, std::exp(-4.0), 0.5, 2.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-14));
  }

  TEST_CASE("syntax errors carry line and column") {
    const auto msg = error_of("{\n  \"dim\": 3,\n  \"delta\": ,\n}");
    CHECK(msg.find("syntax error") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
  }

  TEST_CASE("invariant violations") {
    CHECK(error_of(R"({"dim": 4})").find("dim") != std::string::npos);
    CHECK(error_of(R"({"dim": 3, "shape": {"kind": "ball3d", "diameter": 1.5}, "delta": 0.1, "centers": [[0,0,0]], "regime": {"kind": "third"}})")
              .find("diameter") != std::string::npos);
    CHECK(error_of(R"({"dim": 3, "shape": {"kind": "ball3d"}, "delta": 1.0, "centers": [[0,0,0]], "regime": {"kind": "third"}})")
              .find("delta") != std::string::npos);
    CHECK(error_of(R"({"dim": 3, "shape": {"kind": "disc2d"}, "delta": 0.1, "centers": [[0,0,0]], "regime": {"kind": "third"}})")
              .find("does not match") != std::string::npos);
    CHECK(error_of(R"({"dim": 3, "shape": {"kind": "ball3d", "center": [0, 0, 0.6]}, "delta": 0.1, "centers": [[0,0,0]], "regime": {"kind": "third"}})")
              .find("origin") != std::string::npos);
    CHECK(error_of(R"({"dim": 3, "shape": {"kind": "ball3d"}, "delta": 0.1, "centers": [[0,0,0]], "regime": {"kind": "third"},
                       "incident": {"theta": [1, 1, 0]}})")
              .find("unit vector") != std::string::npos);
  }

  TEST_CASE("serialize/parse round trip") {
    ClusterConfig cfg = parse_config(pair_doc(0.5, 0.04, 0.5));
    cfg.shape.center = Point(0.0, 0.1, -0.2);
    cfg.regime.c_b_per_particle = {1.5, 0.25};
    cfg.regime.a1 = 1.0;
    cfg.incident.n0 = 3;
    cfg.incident.sign = -1;
    cfg.incident.theta = Point(1.0, 2.0, 2.0) / 3.0;
    cfg.evaluation.radius = 7.25;
    cfg.resolution = 13;
    validate(cfg);
    const auto back = parse_config(serialize_config(cfg));
    CHECK(back == cfg);
    CHECK(serialize_config(back) == serialize_config(cfg));

    ClusterConfig c2;
    c2.dim = 2;
    c2.shape.kind = ShapeKind::square2d;
    c2.shape.diameter = 0.8;
    c2.centers = {Point(0, 0, 0), Point(1, 0.5, 0)};
    c2.incident.theta = Point(0, 1, 0);
    c2.delta = std::exp(-3.0);
    validate(c2);
    CHECK(parse_config(serialize_config(c2)) == c2);
  }

  TEST_CASE("derived contrasts") {
    ClusterConfig cfg = parse_config(kMinimal3d);
    cfg.delta = 0.1;
    auto c = derive_contrasts(cfg);
    CHECK(c.tau[0] == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(c.alpha == 0.0);
    CHECK(c.gamma[0] == c.tau[0]);
    CHECK(c.b1[0] == c.tau[0] + cfg.background.b0);

    cfg.regime.c_b = 2.0;
    CHECK(derive_contrasts(cfg).tau[0] == 2.0 * c.tau[0]);

    ClusterConfig c2;
    c2.dim = 2;
    c2.shape.kind = ShapeKind::disc2d;
    c2.centers = {Point::Zero()};
    c2.incident.theta = Point(1, 0, 0);
    c2.delta = std::exp(-1.0);
    CHECK(derive_contrasts(c2).tau[0] == doctest::Approx(std::exp(2.0)).epsilon(1e-14));

    cfg.regime.kind = Regime::first;
    CHECK_THROWS_AS(derive_contrasts(cfg), ConfigError);
  }

  TEST_CASE("spacing law holds exactly along a delta sweep") {
    ClusterConfig base = parse_config(pair_doc(1.0, 0.08, 0.2));
    base.centers.push_back(Point(0.3, 0.8, 0.1));
    base.shape.center = Point(0, 0, 0.3);
    for (double d : {0.08, 0.03, 0.01, 0.004}) {
      const auto cfg = with_delta(base, d);
      validate(cfg);
      CHECK(min_particle_distance(cfg) / std::pow(d, 0.2) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK((cluster_centroid(cfg) - cluster_centroid(base)).norm() < 1e-12);
    }
    ClusterConfig box = base;
    box.shape = ReferenceShape{ShapeKind::cube3d, 1.0, Point::Zero()};
    for (double d : {0.08, 0.01}) {
      const auto cfg = with_delta(box, d);
      CHECK(min_particle_distance(cfg) / std::pow(d, 0.2) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("reference shape geometry") {
    const ReferenceShape ball{ShapeKind::ball3d, 1.0, Point::Zero()};
    CHECK(ball.measure() == doctest::Approx(kPi / 6.0));
    const ReferenceShape cube{ShapeKind::cube3d, 1.0, Point::Zero()};
    CHECK(cube.half_extent() == doctest::Approx(0.5 / std::sqrt(3.0)));
    const ReferenceShape sq{ShapeKind::square2d, 1.0, Point::Zero()};
    CHECK(sq.measure() == doctest::Approx(0.5));
    CHECK(parse_shape_kind("disc2d") == ShapeKind::disc2d);
    CHECK_THROWS_AS(parse_shape_kind("torus"), ConfigError);
  }
}
