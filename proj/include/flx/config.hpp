#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flx/types.hpp"

namespace flx {

enum class ShapeKind { ball3d, cube3d, disc2d, square2d };

// Nondimensional reference shape B. `diameter` is the true diameter
// (max distance between two points), `center` the offset of B's centroid from
// the origin; B must contain the origin.
struct ReferenceShape {
  ShapeKind kind = ShapeKind::ball3d;
  double diameter = 1.0;
  Point center = Point::Zero();

  int dim() const;
  // Half side of the axis-aligned bounding box.
  double half_extent() const;
  bool contains(const Point& p) const;
  double measure() const;

  bool operator==(const ReferenceShape&) const = default;
};

enum class Regime { first, second, third };

// Which contrast enters the scattering coefficient: tau = b1 - b0, or b1 itself.
enum class CoefficientContrast { tau, b };

struct RegimeParams {
  Regime kind = Regime::third;
  // Third regime: tau = c_b delta^-2 (3D) or c_b delta^-2 |log delta|^-1 (2D).
  double c_b = 1.0;
  std::vector<double> c_b_per_particle;  // empty => shared c_b
  std::optional<double> a1;              // defaults to a0
  CoefficientContrast coefficient = CoefficientContrast::tau;
  // First regime: a1 = c_a delta^-2.
  double c_a = 1.0;
  int surface_resolution = 4;
  // Second regime (Drude model).
  double k_p = 1.0;
  double gamma_dp = 0.0;
  double eps0 = 1.0;
  std::vector<double> sigma;

  bool operator==(const RegimeParams&) const = default;
};

struct Spacing {
  double t = 0.0;
  double d0 = 1.0;
  bool operator==(const Spacing&) const = default;
};

struct Background {
  double a0 = 1.0;
  double b0 = 1.0;
  bool operator==(const Background&) const = default;
};

struct IncidentSpec {
  Point theta = Point(0.0, 0.0, 1.0);
  std::optional<int> n0;  // resonance index; default picks the strongest monopole mode
  double h = 0.5;
  int sign = +1;
  bool operator==(const IncidentSpec&) const = default;
};

struct EvaluationSpec {
  std::optional<double> radius;  // default: 5 x max(cluster diameter, 1)
  int count = 8;
  bool operator==(const EvaluationSpec&) const = default;
};

struct ClusterConfig {
  int dim = 3;
  ReferenceShape shape;
  double delta = 0.05;
  std::vector<Point> centers;
  Spacing spacing;
  Background background;
  RegimeParams regime;
  IncidentSpec incident;
  EvaluationSpec evaluation;
  int resolution = 10;

  std::size_t size() const { return centers.size(); }
  bool operator==(const ClusterConfig&) const = default;
};

struct ContrastParams {
  std::vector<double> tau;  // per particle
  double alpha = 0.0;       // a1 - a0
  std::vector<double> gamma;
  std::vector<double> b1;   // tau + b0
};

// Parses and validates a JSON config document. Syntax errors carry
// line/column, invariant violations name the invariant.
ClusterConfig parse_config(std::string_view text);
// Canonical JSON rendering; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ClusterConfig& cfg);
void validate(const ClusterConfig& cfg);

ShapeKind parse_shape_kind(std::string_view name);
std::string_view to_string(ShapeKind kind);
std::string_view to_string(Regime kind);

// Distance between the supports z_i + delta B and z_j + delta B.
double particle_distance(const ClusterConfig& cfg, std::size_t i, std::size_t j);
// Minimum pairwise particle distance d; +inf for a single particle.
double min_particle_distance(const ClusterConfig& cfg);
// d0 delta^t (3D) or d0 exp(-|log delta|^t) (2D).
double spacing_law(int dim, double delta, double t, double d0);
// Largest distance between centers plus one particle diameter.
double cluster_diameter(const ClusterConfig& cfg);
Point cluster_centroid(const ClusterConfig& cfg);

// Copy of `base` at relative radius `delta`: the center pattern is rescaled
// about its centroid so that the measured d equals the spacing law exactly.
ClusterConfig with_delta(const ClusterConfig& base, double delta);

// Third-regime contrasts; throws ConfigError for other regimes.
ContrastParams derive_contrasts(const ClusterConfig& cfg);

}  // namespace flx
