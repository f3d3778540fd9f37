#include "flx/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace flx {

using nlohmann::json;

namespace {

constexpr double kSpacingRelTol = 1e-9;
constexpr double kUnitTol = 1e-12;

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  std::ostringstream os;
  os << "line " << line << ", column " << col;
  return os.str();
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail("missing field '" + where + key + "'");
  return *it;
}

double number(const json& v, const std::string& name) {
  if (!v.is_number()) fail("field '" + name + "' must be a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& name) {
  if (!v.is_number_integer()) fail("field '" + name + "' must be an integer");
  return v.get<int>();
}

Point point(const json& v, int dim, const std::string& name) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    fail("field '" + name + "' must be an array of " + std::to_string(dim) + " numbers");
  Point p = Point::Zero();
  for (int a = 0; a < dim; ++a) p[a] = number(v[a], name);
  return p;
}

json point_json(const Point& p, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[i]);
  return a;
}

std::vector<double> number_list(const json& v, const std::string& name) {
  if (!v.is_array()) fail("field '" + name + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, name));
  return out;
}

Regime parse_regime(std::string_view s) {
  if (s == "first") return Regime::first;
  if (s == "second") return Regime::second;
  if (s == "third") return Regime::third;
  fail("unknown regime kind '" + std::string(s) + "'");
}

bool is_box(ShapeKind k) { return k == ShapeKind::cube3d || k == ShapeKind::square2d; }

}  // namespace

int ReferenceShape::dim() const {
  return (kind == ShapeKind::ball3d || kind == ShapeKind::cube3d) ? 3 : 2;
}

double ReferenceShape::half_extent() const {
  return is_box(kind) ? diameter / std::sqrt(double(dim())) / 2.0 : diameter / 2.0;
}

bool ReferenceShape::contains(const Point& p) const {
  const Point d = p - center;
  const int n = dim();
  const double a = half_extent();
  if (is_box(kind)) {
    for (int i = 0; i < n; ++i)
      if (std::abs(d[i]) > a) return false;
    return true;
  }
  return d.head(n).squaredNorm() <= a * a;
}

double ReferenceShape::measure() const {
  const double a = half_extent();
  switch (kind) {
    case ShapeKind::ball3d: return 4.0 / 3.0 * kPi * a * a * a;
    case ShapeKind::cube3d: return 8.0 * a * a * a;
    case ShapeKind::disc2d: return kPi * a * a;
    case ShapeKind::square2d: return 4.0 * a * a;
  }
  return 0.0;
}

ShapeKind parse_shape_kind(std::string_view name) {
  if (name == "ball3d") return ShapeKind::ball3d;
  if (name == "cube3d") return ShapeKind::cube3d;
  if (name == "disc2d") return ShapeKind::disc2d;
  if (name == "square2d") return ShapeKind::square2d;
  fail("unknown shape kind '" + std::string(name) + "'");
}

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::ball3d: return "ball3d";
    case ShapeKind::cube3d: return "cube3d";
    case ShapeKind::disc2d: return "disc2d";
    case ShapeKind::square2d: return "square2d";
  }
  return "?";
}

std::string_view to_string(Regime kind) {
  switch (kind) {
    case Regime::first: return "first";
    case Regime::second: return "second";
    case Regime::third: return "third";
  }
  return "?";
}

double particle_distance(const ClusterConfig& cfg, std::size_t i, std::size_t j) {
  const Point d = cfg.centers[j] - cfg.centers[i];
  const int n = cfg.dim;
  if (is_box(cfg.shape.kind)) {
    const double side = 2.0 * cfg.delta * cfg.shape.half_extent();
    Point gap = Point::Zero();
    for (int a = 0; a < n; ++a) gap[a] = std::max(0.0, std::abs(d[a]) - side);
    return gap.norm();
  }
  return std::max(0.0, d.norm() - cfg.delta * cfg.shape.diameter);
}

double min_particle_distance(const ClusterConfig& cfg) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.size(); ++j) best = std::min(best, particle_distance(cfg, i, j));
  return best;
}

double spacing_law(int dim, double delta, double t, double d0) {
  if (dim == 2) return d0 * std::exp(-std::pow(std::abs(std::log(delta)), t));
  return d0 * std::pow(delta, t);
}

Point cluster_centroid(const ClusterConfig& cfg) {
  Point c = Point::Zero();
  for (const auto& z : cfg.centers) c += z;
  return cfg.centers.empty() ? c : Point(c / double(cfg.size()));
}

double cluster_diameter(const ClusterConfig& cfg) {
  double span = 0.0;
  for (std::size_t i = 0; i < cfg.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.size(); ++j)
      span = std::max(span, (cfg.centers[i] - cfg.centers[j]).norm());
  return span + cfg.delta * cfg.shape.diameter;
}

void validate(const ClusterConfig& cfg) {
  if (cfg.dim != 2 && cfg.dim != 3) fail("dim must be 2 or 3");
  if (cfg.shape.dim() != cfg.dim)
    fail("shape kind '" + std::string(to_string(cfg.shape.kind)) + "' does not match dim " +
         std::to_string(cfg.dim));
  if (!(cfg.shape.diameter > 0.0) || cfg.shape.diameter > 1.0)
    fail("shape diameter must lie in (0, 1]");
  if (cfg.dim == 2 && cfg.shape.center.z() != 0.0) fail("2D shape center must have z = 0");
  if (!cfg.shape.contains(Point::Zero())) fail("reference shape must contain the origin");
  if (!(cfg.delta > 0.0) || cfg.delta >= 1.0) fail("delta must lie in (0, 1)");
  if (cfg.centers.empty()) fail("at least one particle center is required");
  for (const auto& z : cfg.centers)
    if (!z.allFinite() || (cfg.dim == 2 && z.z() != 0.0)) fail("centers must be finite points");
  if (!(cfg.background.a0 > 0.0) || !(cfg.background.b0 > 0.0))
    fail("background a0, b0 must be positive");
  if (!(cfg.spacing.d0 > 0.0) || cfg.spacing.t < 0.0) fail("spacing requires d0 > 0 and t >= 0");
  if (std::abs(cfg.incident.theta.norm() - 1.0) > kUnitTol)
    fail("incident direction theta must be a unit vector");
  if (cfg.dim == 2 && cfg.incident.theta.z() != 0.0) fail("2D incident direction must have z = 0");
  if (cfg.incident.h < 0.0 || cfg.incident.h > 1.0) fail("detuning exponent h must lie in [0, 1]");
  if (cfg.incident.sign != 1 && cfg.incident.sign != -1) fail("detuning sign must be +1 or -1");
  if (cfg.incident.n0 && *cfg.incident.n0 < 0) fail("resonance index n0 must be >= 0");
  if (cfg.resolution < 2) fail("resolution must be at least 2");
  if (cfg.evaluation.count < 1) fail("evaluation count must be positive");
  if (cfg.evaluation.radius && !(*cfg.evaluation.radius > 0.0))
    fail("evaluation radius must be positive");

  const auto& r = cfg.regime;
  switch (r.kind) {
    case Regime::third:
      if (!(r.c_b > 0.0)) fail("regime c_b must be positive");
      if (!r.c_b_per_particle.empty() && r.c_b_per_particle.size() != cfg.size())
        fail("c_b_list must have one entry per particle");
      for (double c : r.c_b_per_particle)
        if (!(c > 0.0)) fail("c_b_list entries must be positive");
      if (r.a1 && !(*r.a1 > 0.0)) fail("a1 must be positive");
      break;
    case Regime::first:
      if (!(r.c_a > 0.0)) fail("regime c_a must be positive");
      if (r.surface_resolution < 1) fail("surface_resolution must be >= 1");
      break;
    case Regime::second:
      if (!(r.k_p > 0.0) || !(r.eps0 > 0.0)) fail("second regime needs k_p > 0 and eps0 > 0");
      break;
  }

  for (std::size_t i = 0; i < cfg.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.size(); ++j)
      if (particle_distance(cfg, i, j) <= 0.0)
        fail("particles overlap: j=" + std::to_string(i + 1) + "," + std::to_string(j + 1));

  if (cfg.size() >= 2) {
    const double d = min_particle_distance(cfg);
    const double law = spacing_law(cfg.dim, cfg.delta, cfg.spacing.t, cfg.spacing.d0);
    if (d < law * (1.0 - kSpacingRelTol)) {
      std::ostringstream os;
      os.precision(17);
      os << "minimum distance violates spacing law: d=" << d << " < " << law;
      fail(os.str());
    }
  }
}

ClusterConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail("syntax error at " + line_column(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  if (!doc.is_object()) fail("config document must be a JSON object");

  ClusterConfig cfg;
  try {
    cfg.dim = integer(require(doc, "dim", ""), "dim");
    if (cfg.dim != 2 && cfg.dim != 3) fail("dim must be 2 or 3");

    const auto& shape = require(doc, "shape", "");
    cfg.shape.kind = parse_shape_kind(require(shape, "kind", "shape.").get<std::string>());
    if (shape.contains("diameter")) cfg.shape.diameter = number(shape["diameter"], "shape.diameter");
    if (shape.contains("center")) cfg.shape.center = point(shape["center"], cfg.dim, "shape.center");

    cfg.delta = number(require(doc, "delta", ""), "delta");

    const auto& centers = require(doc, "centers", "");
    if (!centers.is_array()) fail("field 'centers' must be an array of points");
    for (const auto& c : centers) cfg.centers.push_back(point(c, cfg.dim, "centers"));

    if (doc.contains("spacing")) {
      const auto& s = doc["spacing"];
      if (s.contains("t")) cfg.spacing.t = number(s["t"], "spacing.t");
      if (s.contains("d0")) cfg.spacing.d0 = number(s["d0"], "spacing.d0");
    }
    if (doc.contains("background")) {
      const auto& b = doc["background"];
      if (b.contains("a0")) cfg.background.a0 = number(b["a0"], "background.a0");
      if (b.contains("b0")) cfg.background.b0 = number(b["b0"], "background.b0");
    }

    const auto& reg = require(doc, "regime", "");
    auto& r = cfg.regime;
    r.kind = parse_regime(require(reg, "kind", "regime.").get<std::string>());
    if (reg.contains("c_b")) r.c_b = number(reg["c_b"], "regime.c_b");
    if (reg.contains("c_b_list") && !reg["c_b_list"].is_null())
      r.c_b_per_particle = number_list(reg["c_b_list"], "regime.c_b_list");
    if (reg.contains("a1") && !reg["a1"].is_null()) r.a1 = number(reg["a1"], "regime.a1");
    if (reg.contains("coefficient")) {
      const auto c = reg["coefficient"].get<std::string>();
      if (c == "tau")
        r.coefficient = CoefficientContrast::tau;
      else if (c == "b")
        r.coefficient = CoefficientContrast::b;
      else
        fail("regime.coefficient must be 'tau' or 'b'");
    }
    if (reg.contains("c_a")) r.c_a = number(reg["c_a"], "regime.c_a");
    if (reg.contains("surface_resolution"))
      r.surface_resolution = integer(reg["surface_resolution"], "regime.surface_resolution");
    if (reg.contains("k_p")) r.k_p = number(reg["k_p"], "regime.k_p");
    if (reg.contains("gamma_dp")) r.gamma_dp = number(reg["gamma_dp"], "regime.gamma_dp");
    if (reg.contains("eps0")) r.eps0 = number(reg["eps0"], "regime.eps0");
    if (reg.contains("sigma")) r.sigma = number_list(reg["sigma"], "regime.sigma");

    if (doc.contains("incident")) {
      const auto& inc = doc["incident"];
      if (inc.contains("theta")) cfg.incident.theta = point(inc["theta"], cfg.dim, "incident.theta");
      if (inc.contains("n0") && !inc["n0"].is_null()) cfg.incident.n0 = integer(inc["n0"], "incident.n0");
      if (inc.contains("h")) cfg.incident.h = number(inc["h"], "incident.h");
      if (inc.contains("sign")) cfg.incident.sign = integer(inc["sign"], "incident.sign");
    } else if (cfg.dim == 2) {
      cfg.incident.theta = Point(1.0, 0.0, 0.0);
    }

    if (doc.contains("evaluation")) {
      const auto& ev = doc["evaluation"];
      if (ev.contains("radius") && !ev["radius"].is_null())
        cfg.evaluation.radius = number(ev["radius"], "evaluation.radius");
      if (ev.contains("count")) cfg.evaluation.count = integer(ev["count"], "evaluation.count");
    }
    if (doc.contains("resolution")) cfg.resolution = integer(doc["resolution"], "resolution");
  } catch (const json::exception& e) {
    fail(std::string("schema error: ") + e.what());
  }

  validate(cfg);
  return cfg;
}

std::string serialize_config(const ClusterConfig& cfg) {
  const int n = cfg.dim;
  json doc;
  doc["schema_version"] = 1;
  doc["dim"] = cfg.dim;
  doc["shape"] = {{"kind", std::string(to_string(cfg.shape.kind))},
                  {"diameter", cfg.shape.diameter},
                  {"center", point_json(cfg.shape.center, n)}};
  doc["delta"] = cfg.delta;
  json centers = json::array();
  for (const auto& z : cfg.centers) centers.push_back(point_json(z, n));
  doc["centers"] = centers;
  doc["spacing"] = {{"t", cfg.spacing.t}, {"d0", cfg.spacing.d0}};
  doc["background"] = {{"a0", cfg.background.a0}, {"b0", cfg.background.b0}};
  const auto& r = cfg.regime;
  json reg = {{"kind", std::string(to_string(r.kind))},
              {"c_b", r.c_b},
              {"c_b_list", r.c_b_per_particle},
              {"a1", r.a1 ? json(*r.a1) : json(nullptr)},
              {"coefficient", r.coefficient == CoefficientContrast::tau ? "tau" : "b"},
              {"c_a", r.c_a},
              {"surface_resolution", r.surface_resolution},
              {"k_p", r.k_p},
              {"gamma_dp", r.gamma_dp},
              {"eps0", r.eps0},
              {"sigma", r.sigma}};
  doc["regime"] = reg;
  doc["incident"] = {{"theta", point_json(cfg.incident.theta, n)},
                     {"n0", cfg.incident.n0 ? json(*cfg.incident.n0) : json(nullptr)},
                     {"h", cfg.incident.h},
                     {"sign", cfg.incident.sign}};
  doc["evaluation"] = {{"radius", cfg.evaluation.radius ? json(*cfg.evaluation.radius) : json(nullptr)},
                       {"count", cfg.evaluation.count}};
  doc["resolution"] = cfg.resolution;
  return doc.dump(2) + "\n";
}

ClusterConfig with_delta(const ClusterConfig& base, double delta) {
  ClusterConfig cfg = base;
  cfg.delta = delta;
  if (cfg.size() < 2) return cfg;

  const Point c = cluster_centroid(base);
  const double law = spacing_law(cfg.dim, delta, cfg.spacing.t, cfg.spacing.d0);
  auto scaled = [&](double f) {
    ClusterConfig out = cfg;
    for (std::size_t i = 0; i < out.size(); ++i) out.centers[i] = c + f * (base.centers[i] - c);
    return out;
  };

  if (!is_box(cfg.shape.kind)) {
    double pmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < base.size(); ++i)
      for (std::size_t j = i + 1; j < base.size(); ++j)
        pmin = std::min(pmin, (base.centers[i] - base.centers[j]).norm());
    if (!(pmin > 0.0)) throw ConfigError("coincident centers cannot be rescaled");
    return scaled((law + delta * cfg.shape.diameter) / pmin);
  }

  // Box distances are monotone in the scale factor; bisect.
  double lo = 0.0, hi = 1.0;
  while (min_particle_distance(scaled(hi)) < law) {
    hi *= 2.0;
    if (hi > 1e12) throw ConfigError("cannot rescale centers to the spacing law");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (min_particle_distance(scaled(mid)) < law ? lo : hi) = mid;
  }
  return scaled(hi);
}

ContrastParams derive_contrasts(const ClusterConfig& cfg) {
  if (cfg.regime.kind != Regime::third)
    throw ConfigError("derive_contrasts: regime mismatch (Foldy-Lax contrasts need the third regime)");
  const double scale = cfg.dim == 3 ? 1.0 / (cfg.delta * cfg.delta)
                                    : 1.0 / (cfg.delta * cfg.delta * std::abs(std::log(cfg.delta)));
  const double a0 = cfg.background.a0;
  const double a1 = cfg.regime.a1.value_or(a0);
  ContrastParams out;
  out.alpha = a1 - a0;
  for (std::size_t j = 0; j < cfg.size(); ++j) {
    const double cb = cfg.regime.c_b_per_particle.empty() ? cfg.regime.c_b : cfg.regime.c_b_per_particle[j];
    const double tau = cb * scale;
    const double b1 = tau + cfg.background.b0;
    out.tau.push_back(tau);
    out.b1.push_back(b1);
    out.gamma.push_back(tau - out.alpha * b1 / a1);
  }
  return out;
}

}  // namespace flx
