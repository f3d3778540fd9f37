#include "flx/scene.hpp"

#include <cmath>

namespace flx {

ShapeModel reference_model(const ReferenceShape& shape, int resolution, const ModelOptions& opts) {
  ShapeModel m;
  m.disc = assemble_newtonian(shape, resolution, 1.0);
  std::filesystem::path file;
  if (opts.cache_dir) {
    std::filesystem::create_directories(*opts.cache_dir);
    file = *opts.cache_dir / (spectral_cache_key(shape, resolution, 1.0, opts.count) + ".flxs");
    if (auto hit = load_spectral(file); hit && hit->sqrt_weights.size() == m.disc.size()) {
      m.spectrum = std::move(*hit);
      return m;
    }
  }
  m.spectrum = eigensystem(m.disc, opts.count);
  if (opts.cache_dir) save_spectral(file, m.spectrum);
  return m;
}

ShapeModel particle_model(const ShapeModel& reference, double delta, int count) {
  ShapeModel m;
  m.disc = rescale(reference.disc, delta);
  if (m.disc.dim == 3)
    m.spectrum = rescale(reference.spectrum, delta);
  else
    m.spectrum = eigensystem(m.disc, count == 0 ? static_cast<int>(reference.spectrum.count()) : count);
  return m;
}

double Scene::coupling(std::size_t j) const { return k * k * contrast[j] / cfg.background.a0; }

cdouble incident_wave(double kappa, const Point& theta, const Point& x) {
  return std::polar(1.0, kappa * theta.dot(x));
}

namespace {

Scene prepare(const ClusterConfig& cfg, const ShapeModel& reference) {
  validate(cfg);
  if (reference.disc.shape != cfg.shape) throw ConfigError("reference model does not match the config shape");
  Scene s;
  s.cfg = cfg;
  s.contrasts = derive_contrasts(cfg);
  s.model = std::make_shared<const ShapeModel>(particle_model(reference, cfg.delta));
  for (std::size_t j = 0; j < cfg.size(); ++j)
    s.contrast.push_back(cfg.regime.coefficient == CoefficientContrast::tau ? s.contrasts.tau[j]
                                                                            : s.contrasts.b1[j]);
  const auto& spec = s.model->spectrum;
  s.n0 = cfg.incident.n0 ? *cfg.incident.n0 : spec.default_resonance_index();
  if (!spec.excitable(s.n0))
    throw DomainError("resonance index n0=" + std::to_string(s.n0) + " has a vanishing moment");
  if (!(spec.eigenvalues[s.n0] > 0.0)) throw DomainError("resonance index n0 has a nonpositive eigenvalue");
  s.k_resonance = std::sqrt(cfg.background.a0 / (s.contrast[0] * spec.eigenvalues[s.n0]));
  return s;
}

void finish(Scene& s, double k) {
  s.k = k;
  s.kappa = k * std::sqrt(s.cfg.background.b0 / s.cfg.background.a0);
  s.coefficients.clear();
  for (std::size_t j = 0; j < s.size(); ++j)
    s.coefficients.push_back(scattering_function(s.model->spectrum, k, s.contrast[j], s.cfg.background.a0));
}

}  // namespace

Scene build_scene(const ClusterConfig& cfg, const ShapeModel& reference) {
  Scene s = prepare(cfg, reference);
  finish(s, detuned_wavenumber(cfg.dim, s.k_resonance, cfg.delta, cfg.incident.h, cfg.incident.sign));
  return s;
}

Scene build_scene(const ClusterConfig& cfg, const ModelOptions& opts) {
  return build_scene(cfg, reference_model(cfg.shape, cfg.resolution, opts));
}

Scene build_scene_at(const ClusterConfig& cfg, const ShapeModel& reference, double k) {
  if (!(k > 0.0)) throw DomainError("wavenumber must be positive");
  Scene s = prepare(cfg, reference);
  finish(s, k);
  return s;
}

}  // namespace flx
