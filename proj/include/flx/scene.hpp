#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "flx/config.hpp"
#include "flx/spectral.hpp"

namespace flx {

// Discretization and spectrum of one particle delta*B (shared by all particles).
struct ShapeModel {
  NewtonianDiscretization disc;
  SpectralData spectrum;
};

struct ModelOptions {
  int count = 0;  // eigenpairs kept; 0 = complete spectrum
  std::optional<std::filesystem::path> cache_dir;
};

// Reference-scale model (delta = 1). Reads/writes the binary cache when a
// directory is given.
ShapeModel reference_model(const ReferenceShape& shape, int resolution, const ModelOptions& opts = {});
// Model of delta*B: exact rescaling in 3D, fresh eigensolve in 2D.
ShapeModel particle_model(const ShapeModel& reference, double delta, int count = 0);

// A realized configuration: wavenumbers, contrasts and per-particle
// scattering coefficients, ready for the Foldy-Lax and oracle solvers.
struct Scene {
  ClusterConfig cfg;
  ContrastParams contrasts;
  std::shared_ptr<const ShapeModel> model;  // physical scale
  int n0 = 0;
  double k_resonance = 0.0;  // k_{n0}, using particle 1's contrast
  double k = 0.0;            // detuned incident wavenumber
  double kappa = 0.0;        // k sqrt(b0/a0)
  std::vector<double> contrast;  // per particle, tau or b1 per the config
  std::vector<ScatteringCoefficient> coefficients;

  int dim() const { return cfg.dim; }
  std::size_t size() const { return cfg.size(); }
  // s_j = k^2 contrast_j / a0
  double coupling(std::size_t j) const;
};

Scene build_scene(const ClusterConfig& cfg, const ShapeModel& reference);
Scene build_scene(const ClusterConfig& cfg, const ModelOptions& opts = {});

// Scene with an explicitly prescribed incident wavenumber (no detuning).
Scene build_scene_at(const ClusterConfig& cfg, const ShapeModel& reference, double k);

// Plane wave e^{i kappa theta.x}.
cdouble incident_wave(double kappa, const Point& theta, const Point& x);

}  // namespace flx
