#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flx/config.hpp"
#include "flx/types.hpp"

namespace flx {

// Closed-form cell self-interactions of the Laplace kernel.
// Cube of side h:   int int 1/(4 pi |x-y|)      = h^5 kCubeSelf / (4 pi)
// Square of side h: int int log|x-y|             = h^4 (log h + kSquareSelf)
inline constexpr double kCubeSelf = 1.882312644389661;
inline constexpr double kSquareSelf = -0.805086721950087;
// Mean distance between two uniform points in a unit cube / unit square.
inline constexpr double kCubeMeanDistance = 0.66170718226717623;
inline constexpr double kSquareMeanDistance = 0.52140543316472068;

// Piecewise-constant Galerkin discretization of the Laplace volume potential
// on delta*B. Cells come from a regular grid over the bounding box; curved
// shapes get fractional measures (and centroids) by subsampling.
struct NewtonianDiscretization {
  ReferenceShape shape;
  int dim = 3;
  int resolution = 0;
  double delta = 1.0;
  double cell_side = 0.0;      // physical
  std::vector<Point> centers;  // physical, relative to the particle center
  Vec weights;                 // cell measures
  Mat matrix;                  // G_ij ~ int_i int_j Phi_0, symmetric

  Eigen::Index size() const { return weights.size(); }
  double measure() const { return weights.sum(); }
  // W^{-1/2} G W^{-1/2}: symmetric matrix of the operator in an orthonormal basis.
  Mat normalized() const;
};

// Self-integral of Phi_0 over one cell of measure `w` (full cells of side h
// use the closed form, partial ones an equivalent-measure ball or disc).
double cell_self_integral(int dim, double w, double side);
// Mean distance between two points of the same cell (same substitution rule).
double cell_mean_distance(int dim, double w, double side);

NewtonianDiscretization assemble_newtonian(const ReferenceShape& shape, int resolution, double delta = 1.0);
// Exact rescaling of a reference-scale discretization to delta*B, using
// homogeneity (3D) or the log shift (2D).
NewtonianDiscretization rescale(const NewtonianDiscretization& ref, double delta);

struct SpectralData {
  int dim = 3;
  double delta = 1.0;
  Vec eigenvalues;   // descending, physical scale
  Mat eigenvectors;  // orthonormal columns y_n, cell values e_n = W^{-1/2} y_n
  Vec moments;       // <1, e_n>
  Vec sqrt_weights;
  double measure = 0.0;
  bool complete = false;  // full spectrum available
  double max_residual = 0.0;

  Eigen::Index count() const { return eigenvalues.size(); }
  // First index whose moment is non-negligible (m_n^2 > 1e-8 |D|).
  int default_resonance_index() const;
  bool excitable(int n) const;
};

// Leading `count` eigenpairs (0 = all). Dense solver for moderate sizes,
// block subspace iteration with Rayleigh-Ritz otherwise.
SpectralData eigensystem(const NewtonianDiscretization& disc, int count = 0);
// 3D only: spectrum of delta*B from the reference spectrum of B.
SpectralData rescale(const SpectralData& ref, double delta);

// Scattering function w = s (I - s A0)^{-1} 1 with s = k^2 c / a0, where c is
// the contrast entering the coefficient.
struct ScatteringCoefficient {
  double shift = 0.0;  // 1/s
  double C = 0.0;      // int w
  double norm_w = 0.0; // ||w||_{L^2}
  Vec coefficients;    // <w, e_n>
};

ScatteringCoefficient scattering_function(const SpectralData& spec, double k, double contrast, double a0);
// Dense reference: factorizes (I - s S) directly.
ScatteringCoefficient scattering_function_dense(const NewtonianDiscretization& disc, double k, double contrast,
                                                double a0);

struct DielectricResonance {
  int index;
  double k;
};
std::vector<DielectricResonance> dielectric_resonances(const SpectralData& spec, double gamma, double a0,
                                                       int count);
// k^2 = k_n^2 (1 + sign delta^h) in 3D, k_n^2 (1 + sign |log delta|^-h) in 2D.
double detuned_wavenumber(int dim, double k_n, double delta, double h, int sign);

// Boundary quadrature for the Minnaert constant.
struct SurfacePanel {
  Point x;
  Point normal;
  double area;
};
std::vector<SurfacePanel> surface_mesh(const ReferenceShape& shape, int level);
// (1/|dB|) int int (x-y).nu(x) / (4 pi |x-y|) on a fixed mesh level.
double theta_boundary(const ReferenceShape& shape, int level);

struct MinnaertResult {
  double theta_B = 0.0;  // Richardson-extrapolated value
  double theta_D = 0.0;  // delta^2 theta_B
  double drift = 0.0;    // relative change between the two finest levels
  double k_M = 0.0;
};
MinnaertResult minnaert_resonance(const ReferenceShape& shape, double delta, double a0, double a1, int level);
// k_M from a known Theta_dD.
double minnaert_wavenumber(double theta_D, double a0, double a1);

struct PlasmonicResult {
  std::vector<double> k;            // admissible entries
  std::vector<std::size_t> used;    // their indices in sigma
  std::vector<std::size_t> skipped; // nonpositive radicand
};
PlasmonicResult plasmonic_resonances(double eps0, double k_p, const std::vector<double>& sigma);

// On-disk cache of reference eigensystems keyed by discretization parameters.
std::string spectral_cache_key(const ReferenceShape& shape, int resolution, double delta, int count);
std::optional<SpectralData> load_spectral(const std::filesystem::path& file);
void save_spectral(const std::filesystem::path& file, const SpectralData& spec);

}  // namespace flx
