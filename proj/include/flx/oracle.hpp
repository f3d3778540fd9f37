#pragma once

#include <vector>

#include "flx/scene.hpp"
#include "flx/types.hpp"

namespace flx {

// Largest dense system the oracle will factorize.
inline constexpr Eigen::Index kOracleMaxUnknowns = 20000;

// Collocated Galerkin discretization of v - s int Phi_kappa v = u^i over all
// particles: unknowns are cell values of the total field v.
struct LseSystem {
  int dim = 3;
  double kappa = 0.0;
  Point theta = Point(0, 0, 1);
  std::vector<Point> points;      // cell centers, all particles
  Vec weights;                    // cell measures
  std::vector<Eigen::Index> offset;  // first unknown of each particle (size M+1)
  std::vector<Point> centers;     // particle centers z_m
  double particle_extent = 0.0;   // delta diam(B): D_m lies in the ball of this radius about z_m
  Vec coupling;                   // s of the particle owning each cell
  CMat matrix;
  CVec rhs;

  Eigen::Index size() const { return weights.size(); }
  std::size_t particles() const { return offset.size() - 1; }
};

// `amplitude` scales the incident wave (linearity checks).
LseSystem assemble_lse(const Scene& scene, double amplitude = 1.0);

struct LseSolution {
  CVec v;
  double rcond = 0.0;
  double residual = 0.0;
  CVec integrals;           // V_m = int_{D_m} v
  std::vector<double> norms;  // ||v||_{L^2(D_m)}
};
LseSolution solve_lse(const LseSystem& sys);
// Assemble + solve.
LseSolution solve_lse(const Scene& scene, double amplitude = 1.0);

// u^s(x) = sum_l s_l |cell_l| Phi(x, x_l) v_l; x must lie outside all particles.
cdouble oracle_scattered_field(const LseSystem& sys, const LseSolution& sol, const Point& x,
                               double exclusion_radius = 0.0);

// ||v||/||u^i|| per particle.
std::vector<double> apriori_diagnostics(const LseSystem& sys, const LseSolution& sol, double amplitude = 1.0);

}  // namespace flx
