#pragma once

#include <string>
#include <vector>

#include "flx/scene.hpp"
#include "flx/types.hpp"

namespace flx {

// Self-interaction factor in the 3D system.
//   consistent: 1 - i kappa C / (4 pi), the r -> 0 limit of the smooth part
//               (e^{i kappa r} - 1)/(4 pi r) of the kernel;
//   literal:    1 - i k C (dimensionally inconsistent with Phi).
enum class SelfCoupling { consistent, literal };

struct FoldyLaxSystem {
  int dim = 3;
  double kappa = 0.0;
  Point theta = Point(0, 0, 1);
  std::vector<Point> centers;
  double exclusion_radius = 0.0;  // evaluation points must stay this far from every center
  CVec C;       // raw scattering coefficients
  CVec Cstar;   // 3D: C; 2D: (C^-1 - E)^-1
  CVec denom;   // 3D: self-coupling factor per particle; 2D: ones
  cdouble E{0.0, 0.0};
  CMat Bk;      // zero diagonal
  CVec U;
  double norm_Bk = 0.0;  // max row sum of moduli

  std::size_t size() const { return centers.size(); }
};

FoldyLaxSystem assemble_system(int dim, double kappa, const Point& theta, const std::vector<Point>& centers,
                               const CVec& C, double exclusion_radius,
                               SelfCoupling coupling = SelfCoupling::consistent);
FoldyLaxSystem assemble(const Scene& scene, SelfCoupling coupling = SelfCoupling::consistent);

struct InvertibilityReport {
  double norm_Bk = 0.0;
  bool predicate = false;      // analytic condition for the configured exponents
  bool contraction = false;    // norm_Bk < 1
  bool agree = false;
  std::string rule;
};
InvertibilityReport check_invertibility(const FoldyLaxSystem& sys, const ClusterConfig& cfg);

// Conditions under which the N-th truncation is asserted:
// 3D 0 <= 1-h-t <= min{1/(N+1), (1-t)/N} (t = 0: 0 <= 1-h <= 1/(N+1));
// 2D 1-t-h > 0.
bool born_condition(int dim, double h, double t, int N);

struct DirectSolution {
  CVec Q;
  double rcond = 0.0;
  double residual = 0.0;  // ||(I-B)Q - U|| / ||U||
};
DirectSolution solve_direct(const FoldyLaxSystem& sys);

struct BornSolution {
  std::vector<CVec> partial;     // Q^0 .. Q^N
  std::vector<CVec> increments;  // B^n U, n = 0..N
  bool converged = false;        // norm_Bk < 1
  double norm_Bk = 0.0;
  // ||B||^{N+1} / (1 - ||B||) ||U|| in the max norm (the vector norm that
  // induces the max-row-sum norm_Bk); infinite when not contractive.
  double bound(int N, double norm_U) const;
};
BornSolution solve_born(const FoldyLaxSystem& sys, int N_max);

// sum_j Phi(x, z_j) Cstar_j Q_j. Throws DomainError inside the exclusion radius.
cdouble scattered_field(const FoldyLaxSystem& sys, const CVec& Q, const Point& x);

struct Ladder {
  std::vector<cdouble> fields;      // u^{s,N}(x), N = 0..N_max
  std::vector<cdouble> increments;  // u^{s,N} - u^{s,N-1}; entry 0 is u^{s,0}
};
Ladder interaction_ladder(const FoldyLaxSystem& sys, const BornSolution& born, const Point& x);

// `count` points on the sphere (3D, Fibonacci lattice) or circle (2D) of the
// given radius about `center`.
std::vector<Point> evaluation_points(int dim, const Point& center, double radius, int count);
// Config default: radius 5 max(cluster diameter, 1) about the centroid.
double default_evaluation_radius(const ClusterConfig& cfg);
std::vector<Point> evaluation_points(const ClusterConfig& cfg);

// Bridge between the oracle's particle integrals V_m = int_{D_m} v and the
// Foldy-Lax amplitudes: Q_m = s_m V_m / Cstar_m.
CVec q_from_integrals(const FoldyLaxSystem& sys, const std::vector<double>& coupling, const CVec& V);

}  // namespace flx
