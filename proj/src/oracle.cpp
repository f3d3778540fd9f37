#include "flx/oracle.hpp"

#include <cmath>
#include <cstdio>

#include "flx/kernels.hpp"
#include "flx/parallel.hpp"

namespace flx {

LseSystem assemble_lse(const Scene& scene, double amplitude) {
  const auto& disc = scene.model->disc;
  const Eigen::Index nc = disc.size();
  const auto m = static_cast<Eigen::Index>(scene.size());
  const Eigen::Index n = nc * m;
  if (n > kOracleMaxUnknowns) {
    throw DomainError("oracle size cap exceeded: " + std::to_string(n) + " unknowns > " +
                      std::to_string(kOracleMaxUnknowns));
  }
  const int dim = scene.dim();
  const double kappa = scene.kappa;

  LseSystem sys;
  sys.dim = dim;
  sys.kappa = kappa;
  sys.theta = scene.cfg.incident.theta;
  sys.centers = scene.cfg.centers;
  sys.particle_extent = scene.cfg.delta * scene.cfg.shape.diameter;
  sys.weights.resize(n);
  sys.coupling.resize(n);
  for (Eigen::Index p = 0; p < m; ++p) {
    sys.offset.push_back(p * nc);
    const double s = scene.coupling(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < nc; ++i) {
      sys.points.push_back(scene.cfg.centers[static_cast<std::size_t>(p)] + disc.centers[static_cast<std::size_t>(i)]);
      sys.weights[p * nc + i] = disc.weights[i];
      sys.coupling[p * nc + i] = s;
    }
  }
  sys.offset.push_back(n);

  // Galerkin matrix of Phi_kappa (complex symmetric). Self blocks: the exact
  // Laplace Galerkin block plus the smooth remainder; other blocks: midpoint.
  sys.matrix.resize(n, n);
  const cdouble e = dim == 2 ? constant_E(kappa) : cdouble(0.0);
  const cdouble self3d(0.0, kappa / (4.0 * kPi));
  parallel_for(n, [&](Eigen::Index i) {
    const Eigen::Index pi = i / nc, li = i % nc;
    const double wi = sys.weights[i];
    for (Eigen::Index j = i; j < n; ++j) {
      const Eigen::Index pj = j / nc, lj = j % nc;
      const double wj = sys.weights[j];
      cdouble v;
      if (pi == pj) {
        v = disc.matrix(li, lj);
        if (dim == 3) {
          if (li == lj) {
            const double r = cell_mean_distance(3, wi, disc.cell_side);
            v += wi * wi * (self3d - kappa * kappa * r / (8.0 * kPi));
          } else {
            v += wi * wj * green3d_remainder(kappa, (sys.points[i] - sys.points[j]).norm());
          }
        } else {
          const double r = li == lj ? cell_mean_distance(2, wi, disc.cell_side)
                                    : (sys.points[i] - sys.points[j]).norm();
          v += wi * wj * (e + green2d_remainder(kappa, r));
        }
      } else {
        const auto& xi = sys.points[i];
        const auto& xj = sys.points[j];
        v = wi * wj * (dim == 2 ? green2d(kappa, xi, xj).value : green3d(kappa, xi, xj).value);
      }
      // Row scaling by 1/|cell_i| turns the Galerkin rows into collocation.
      sys.matrix(i, j) = -v / wi * sys.coupling[j];
      sys.matrix(j, i) = -v / wj * sys.coupling[i];
    }
  });
  sys.matrix.diagonal().array() += 1.0;

  sys.rhs.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) sys.rhs[i] = amplitude * incident_wave(kappa, sys.theta, sys.points[static_cast<std::size_t>(i)]);
  return sys;
}

LseSolution solve_lse(const LseSystem& sys) {
  Eigen::PartialPivLU<CMat> lu(sys.matrix);
  LseSolution out;
  out.rcond = lu.rcond();
  if (!(out.rcond > 1e-14)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "oracle system near-singular (rcond %.3e)", out.rcond);
    throw NumericalError(buf);
  }
  out.v = lu.solve(sys.rhs);
  const double nr = sys.rhs.norm();
  out.residual = (sys.matrix * out.v - sys.rhs).norm() / (nr > 0 ? nr : 1.0);
  if (out.residual > 1e-9) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "oracle residual %.3e exceeds tolerance", out.residual);
    throw NumericalError(buf);
  }
  const std::size_t m = sys.particles();
  out.integrals.resize(static_cast<Eigen::Index>(m));
  for (std::size_t p = 0; p < m; ++p) {
    const Eigen::Index a = sys.offset[p], len = sys.offset[p + 1] - a;
    const auto w = sys.weights.segment(a, len);
    const auto v = out.v.segment(a, len);
    out.integrals[static_cast<Eigen::Index>(p)] = (w.cast<cdouble>().array() * v.array()).sum();
    out.norms.push_back(std::sqrt((w.array() * v.array().abs2()).sum()));
  }
  return out;
}

LseSolution solve_lse(const Scene& scene, double amplitude) { return solve_lse(assemble_lse(scene, amplitude)); }

cdouble oracle_scattered_field(const LseSystem& sys, const LseSolution& sol, const Point& x,
                               double exclusion_radius) {
  const double guard = std::max(sys.particle_extent, exclusion_radius);
  for (std::size_t p = 0; p < sys.centers.size(); ++p)
    if ((x - sys.centers[p]).norm() < guard)
      throw DomainError("evaluation point inside or next to particle " + std::to_string(p + 1));
  cdouble u = 0.0;
  for (Eigen::Index l = 0; l < sys.size(); ++l) {
    const auto& y = sys.points[static_cast<std::size_t>(l)];
    const cdouble phi = sys.dim == 2 ? green2d(sys.kappa, x, y).value : green3d(sys.kappa, x, y).value;
    u += sys.coupling[l] * sys.weights[l] * phi * sol.v[l];
  }
  return u;
}

std::vector<double> apriori_diagnostics(const LseSystem& sys, const LseSolution& sol, double amplitude) {
  std::vector<double> out;
  for (std::size_t p = 0; p < sys.particles(); ++p) {
    const double measure = sys.weights.segment(sys.offset[p], sys.offset[p + 1] - sys.offset[p]).sum();
    out.push_back(sol.norms[p] / (std::abs(amplitude) * std::sqrt(measure)));
  }
  return out;
}

}  // namespace flx
