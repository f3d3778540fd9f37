#include "flx/foldylax.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "flx/kernels.hpp"

namespace flx {
namespace {

constexpr double kCriticalTol = 1e-12;

cdouble kernel(int dim, double kappa, const Point& x, const Point& y) {
  return dim == 2 ? green2d(kappa, x, y).value : green3d(kappa, x, y).value;
}

}  // namespace

FoldyLaxSystem assemble_system(int dim, double kappa, const Point& theta, const std::vector<Point>& centers,
                               const CVec& C, double exclusion_radius, SelfCoupling coupling) {
  const auto m = static_cast<Eigen::Index>(centers.size());
  if (m == 0) throw DomainError("Foldy-Lax system needs at least one particle");
  if (C.size() != m) throw DomainError("one scattering coefficient per particle required");
  if (dim != 2 && dim != 3) throw DomainError("dim must be 2 or 3");
  if (!(kappa > 0.0)) throw DomainError("wavenumber must be positive");
  FoldyLaxSystem s;
  s.dim = dim;
  s.kappa = kappa;
  s.theta = theta;
  s.centers = centers;
  s.exclusion_radius = exclusion_radius;
  s.C = C;
  s.denom = CVec::Ones(m);
  s.Cstar = C;
  for (Eigen::Index j = 0; j < m; ++j)
    if (!std::isfinite(std::abs(C[j]))) throw NumericalError("non-finite scattering coefficient");

  if (dim == 3) {
    const cdouble iu(0.0, 1.0);
    const cdouble factor = coupling == SelfCoupling::consistent ? iu * kappa / (4.0 * kPi) : iu * kappa;
    for (Eigen::Index j = 0; j < m; ++j) {
      s.denom[j] = 1.0 - factor * C[j];
      if (std::abs(s.denom[j]) < 1e-300) throw NumericalError("self-coupling factor vanishes");
    }
  } else {
    s.E = constant_E(kappa);
    // C* = (C^-1 - E)^-1, written so that C = 0 (no contrast) gives C* = 0.
    for (Eigen::Index j = 0; j < m; ++j) {
      const cdouble den = 1.0 - s.E * C[j];
      if (std::abs(den) == 0.0) throw NumericalError("C^-1 - E vanishes");
      s.Cstar[j] = C[j] / den;
    }
  }

  s.U.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) s.U[j] = incident_wave(kappa, theta, centers[j]) / s.denom[j];

  s.Bk = CMat::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      s.Bk(i, j) = kernel(dim, kappa, centers[i], centers[j]) * s.Cstar[j] / s.denom[i];
    }
  s.norm_Bk = m > 0 ? s.Bk.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  if (!s.Bk.allFinite()) throw NumericalError("non-finite interaction matrix");
  return s;
}

FoldyLaxSystem assemble(const Scene& scene, SelfCoupling coupling) {
  CVec C(static_cast<Eigen::Index>(scene.size()));
  for (std::size_t j = 0; j < scene.size(); ++j) C[static_cast<Eigen::Index>(j)] = scene.coefficients[j].C;
  const double excl = 5.0 * scene.cfg.delta * scene.cfg.shape.diameter;
  return assemble_system(scene.dim(), scene.kappa, scene.cfg.incident.theta, scene.cfg.centers, C, excl, coupling);
}

InvertibilityReport check_invertibility(const FoldyLaxSystem& sys, const ClusterConfig& cfg) {
  InvertibilityReport r;
  r.norm_Bk = sys.norm_Bk;
  r.contraction = sys.norm_Bk < 1.0;
  const double h = cfg.incident.h, t = cfg.spacing.t;
  if (sys.size() <= 1) {
    r.predicate = true;
    r.rule = "single particle: B_k = 0";
  } else if (cfg.dim == 3) {
    const double e = 1.0 - h - t;
    if (e > kCriticalTol) {
      r.predicate = true;
      r.rule = "1-h-t > 0";
    } else if (e < -kCriticalTol) {
      r.predicate = false;
      r.rule = "1-h-t < 0";
    } else {
      // Critical case: ||B_k|| ~ C0 d0 with C = C0 delta^{1-h}; the product
      // is read off the assembled norm.
      r.predicate = sys.norm_Bk < 1.0;
      r.rule = "1-h-t = 0: C0 d0 < 1";
    }
  } else {
    const double d = min_particle_distance(cfg);
    const double bound = std::exp(-std::pow(std::abs(std::log(cfg.delta)), 1.0 - h));
    r.predicate = d > bound;
    r.rule = "d > exp(-|log delta|^(1-h))";
  }
  r.agree = r.predicate == r.contraction;
  return r;
}

bool born_condition(int dim, double h, double t, int N) {
  const double e = 1.0 - h - t;
  if (dim == 2) return e > 0.0;
  if (N < 1) return e >= -kCriticalTol;
  const double cap = t == 0.0 ? 1.0 / (N + 1) : std::min(1.0 / (N + 1), (1.0 - t) / N);
  return e >= -kCriticalTol && e <= cap + kCriticalTol;
}

DirectSolution solve_direct(const FoldyLaxSystem& sys) {
  const auto m = static_cast<Eigen::Index>(sys.size());
  const CMat a = CMat::Identity(m, m) - sys.Bk;
  Eigen::PartialPivLU<CMat> lu(a);
  DirectSolution out;
  out.rcond = lu.rcond();
  if (!(out.rcond > 1e-12)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "Foldy-Lax system ill-conditioned (rcond %.3e)", out.rcond);
    throw NumericalError(buf);
  }
  out.Q = lu.solve(sys.U);
  const double nu = sys.U.norm();
  out.residual = (a * out.Q - sys.U).norm() / (nu > 0 ? nu : 1.0);
  if (out.residual > 1e-10) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "Foldy-Lax residual %.3e exceeds tolerance", out.residual);
    throw NumericalError(buf);
  }
  return out;
}

double BornSolution::bound(int N, double norm_U) const {
  if (!converged) return std::numeric_limits<double>::infinity();
  return std::pow(norm_Bk, N + 1) / (1.0 - norm_Bk) * norm_U;
}

BornSolution solve_born(const FoldyLaxSystem& sys, int N_max) {
  if (N_max < 0) throw DomainError("N_max must be nonnegative");
  BornSolution out;
  out.norm_Bk = sys.norm_Bk;
  out.converged = sys.norm_Bk < 1.0;
  CVec term = sys.U;
  CVec sum = term;
  out.increments.push_back(term);
  out.partial.push_back(sum);
  for (int n = 1; n <= N_max; ++n) {
    term = sys.Bk * term;
    sum += term;
    out.increments.push_back(term);
    out.partial.push_back(sum);
  }
  return out;
}

cdouble scattered_field(const FoldyLaxSystem& sys, const CVec& Q, const Point& x) {
  cdouble u = 0.0;
  for (std::size_t j = 0; j < sys.size(); ++j) {
    if ((x - sys.centers[j]).norm() < sys.exclusion_radius)
      throw DomainError("evaluation point inside the exclusion radius of particle " + std::to_string(j + 1));
    const auto jj = static_cast<Eigen::Index>(j);
    u += kernel(sys.dim, sys.kappa, x, sys.centers[j]) * sys.Cstar[jj] * Q[jj];
  }
  return u;
}

Ladder interaction_ladder(const FoldyLaxSystem& sys, const BornSolution& born, const Point& x) {
  Ladder l;
  cdouble acc = 0.0;
  for (const auto& inc : born.increments) {
    const cdouble d = scattered_field(sys, inc, x);
    acc += d;
    l.increments.push_back(d);
    l.fields.push_back(acc);
  }
  return l;
}

std::vector<Point> evaluation_points(int dim, const Point& center, double radius, int count) {
  if (count < 1) throw DomainError("need at least one evaluation point");
  std::vector<Point> pts;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    if (dim == 3) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      const double phi = golden * i;
      pts.push_back(center + radius * Point(r * std::cos(phi), r * std::sin(phi), z));
    } else {
      const double phi = 2.0 * kPi * (i + 0.5) / count;
      pts.push_back(center + radius * Point(std::cos(phi), std::sin(phi), 0.0));
    }
  }
  return pts;
}

double default_evaluation_radius(const ClusterConfig& cfg) {
  return cfg.evaluation.radius.value_or(5.0 * std::max(cluster_diameter(cfg), 1.0));
}

std::vector<Point> evaluation_points(const ClusterConfig& cfg) {
  return evaluation_points(cfg.dim, cluster_centroid(cfg), default_evaluation_radius(cfg), cfg.evaluation.count);
}

CVec q_from_integrals(const FoldyLaxSystem& sys, const std::vector<double>& coupling, const CVec& V) {
  if (V.size() != static_cast<Eigen::Index>(sys.size()) || coupling.size() != sys.size())
    throw DomainError("bridge needs one integral and one coupling per particle");
  CVec q(V.size());
  for (Eigen::Index j = 0; j < V.size(); ++j) q[j] = coupling[static_cast<std::size_t>(j)] * V[j] / sys.Cstar[j];
  return q;
}

}  // namespace flx
