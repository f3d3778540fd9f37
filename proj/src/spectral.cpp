#include "flx/spectral.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "flx/parallel.hpp"

namespace flx {
namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * kPi);
constexpr double kInv2Pi = 1.0 / (2.0 * kPi);
constexpr int kSubsamples = 12;            // per axis, for partial cells
constexpr Eigen::Index kDenseLimit = 1200; // partial spectra above this use subspace iteration
constexpr double kMomentFloor = 1e-8;

bool curved(ShapeKind k) { return k == ShapeKind::ball3d || k == ShapeKind::disc2d; }

struct ReferenceCells {
  double side = 0.0;
  std::vector<Point> centers;
  std::vector<double> weights;
};

// Cells of B on a res^dim grid over its bounding box.
ReferenceCells reference_cells(const ReferenceShape& shape, int res) {
  const int dim = shape.dim();
  const double a = shape.half_extent();
  const double h = 2.0 * a / res;
  const double cellm = std::pow(h, dim);
  const int nz = dim == 3 ? res : 1;
  ReferenceCells out;
  out.side = h;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < res; ++j)
      for (int i = 0; i < res; ++i) {
        Point c(-a + (i + 0.5) * h, -a + (j + 0.5) * h, dim == 3 ? -a + (k + 0.5) * h : 0.0);
        if (!curved(shape.kind)) {
          out.centers.push_back(shape.center + c);
          out.weights.push_back(cellm);
          continue;
        }
        // Nearest and farthest points of the cell from the shape center.
        Point lo = Point::Zero(), hi = Point::Zero();
        for (int d = 0; d < dim; ++d) {
          const double m = std::abs(c[d]);
          lo[d] = std::max(0.0, m - h / 2);
          hi[d] = m + h / 2;
        }
        if (hi.norm() <= a) {
          out.centers.push_back(shape.center + c);
          out.weights.push_back(cellm);
          continue;
        }
        if (lo.norm() >= a) continue;
        int inside = 0;
        Point sum = Point::Zero();
        const int sz = dim == 3 ? kSubsamples : 1;
        for (int r = 0; r < sz; ++r)
          for (int q = 0; q < kSubsamples; ++q)
            for (int p = 0; p < kSubsamples; ++p) {
              Point s = c;
              s.x() += (-0.5 + (p + 0.5) / kSubsamples) * h;
              s.y() += (-0.5 + (q + 0.5) / kSubsamples) * h;
              if (dim == 3) s.z() += (-0.5 + (r + 0.5) / kSubsamples) * h;
              if (s.squaredNorm() <= a * a) {
                ++inside;
                sum += s;
              }
            }
        if (inside == 0) continue;
        const double total = std::pow(double(kSubsamples), dim);
        out.centers.push_back(shape.center + sum / inside);
        out.weights.push_back(cellm * inside / total);
      }
  return out;
}

double laplace(int dim, double r) { return dim == 3 ? kInv4Pi / r : -kInv2Pi * std::log(r); }

void fill_matrix(NewtonianDiscretization& d) {
  const Eigen::Index n = d.size();
  d.matrix.resize(n, n);
  parallel_for(n, [&](Eigen::Index i) {
    d.matrix(i, i) = cell_self_integral(d.dim, d.weights[i], d.cell_side);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = d.weights[i] * d.weights[j] * laplace(d.dim, (d.centers[i] - d.centers[j]).norm());
      d.matrix(i, j) = v;
      d.matrix(j, i) = v;
    }
  });
}

void fix_signs(Mat& y) {
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    const double big = y.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      if (std::abs(y(i, c)) > 1e-12 * big) {
        if (y(i, c) < 0) y.col(c) *= -1.0;
        break;
      }
    }
  }
}

// Top-p eigenpairs of a symmetric matrix by block power iteration with
// Rayleigh-Ritz; converged when each of the leading `want` residuals is
// below tol * ||S||.
void subspace_iteration(const Mat& s, int want, Vec& values, Mat& vectors) {
  const Eigen::Index n = s.rows();
  const Eigen::Index p = std::min<Eigen::Index>(n, want + std::max(8, want));
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Mat x(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  x = Eigen::HouseholderQR<Mat>(x).householderQ() * Mat::Identity(n, p);

  double worst = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const Mat y = s * x;
    const Mat h = x.transpose() * y;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.transpose()));
    // Ritz pairs, reordered to descending.
    const Vec theta = es.eigenvalues().reverse();
    const Mat v = es.eigenvectors().rowwise().reverse();
    const Mat z = x * v;
    const Mat az = y * v;
    const double norm = theta.cwiseAbs().maxCoeff();
    worst = 0.0;
    for (int c = 0; c < want; ++c) worst = std::max(worst, (az.col(c) - theta[c] * z.col(c)).norm());
    if (worst <= 1e-11 * norm) {
      values = theta.head(want);
      vectors = z.leftCols(want);
      return;
    }
    x = Eigen::HouseholderQR<Mat>(az).householderQ() * Mat::Identity(n, p);
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "eigensolver did not converge (residual %.3e)", worst);
  throw NumericalError(buf);
}

}  // namespace

double cell_self_integral(int dim, double w, double side) {
  const double full = std::pow(side, dim);
  const bool is_full = std::abs(w - full) <= 1e-12 * full;
  if (dim == 3) {
    if (is_full) return std::pow(side, 5) * kCubeSelf * kInv4Pi;
    const double r = std::cbrt(3.0 * w / (4.0 * kPi));
    return 8.0 * kPi * std::pow(r, 5) / 15.0;
  }
  if (is_full) return -kInv2Pi * std::pow(side, 4) * (std::log(side) + kSquareSelf);
  const double r = std::sqrt(w / kPi);
  return -0.5 * kPi * std::pow(r, 4) * (std::log(r) - 0.25);
}

double cell_mean_distance(int dim, double w, double side) {
  const double full = std::pow(side, dim);
  const bool is_full = std::abs(w - full) <= 1e-12 * full;
  if (dim == 3) return is_full ? kCubeMeanDistance * side : 36.0 / 35.0 * std::cbrt(3.0 * w / (4.0 * kPi));
  return is_full ? kSquareMeanDistance * side : 128.0 / (45.0 * kPi) * std::sqrt(w / kPi);
}

Mat NewtonianDiscretization::normalized() const {
  const Vec inv = weights.cwiseSqrt().cwiseInverse();
  return inv.asDiagonal() * matrix * inv.asDiagonal();
}

NewtonianDiscretization assemble_newtonian(const ReferenceShape& shape, int resolution, double delta) {
  if (resolution < 2) throw DomainError("resolution must be at least 2");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  const auto ref = reference_cells(shape, resolution);
  if (ref.centers.size() < 8)
    throw DomainError("resolution " + std::to_string(resolution) + " yields fewer than 8 cells");
  NewtonianDiscretization d;
  d.shape = shape;
  d.dim = shape.dim();
  d.resolution = resolution;
  d.delta = delta;
  d.cell_side = delta * ref.side;
  const double wscale = std::pow(delta, d.dim);
  d.weights.resize(static_cast<Eigen::Index>(ref.weights.size()));
  for (std::size_t i = 0; i < ref.centers.size(); ++i) {
    d.centers.push_back(delta * ref.centers[i]);
    d.weights[static_cast<Eigen::Index>(i)] = wscale * ref.weights[i];
  }
  fill_matrix(d);
  return d;
}

NewtonianDiscretization rescale(const NewtonianDiscretization& ref, double delta) {
  const double f = delta / ref.delta;
  NewtonianDiscretization d = ref;
  d.delta = delta;
  d.cell_side = f * ref.cell_side;
  for (auto& c : d.centers) c *= f;
  if (d.dim == 3) {
    d.weights *= f * f * f;
    d.matrix *= std::pow(f, 5);
  } else {
    d.weights *= f * f;
    const double shift = -std::log(f) * kInv2Pi;
    d.matrix = std::pow(f, 4) * (ref.matrix + shift * ref.weights * ref.weights.transpose());
  }
  return d;
}

int SpectralData::default_resonance_index() const {
  for (Eigen::Index n = 0; n < count(); ++n)
    if (excitable(static_cast<int>(n))) return static_cast<int>(n);
  throw DomainError("no excitable mode: all moments vanish");
}

bool SpectralData::excitable(int n) const {
  return n >= 0 && n < count() && moments[n] * moments[n] > kMomentFloor * measure;
}

SpectralData eigensystem(const NewtonianDiscretization& disc, int count) {
  const Eigen::Index n = disc.size();
  if (count < 0 || count > n) throw DomainError("eigenpair count exceeds number of cells");
  const Mat s = disc.normalized();
  SpectralData out;
  out.dim = disc.dim;
  out.delta = disc.delta;
  out.sqrt_weights = disc.weights.cwiseSqrt();
  out.measure = disc.measure();
  const int want = count == 0 ? static_cast<int>(n) : count;
  if (count == 0 || n <= kDenseLimit) {
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    Mat vecs;
    Vec vals;
    if (es.info() == Eigen::Success) {
      vals = es.eigenvalues();
      vecs = es.eigenvectors();
    } else {
      // Eigen's tridiagonal QR can stall on highly degenerate grid spectra
      // (e.g. the ball at resolution 14). A fixed random orthogonal similarity
      // breaks the structure; eigenvectors are mapped back.
      std::mt19937_64 rng(0x5eed);
      std::normal_distribution<double> normal;
      Mat g(n, n);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(rng);
      const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
      const Mat t = q.transpose() * s * q;
      Eigen::SelfAdjointEigenSolver<Mat> es2(0.5 * (t + t.transpose()));
      if (es2.info() != Eigen::Success) throw NumericalError("dense eigensolver failed to converge");
      vals = es2.eigenvalues();
      vecs = q * es2.eigenvectors();
    }
    out.eigenvalues = vals.reverse().head(want);
    out.eigenvectors = vecs.rowwise().reverse().leftCols(want);
  } else {
    subspace_iteration(s, want, out.eigenvalues, out.eigenvectors);
  }
  out.complete = want == n;
  fix_signs(out.eigenvectors);
  out.moments = out.eigenvectors.transpose() * out.sqrt_weights;

  const double norm = out.eigenvalues.cwiseAbs().maxCoeff();
  const Mat r = s * out.eigenvectors - out.eigenvectors * out.eigenvalues.asDiagonal();
  out.max_residual = r.colwise().norm().maxCoeff() / norm;
  if (out.max_residual > 1e-10) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "eigenpair residual %.3e exceeds tolerance", out.max_residual);
    throw NumericalError(buf);
  }
  return out;
}

SpectralData rescale(const SpectralData& ref, double delta) {
  if (ref.dim != 3) throw DomainError("spectral rescaling is exact only in 3D");
  const double f = delta / ref.delta;
  SpectralData out = ref;
  out.delta = delta;
  out.eigenvalues *= f * f;
  out.moments *= std::pow(f, 1.5);
  out.sqrt_weights *= std::pow(f, 1.5);
  out.measure *= f * f * f;
  return out;
}

ScatteringCoefficient scattering_function(const SpectralData& spec, double k, double contrast, double a0) {
  const double s = k * k * contrast / a0;
  if (!(s > 0.0)) throw DomainError("scattering function needs k^2 * contrast / a0 > 0");
  ScatteringCoefficient out;
  out.shift = 1.0 / s;
  const Vec gap = out.shift - spec.eigenvalues.array();
  const double floor = 1e-14 * std::abs(spec.eigenvalues[0]);
  Eigen::Index worst;
  const double g = gap.cwiseAbs().minCoeff(&worst);
  if (g < floor) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "exact resonance: mode n=%ld gap %.3e below %.3e", long(worst), g, floor);
    throw NumericalError(buf);
  }
  out.coefficients = spec.moments.cwiseQuotient(gap);
  out.C = spec.moments.dot(out.coefficients);
  out.norm_w = out.coefficients.norm();
  return out;
}

ScatteringCoefficient scattering_function_dense(const NewtonianDiscretization& disc, double k, double contrast,
                                                double a0) {
  const double s = k * k * contrast / a0;
  if (!(s > 0.0)) throw DomainError("scattering function needs k^2 * contrast / a0 > 0");
  ScatteringCoefficient out;
  out.shift = 1.0 / s;
  const Vec sw = disc.weights.cwiseSqrt();
  const Mat a = out.shift * Mat::Identity(disc.size(), disc.size()) - disc.normalized();
  Eigen::PartialPivLU<Mat> lu(a);
  const Vec w = lu.solve(sw);
  out.C = sw.dot(w);
  out.norm_w = w.norm();
  return out;
}

std::vector<DielectricResonance> dielectric_resonances(const SpectralData& spec, double gamma, double a0,
                                                       int count) {
  if (!(gamma > 0.0)) throw DomainError("dielectric resonances need gamma > 0");
  std::vector<DielectricResonance> out;
  for (Eigen::Index n = 0; n < spec.count() && static_cast<int>(out.size()) < count; ++n) {
    if (!spec.excitable(static_cast<int>(n)) || spec.eigenvalues[n] <= 0.0) continue;
    out.push_back({static_cast<int>(n), std::sqrt(a0 / (gamma * spec.eigenvalues[n]))});
  }
  if (out.empty()) throw DomainError("no excitable mode: all moments vanish");
  return out;
}

double detuned_wavenumber(int dim, double k_n, double delta, double h, int sign) {
  const double eps = dim == 3 ? std::pow(delta, h) : std::pow(std::abs(std::log(delta)), -h);
  const double factor = 1.0 + sign * eps;
  if (!(factor > 0.0)) throw DomainError("detuning drives k^2 nonpositive");
  return k_n * std::sqrt(factor);
}

std::vector<SurfacePanel> surface_mesh(const ReferenceShape& shape, int level) {
  if (shape.dim() != 3) throw DomainError("surface meshes are 3D only");
  if (level < 0) throw DomainError("mesh level must be nonnegative");
  std::vector<SurfacePanel> out;
  const Point c0 = shape.center;
  if (shape.kind == ShapeKind::cube3d) {
    const double a = shape.half_extent();
    const int m = 2 << level;
    const double h = 2.0 * a / m;
    for (int axis = 0; axis < 3; ++axis)
      for (int side : {-1, 1}) {
        const int u = (axis + 1) % 3, v = (axis + 2) % 3;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) {
            Point x = c0;
            x[axis] += side * a;
            x[u] += -a + (i + 0.5) * h;
            x[v] += -a + (j + 0.5) * h;
            Point nrm = Point::Zero();
            nrm[axis] = side;
            out.push_back({x, nrm, h * h});
          }
      }
    return out;
  }
  // Icosphere: subdivided icosahedron; panel weights are the flat areas
  // projected radially onto the sphere.
  const double r = shape.half_extent();
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Point> vtx = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                            {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : vtx) p.normalize();
  std::vector<std::array<int, 3>> tri = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::vector<std::array<int, 3>> next;
    // Edge midpoints, keyed by the lower vertex index.
    std::vector<std::vector<std::pair<int, int>>> adj(vtx.size());
    auto mid = [&](int a, int b) {
      const auto [lo, hi] = std::minmax(a, b);
      for (const auto& [other, idx] : adj[lo])
        if (other == hi) return idx;
      vtx.push_back((vtx[lo] + vtx[hi]).normalized());
      const int idx = static_cast<int>(vtx.size()) - 1;
      adj[lo].push_back({hi, idx});
      return idx;
    };
    for (const auto& f : tri) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tri.swap(next);
  }
  out.reserve(tri.size());
  for (const auto& f : tri) {
    const Point a = r * vtx[f[0]], b = r * vtx[f[1]], c = r * vtx[f[2]];
    const Point g = (a + b + c) / 3.0;
    const Point cr = (b - a).cross(c - a);
    const double flat = 0.5 * cr.norm();
    const Point nf = cr.normalized();
    const double gn = g.norm();
    const double area = flat * std::abs(nf.dot(g)) * r * r / (gn * gn * gn);
    out.push_back({c0 + r * g / gn, g / gn, area});
  }
  return out;
}

double theta_boundary(const ReferenceShape& shape, int level) {
  const auto panels = surface_mesh(shape, level);
  const std::size_t n = panels.size();
  double total_area = 0.0;
  for (const auto& p : panels) total_area += p.area;
  std::vector<double> rows(n, 0.0);
  parallel_for(static_cast<Eigen::Index>(n), [&](Eigen::Index ii) {
    const auto& pi = panels[static_cast<std::size_t>(ii)];
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == static_cast<std::size_t>(ii)) continue;  // self panel: integrand vanishes to leading order
      const Point d = pi.x - panels[j].x;
      acc += panels[j].area * d.dot(pi.normal) / d.norm();
    }
    rows[static_cast<std::size_t>(ii)] = pi.area * acc;
  });
  double sum = 0.0;
  for (double v : rows) sum += v;
  return sum * kInv4Pi / total_area;
}

double minnaert_wavenumber(double theta_D, double a0, double a1) {
  if (!(theta_D > 0.0) || !(a0 > 0.0) || !(a1 > 0.0)) throw DomainError("Minnaert formula needs positive inputs");
  return std::sqrt(std::sqrt(8.0 * kPi * a0 / (a1 * theta_D)));
}

MinnaertResult minnaert_resonance(const ReferenceShape& shape, double delta, double a0, double a1, int level) {
  if (level < 1) throw DomainError("Minnaert quadrature needs level >= 1");
  const double coarse = theta_boundary(shape, level - 1);
  const double fine = theta_boundary(shape, level);
  MinnaertResult out;
  out.drift = std::abs(fine - coarse) / std::abs(fine);
  if (out.drift > 0.01) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "surface quadrature not converged: drift %.3e between levels", out.drift);
    throw NumericalError(buf);
  }
  // Centroid-rule error is O(h^2); one Richardson step.
  out.theta_B = fine + (fine - coarse) / 3.0;
  out.theta_D = delta * delta * out.theta_B;
  out.k_M = minnaert_wavenumber(out.theta_D, a0, a1);
  return out;
}

PlasmonicResult plasmonic_resonances(double eps0, double k_p, const std::vector<double>& sigma) {
  if (!(eps0 > 0.0) || !(k_p > 0.0)) throw DomainError("plasmonic formula needs eps0 > 0 and k_p > 0");
  PlasmonicResult out;
  for (std::size_t n = 0; n < sigma.size(); ++n) {
    // The closed endpoint 1/2 is admitted so that its zero radicand (eps0 = 1) is reported as skipped.
    if (sigma[n] < -0.5 || sigma[n] > 0.5) throw DomainError("sigma entries must lie in [-1/2, 1/2]");
    const double rad = eps0 - 0.5 - sigma[n];
    if (rad <= 0.0) {
      out.skipped.push_back(n);
      continue;
    }
    out.k.push_back(std::sqrt(k_p * k_p / eps0 * rad));
    out.used.push_back(n);
  }
  if (out.k.empty()) throw DomainError("no admissible plasmonic resonance (all radicands nonpositive)");
  return out;
}

// ---- cache -----------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

constexpr char kMagic[4] = {'F', 'L', 'X', 'S'};
constexpr std::uint32_t kCacheVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

std::string spectral_cache_key(const ReferenceShape& shape, int resolution, double delta, int count) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "v%u|%s|%.17g|%.17g|%.17g|%.17g|%d|%.17g|%d", kCacheVersion,
                std::string(to_string(shape.kind)).c_str(), shape.diameter, shape.center.x(), shape.center.y(),
                shape.center.z(), resolution, delta, count);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (const char* p = buf; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ull;
  }
  char out[32];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void save_spectral(const std::filesystem::path& file, const SpectralData& spec) {
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error("cannot write cache file " + tmp);
    os.write(kMagic, 4);
    put(os, kCacheVersion);
    put(os, static_cast<std::int32_t>(spec.dim));
    put(os, static_cast<std::int64_t>(spec.sqrt_weights.size()));
    put(os, static_cast<std::int64_t>(spec.count()));
    put(os, spec.delta);
    put(os, spec.measure);
    put(os, static_cast<std::uint8_t>(spec.complete));
    put(os, spec.max_residual);
    auto block = [&](const double* p, Eigen::Index n) {
      os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    };
    block(spec.eigenvalues.data(), spec.eigenvalues.size());
    block(spec.moments.data(), spec.moments.size());
    block(spec.sqrt_weights.data(), spec.sqrt_weights.size());
    block(spec.eigenvectors.data(), spec.eigenvectors.size());
    if (!os) throw Error("short write to cache file " + tmp);
  }
  std::filesystem::rename(tmp, file);
}

std::optional<SpectralData> load_spectral(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[4];
  std::uint32_t version = 0;
  std::int32_t dim = 0;
  std::int64_t n = 0, count = 0;
  std::uint8_t complete = 0;
  SpectralData s;
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) return std::nullopt;
  if (!get(is, version) || version != kCacheVersion) return std::nullopt;
  if (!get(is, dim) || !get(is, n) || !get(is, count) || !get(is, s.delta) || !get(is, s.measure) ||
      !get(is, complete) || !get(is, s.max_residual))
    return std::nullopt;
  if (n <= 0 || count <= 0 || count > n || (dim != 2 && dim != 3)) return std::nullopt;
  s.dim = dim;
  s.complete = complete != 0;
  s.eigenvalues.resize(count);
  s.moments.resize(count);
  s.sqrt_weights.resize(n);
  s.eigenvectors.resize(n, count);
  auto block = [&](double* p, Eigen::Index m) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(m * sizeof(double))));
  };
  if (!block(s.eigenvalues.data(), count) || !block(s.moments.data(), count) || !block(s.sqrt_weights.data(), n) ||
      !block(s.eigenvectors.data(), n * count))
    return std::nullopt;
  return s;
}

}  // namespace flx
