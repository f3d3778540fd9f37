#include "flx/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "flx/oracle.hpp"
#include "flx/parallel.hpp"
#include "flx/scene.hpp"

namespace flx {

std::string_view to_string(Abscissa a) { return a == Abscissa::log_delta ? "log_delta" : "log_log_delta"; }

Abscissa parse_abscissa(std::string_view s) {
  if (s == "log_delta") return Abscissa::log_delta;
  if (s == "log_log_delta") return Abscissa::log_log_delta;
  throw ConfigError("unknown abscissa kind '" + std::string(s) + "'");
}

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, Abscissa kind) {
  if (x.size() != y.size()) throw DomainError("fit_slope: x and y differ in length");
  if (x.size() < 4) throw DomainError("fit_slope: at least 4 points required");
  const auto n = static_cast<Eigen::Index>(x.size());
  Vec u(n), v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)], yi = y[static_cast<std::size_t>(i)];
    if (!(yi > 0.0) || !std::isfinite(yi)) throw DomainError("fit_slope: ordinates must be positive and finite");
    if (!(xi > 0.0)) throw DomainError("fit_slope: abscissae must be positive");
    const double lx = std::log(xi);
    if (kind == Abscissa::log_log_delta && lx == 0.0) throw DomainError("fit_slope: log|log x| undefined at x = 1");
    u[i] = kind == Abscissa::log_delta ? lx : std::log(std::abs(lx));
    v[i] = std::log(yi);
  }
  const double um = u.mean(), vm = v.mean();
  const Vec du = u.array() - um, dv = v.array() - vm;
  const double sxx = du.squaredNorm();
  if (!(sxx > 1e-300)) throw DomainError("fit_slope: degenerate abscissa (all equal)");
  SlopeFit f;
  f.kind = kind;
  f.points = x.size();
  f.slope = du.dot(dv) / sxx;
  f.intercept = vm - f.slope * um;
  const double syy = dv.squaredNorm();
  const double sse = (dv - f.slope * du).squaredNorm();
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw Error("table row width mismatch");
  rows.push_back(std::move(row));
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct CellWriter {
  std::ostream& os;
  void operator()(double v) const { os << format_number(v); }
  void operator()(long long v) const { os << v; }
  void operator()(const std::string& s) const { os << csv_escape(s); }
  void operator()(bool b) const { os << (b ? "true" : "false"); }
};

}  // namespace

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << csv_escape(t.columns[c]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ",";
      std::visit(CellWriter{os}, row[c]);
    }
    os << "\n";
  }
}

std::vector<double> default_deltas(int dim) {
  if (dim == 2) return {std::exp(-3.0), std::exp(-4.0), std::exp(-5.0), std::exp(-6.0)};
  return {0.08, 0.06, 0.045, 0.034};
}

Abscissa sweep_abscissa(int dim, const std::string& quantity) {
  if (dim == 3) return Abscissa::log_delta;
  return quantity == "error_direct" ? Abscissa::log_delta : Abscissa::log_log_delta;
}

std::optional<double> predicted_slope(int dim, const std::string& q, double h, double t, int N) {
  const double e = 1.0 - t - h;
  if (dim == 3) {
    if (q == "error_direct") return std::min(2.0 - h, 3.0 - 2.0 * h - 2.0 * t);
    if (q == "error_born") return (1.0 - h) + (N + 1) * e;
    if (q == "increment") return (1.0 - h) + N * e;
    if (q == "norm_Bk") return e;
    if (q == "C") return 1.0 - h;
    if (q == "norm_w") return -0.5 - h;
    if (q == "apriori") return -h;
    return std::nullopt;
  }
  if (q == "error_direct") return 1.0 - t;
  if (q == "error_born") return (h - 1.0) - (N + 1) * e;
  if (q == "increment") return (h - 1.0) - N * e;
  if (q == "norm_Bk") return -e;
  if (q == "C") return h - 1.0;
  return std::nullopt;
}

namespace {

struct DeltaRows {
  std::vector<SweepRecord> rows;
};

DeltaRows run_delta(const ClusterConfig& base, const ShapeModel& ref, const SweepSpec& spec, double delta,
                    const Point& center, double radius, int born_max) {
  const ClusterConfig cfg = with_delta(base, delta);
  const Scene scene = build_scene(cfg, ref);
  const auto sys = assemble(scene, spec.coupling);
  const auto inv = check_invertibility(sys, cfg);
  const auto direct = solve_direct(sys);
  const auto born = solve_born(sys, born_max);
  const auto pts = evaluation_points(cfg.dim, center, radius, cfg.evaluation.count);

  std::vector<cdouble> u_fl, u_or;
  std::vector<Ladder> ladders;
  for (const auto& x : pts) {
    u_fl.push_back(scattered_field(sys, direct.Q, x));
    ladders.push_back(interaction_ladder(sys, born, x));
  }
  double apriori = std::numeric_limits<double>::quiet_NaN();
  if (spec.oracle) {
    const auto lse = assemble_lse(scene);
    const auto sol = solve_lse(lse);
    for (const auto& x : pts) u_or.push_back(oracle_scattered_field(lse, sol, x, sys.exclusion_radius));
    const auto ratios = apriori_diagnostics(lse, sol);
    apriori = *std::max_element(ratios.begin(), ratios.end());
  }

  const double np = static_cast<double>(pts.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DeltaRows out;
  for (int N : spec.orders) {
    SweepRecord r;
    r.delta = delta;
    r.h = cfg.incident.h;
    r.t = cfg.spacing.t;
    r.N = N;
    r.k = scene.k;
    r.kappa = scene.kappa;
    r.d = min_particle_distance(cfg);
    r.norm_Bk = sys.norm_Bk;
    r.C = scene.coefficients[0].C;
    r.norm_w = scene.coefficients[0].norm_w;
    r.predicate = born_condition(cfg.dim, r.h, r.t, N);
    r.invertible = inv.predicate;
    r.field_oracle = spec.oracle ? 0.0 : nan;
    r.error_direct = spec.oracle ? 0.0 : nan;
    r.error_born = spec.oracle ? 0.0 : nan;
    r.apriori = apriori;
    for (std::size_t p = 0; p < pts.size(); ++p) {
      const auto& l = ladders[p];
      r.field_direct += std::abs(u_fl[p]) / np;
      r.field_born += std::abs(l.fields[static_cast<std::size_t>(N)]) / np;
      r.increment += std::abs(l.increments[static_cast<std::size_t>(N)]) / np;
      if (spec.oracle) {
        r.field_oracle += std::abs(u_or[p]) / np;
        r.error_direct += std::abs(u_or[p] - u_fl[p]) / np;
        r.error_born += std::abs(u_or[p] - l.fields[static_cast<std::size_t>(N)]) / np;
      }
    }
    for (double v : {r.k, r.norm_Bk, r.C, r.norm_w, r.field_direct, r.field_born, r.increment}) {
      if (!std::isfinite(v)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "non-finite sweep record at delta=%.6g", delta);
        throw NumericalError(buf);
      }
    }
    out.rows.push_back(r);
  }
  return out;
}

void add_fit(SweepResult& res, const std::string& quantity, int N, const std::vector<double>& x,
             const std::vector<double>& y, std::size_t excluded) {
  const auto& b = res.base;
  const auto target = predicted_slope(b.dim, quantity, b.incident.h, b.spacing.t, N < 0 ? 0 : N);
  if (!target || x.size() < 4) return;
  FitReport f;
  f.quantity = quantity;
  f.N = N;
  f.target = *target;
  f.excluded = excluded;
  f.fit = fit_slope(x, y, sweep_abscissa(b.dim, quantity));
  if (quantity == "apriori")
    f.accepted = f.fit.slope <= 0.0 && f.fit.slope >= f.target - 0.2;  // monitored band [-h-0.2, 0]
  else
    f.accepted = std::abs(f.fit.slope - f.target) <= res.spec.tolerance;
  res.fits.push_back(f);
}

}  // namespace

SweepResult run_sweep(const ClusterConfig& base, const SweepSpec& spec_in) {
  SweepResult res;
  res.base = base;
  res.spec = spec_in;
  auto& spec = res.spec;
  if (spec.deltas.empty()) spec.deltas = default_deltas(base.dim);
  if (spec.deltas.size() < 4) throw DomainError("sweep needs at least 4 delta values");
  if (spec.orders.empty()) spec.orders = {0};
  for (int N : spec.orders)
    if (N < 0) throw DomainError("Born orders must be nonnegative");
  std::sort(spec.deltas.begin(), spec.deltas.end(), std::greater<>());
  if (std::adjacent_find(spec.deltas.begin(), spec.deltas.end()) != spec.deltas.end())
    throw DomainError("sweep deltas must be distinct");
  res.span_decades = std::log10(spec.deltas.front() / spec.deltas.back());
  const int born_max = std::max(spec.born_max, *std::max_element(spec.orders.begin(), spec.orders.end()));

  ModelOptions mo;
  mo.cache_dir = spec.cache_dir;
  const ShapeModel ref = reference_model(base.shape, base.resolution, mo);
  // Evaluation sphere fixed by the largest delta for the whole sweep.
  const ClusterConfig widest = with_delta(base, spec.deltas.front());
  res.evaluation_radius = default_evaluation_radius(widest);
  const Point center = cluster_centroid(widest);

  std::vector<DeltaRows> per(spec.deltas.size());
  parallel_for(
      static_cast<Eigen::Index>(spec.deltas.size()),
      [&](Eigen::Index i) {
        const auto ii = static_cast<std::size_t>(i);
        per[ii] = run_delta(base, ref, spec, spec.deltas[ii], center, res.evaluation_radius, born_max);
      },
      spec.jobs);
  for (auto& p : per)
    for (auto& r : p.rows) res.records.push_back(r);

  // Order-independent quantities: one value per delta (the first order's row).
  std::vector<double> xs;
  std::vector<double> c, w, nb, ed, ap;
  for (const auto& r : res.records) {
    if (r.N != spec.orders.front()) continue;
    xs.push_back(r.delta);
    c.push_back(std::abs(r.C));
    w.push_back(r.norm_w);
    nb.push_back(r.norm_Bk);
    ed.push_back(r.error_direct);
    ap.push_back(r.apriori);
  }
  add_fit(res, "C", -1, xs, c, 0);
  if (base.dim == 3) add_fit(res, "norm_w", -1, xs, w, 0);
  if (base.size() >= 2) add_fit(res, "norm_Bk", -1, xs, nb, 0);
  if (spec.oracle) {
    add_fit(res, "error_direct", -1, xs, ed, 0);
    if (base.dim == 3) add_fit(res, "apriori", -1, xs, ap, 0);
  }
  for (int N : spec.orders) {
    std::vector<double> x, inc, eb;
    std::size_t excluded = 0;
    for (const auto& r : res.records) {
      if (r.N != N) continue;
      if (!r.predicate) {
        ++excluded;
        continue;
      }
      x.push_back(r.delta);
      inc.push_back(r.increment);
      eb.push_back(r.error_born);
    }
    if (base.size() >= 2 || N == 0) add_fit(res, "increment", N, x, inc, excluded);
    if (spec.oracle) add_fit(res, "error_born", N, x, eb, excluded);
  }
  return res;
}

Table sweep_table(const SweepResult& r) {
  Table t;
  t.columns = {"delta",        "h",           "t",          "N",           "k",          "kappa",
               "d",            "norm_Bk",     "C",          "norm_w",      "predicate",  "invertible",
               "field_direct", "field_born",  "field_oracle", "error_direct", "error_born", "increment",
               "apriori",      "eval_radius", "provenance"};
  auto opt = [](double v) -> Cell { return std::isfinite(v) ? Cell(v) : Cell(std::string()); };
  const std::string prov = r.spec.oracle ? "run_sweep:foldylax+oracle" : "run_sweep:foldylax";
  for (const auto& s : r.records) {
    t.add({s.delta, s.h, s.t, static_cast<long long>(s.N), s.k, s.kappa, opt(s.d), s.norm_Bk, s.C, s.norm_w,
           s.predicate, s.invertible, s.field_direct, s.field_born, opt(s.field_oracle), opt(s.error_direct),
           opt(s.error_born), s.increment, opt(s.apriori), r.evaluation_radius, prov});
  }
  return t;
}

}  // namespace flx
