// flx: command-line driver for spectra, resonances, solves, delta sweeps and slope fits.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "flx/config.hpp"
#include "flx/experiments.hpp"
#include "flx/foldylax.hpp"
#include "flx/oracle.hpp"
#include "flx/parallel.hpp"
#include "flx/scene.hpp"
#include "flx/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flx;

namespace {

constexpr int kSchemaVersion = 1;

struct Common {
  std::string config;
  std::string out = ".";
  int resolution = 0;
  std::string cache;
  int jobs = 1;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", c.config, "Config document (JSON)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--resolution", c.resolution, "Cells per side (overrides the config)")->check(CLI::PositiveNumber);
  cmd->add_option("--cache", c.cache, "Spectral cache directory");
  cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

ClusterConfig load_config(const Common& c) {
  std::ifstream in(c.config, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + c.config + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ClusterConfig cfg = parse_config(ss.str());
  if (c.resolution > 0) cfg.resolution = c.resolution;
  return cfg;
}

ModelOptions model_options(const Common& c) {
  ModelOptions mo;
  if (!c.cache.empty()) mo.cache_dir = fs::path(c.cache);
  return mo;
}

// Files land under their final name only once complete; on failure every
// file this command produced is removed.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }
  template <class Writer>
  void write(const std::string& name, Writer&& w) {
    fs::create_directories(dir_);
    const fs::path target = dir_ / name;
    const fs::path tmp = dir_ / (name + ".tmp");
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw Error("cannot write '" + tmp.string() + "'");
      try {
        w(os);
      } catch (...) {
        os.close();
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
      }
      os.flush();
      if (!os) throw Error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
    written_.push_back(target);
    std::cout << target.string() << "\n";
  }
  void write_json(const std::string& name, const json& j) {
    write(name, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
  }
  void write_table(const std::string& name, const Table& t) {
    write(name, [&](std::ostream& os) { write_csv(os, t); });
  }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool committed_ = false;
};

json header(const char* command) { return json{{"schema_version", kSchemaVersion}, {"command", command}}; }

json complex_json(cdouble z) { return json::array({z.real(), z.imag()}); }

json point_json(const Point& x, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(x[i]);
  return a;
}

json table_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::string>)
              r[t.columns[c]] = v.empty() ? json(nullptr) : json(v);
            else
              r[t.columns[c]] = v;
          },
          row[c]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---- spectrum ----------------------------------------------------------------

void cmd_spectrum(const Common& c, int count) {
  const ClusterConfig cfg = load_config(c);
  ModelOptions mo = model_options(c);
  mo.count = count;
  const ShapeModel ref = reference_model(cfg.shape, cfg.resolution, mo);
  const ShapeModel phys = particle_model(ref, cfg.delta, count);
  const auto& rs = ref.spectrum;
  const auto& ps = phys.spectrum;

  Table t;
  t.columns = {"index", "eigenvalue_reference", "eigenvalue", "moment", "moment_squared", "excitable"};
  for (Eigen::Index n = 0; n < rs.count(); ++n)
    t.add({static_cast<long long>(n), rs.eigenvalues[n], ps.eigenvalues[n], ps.moments[n],
           ps.moments[n] * ps.moments[n], ps.excitable(static_cast<int>(n))});

  OutputSet out(c.out);
  if (c.format == "csv") {
    out.write_table("spectrum.csv", t);
  } else {
    json j = header("spectrum");
    j["shape"] = to_string(cfg.shape.kind);
    j["resolution"] = cfg.resolution;
    j["delta"] = cfg.delta;
    j["cells"] = ref.disc.size();
    j["measure_reference"] = rs.measure;
    j["complete"] = rs.complete;
    j["max_residual"] = rs.max_residual;
    j["default_resonance_index"] = rs.default_resonance_index();
    j["modes"] = table_json(t);
    out.write_json("spectrum.json", j);
  }
  out.commit();
}

// ---- resonances --------------------------------------------------------------

void cmd_resonances(const Common& c, int count) {
  const ClusterConfig cfg = load_config(c);
  const auto& rp = cfg.regime;
  const double a0 = cfg.background.a0;
  json j = header("resonances");
  j["regime"] = to_string(rp.kind);
  j["delta"] = cfg.delta;
  Table t;
  t.columns = {"kind", "index", "k", "k_detuned"};
  auto detune = [&](double kn) { return detuned_wavenumber(cfg.dim, kn, cfg.delta, cfg.incident.h, cfg.incident.sign); };

  if (rp.kind == Regime::third) {
    const ShapeModel ref = reference_model(cfg.shape, cfg.resolution, model_options(c));
    const ShapeModel phys = particle_model(ref, cfg.delta);
    const auto contrasts = derive_contrasts(cfg);
    const auto res = dielectric_resonances(phys.spectrum, contrasts.gamma.front(), a0, count);
    json list = json::array();
    for (const auto& r : res) {
      const double kd = detune(r.k);
      list.push_back({{"index", r.index}, {"k", r.k}, {"k_detuned", kd}});
      t.add({std::string("dielectric"), static_cast<long long>(r.index), r.k, kd});
    }
    j["dielectric"] = list;
  } else if (rp.kind == Regime::first) {
    const double a1 = rp.c_a / (cfg.delta * cfg.delta);
    const auto m = minnaert_resonance(cfg.shape, cfg.delta, a0, a1, rp.surface_resolution);
    const double kd = detune(m.k_M);
    j["minnaert"] = {{"k", m.k_M},           {"k_detuned", kd},   {"theta_reference", m.theta_B},
                     {"theta_particle", m.theta_D}, {"drift", m.drift}, {"a1", a1},
                     {"surface_resolution", rp.surface_resolution}};
    t.add({std::string("minnaert"), 0LL, m.k_M, kd});
  } else {
    const auto p = plasmonic_resonances(rp.eps0, rp.k_p, rp.sigma);
    json list = json::array();
    for (std::size_t i = 0; i < p.k.size(); ++i) {
      const double kd = detune(p.k[i]);
      list.push_back({{"index", p.used[i]}, {"sigma", rp.sigma[p.used[i]]}, {"k", p.k[i]}, {"k_detuned", kd}});
      t.add({std::string("plasmonic"), static_cast<long long>(p.used[i]), p.k[i], kd});
    }
    j["plasmonic"] = list;
    j["skipped"] = p.skipped;
  }

  OutputSet out(c.out);
  if (c.format == "csv")
    out.write_table("resonances.csv", t);
  else
    out.write_json("resonances.json", j);
  out.commit();
}

// ---- solve -------------------------------------------------------------------

void cmd_solve(const Common& c, int born, bool oracle, bool literal) {
  const ClusterConfig cfg = load_config(c);
  const Scene scene = build_scene(cfg, model_options(c));
  const auto sys = assemble(scene, literal ? SelfCoupling::literal : SelfCoupling::consistent);
  const auto inv = check_invertibility(sys, cfg);
  const auto direct = solve_direct(sys);
  const auto bs = solve_born(sys, born);
  const double radius = default_evaluation_radius(cfg);
  const auto pts = evaluation_points(cfg);

  std::optional<LseSystem> lse;
  std::optional<LseSolution> lsol;
  if (oracle) {
    lse = assemble_lse(scene);
    lsol = solve_lse(*lse);
  }

  Table t;
  t.columns = {"variant", "N", "x", "y", "z", "re", "im"};
  json samples = json::array();
  auto sample = [&](const std::string& variant, long long N, const Point& x, cdouble v) {
    t.add({variant, N, x[0], x[1], x[2], v.real(), v.imag()});
    json s = {{"variant", variant}, {"x", point_json(x, cfg.dim)}, {"value", complex_json(v)}};
    if (N >= 0) s["N"] = N;
    samples.push_back(s);
  };
  for (const auto& x : pts) {
    sample("direct", -1, x, scattered_field(sys, direct.Q, x));
    const auto ladder = interaction_ladder(sys, bs, x);
    for (int N = 0; N <= born; ++N) sample("born", N, x, ladder.fields[static_cast<std::size_t>(N)]);
    if (oracle) sample("oracle", -1, x, oracle_scattered_field(*lse, *lsol, x, sys.exclusion_radius));
  }

  OutputSet out(c.out);
  if (c.format == "csv") {
    out.write_table("solve.csv", t);
  } else {
    auto vec = [](const CVec& v) {
      json a = json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_json(v[i]));
      return a;
    };
    json j = header("solve");
    j["k"] = scene.k;
    j["kappa"] = scene.kappa;
    j["k_resonance"] = scene.k_resonance;
    j["n0"] = scene.n0;
    j["self_coupling"] = literal ? "literal" : "consistent";
    j["C"] = vec(sys.C);
    j["Cstar"] = vec(sys.Cstar);
    j["U"] = vec(sys.U);
    j["Q_direct"] = vec(direct.Q);
    j["rcond"] = direct.rcond;
    j["residual"] = direct.residual;
    j["norm_Bk"] = sys.norm_Bk;
    j["converged"] = bs.converged;
    const double nu = sys.U.lpNorm<Eigen::Infinity>();
    json qb = json::array();
    for (int N = 0; N <= born; ++N) {
      const auto n = static_cast<std::size_t>(N);
      json e = {{"N", N}, {"Q", vec(bs.partial[n])}, {"error", (bs.partial[n] - direct.Q).lpNorm<Eigen::Infinity>()}};
      if (bs.converged) e["bound"] = bs.bound(N, nu);
      qb.push_back(e);
    }
    j["Q_born"] = qb;
    j["invertibility"] = {{"predicate", inv.predicate}, {"contraction", inv.contraction}, {"agree", inv.agree},
                          {"rule", inv.rule}};
    j["evaluation_radius"] = radius;
    j["exclusion_radius"] = sys.exclusion_radius;
    if (oracle) j["oracle"] = {{"unknowns", lse->size()}, {"rcond", lsol->rcond}, {"residual", lsol->residual}};
    j["samples"] = samples;
    out.write_json("solve.json", j);
  }
  out.commit();
}

// ---- sweep -------------------------------------------------------------------

json fit_json(const SlopeFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"abscissa", to_string(f.kind)},
          {"points", f.points}};
}

void cmd_sweep(const Common& c, SweepSpec spec) {
  const ClusterConfig cfg = load_config(c);
  if (!c.cache.empty()) spec.cache_dir = fs::path(c.cache);
  spec.jobs = c.jobs;
  const SweepResult r = run_sweep(cfg, spec);
  const Table t = sweep_table(r);

  json j = header("sweep");
  j["evaluation_radius"] = r.evaluation_radius;
  j["evaluation_points"] = cfg.evaluation.count;
  j["span_decades"] = r.span_decades;
  j["half_decade"] = r.span_decades >= 0.5;
  j["self_coupling"] = spec.coupling == SelfCoupling::literal ? "literal" : "consistent";
  j["oracle"] = spec.oracle;
  j["tolerance"] = r.spec.tolerance;
  j["deltas"] = r.spec.deltas;
  j["orders"] = r.spec.orders;
  json fits = json::array();
  for (const auto& f : r.fits) {
    json e = {{"quantity", f.quantity}, {"target", f.target}, {"accepted", f.accepted},
              {"excluded", f.excluded}, {"fit", fit_json(f.fit)}};
    if (f.N >= 0) e["N"] = f.N;
    fits.push_back(e);
  }
  j["fits"] = fits;

  OutputSet out(c.out);
  if (c.format == "csv") {
    out.write_table("sweep.csv", t);
  } else {
    j["records"] = table_json(t);
  }
  out.write_json("sweep_fits.json", j);
  out.commit();
}

// ---- fit ---------------------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

void cmd_fit(const Common& c, const std::string& input, const std::string& xcol, const std::string& ycol,
             const std::string& kind, std::optional<int> order) {
  std::ifstream in(input);
  if (!in) throw ConfigError("cannot read input table '" + input + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("input table '" + input + "' is empty");
  const auto cols = split_csv_line(line);
  auto col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return i;
    return std::nullopt;
  };
  const auto ix = col(xcol), iy = col(ycol);
  if (!ix) throw ConfigError("column '" + xcol + "' not found in '" + input + "'");
  if (!iy) throw ConfigError("column '" + ycol + "' not found in '" + input + "'");
  const auto ip = col("predicate"), iN = col("N");
  if (order && !iN) throw ConfigError("column 'N' not found in '" + input + "'");

  std::vector<double> x, y;
  std::size_t excluded = 0, row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != cols.size()) throw ConfigError("row " + std::to_string(row) + " has the wrong number of fields");
    if (order && std::stoi(f[*iN]) != *order) continue;
    if (ip && f[*ip] == "false") {
      ++excluded;
      continue;
    }
    if (f[*ix].empty() || f[*iy].empty()) {
      ++excluded;
      continue;
    }
    x.push_back(std::stod(f[*ix]));
    y.push_back(std::stod(f[*iy]));
  }
  const SlopeFit fit = fit_slope(x, y, parse_abscissa(kind));

  OutputSet out(c.out);
  if (c.format == "csv") {
    Table t;
    t.columns = {"x", "y", "abscissa", "slope", "intercept", "r2", "points", "excluded"};
    t.add({xcol, ycol, std::string(to_string(fit.kind)), fit.slope, fit.intercept, fit.r2,
           static_cast<long long>(fit.points), static_cast<long long>(excluded)});
    out.write_table("fit.csv", t);
  } else {
    json j = header("fit");
    j["input"] = input;
    j["x"] = xcol;
    j["y"] = ycol;
    if (order) j["N"] = *order;
    j["excluded"] = excluded;
    j["fit"] = fit_json(fit);
    out.write_json("fit.json", j);
  }
  out.commit();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flx: Foldy-Lax cluster scattering toolkit"};
  app.require_subcommand(1);

  Common common;
  int count = 0;
  auto* spectrum = app.add_subcommand("spectrum", "Newtonian-operator eigenpairs and moments");
  add_common(spectrum, common);
  spectrum->add_option("--count", count, "Eigenpairs kept (0 = all)")->check(CLI::NonNegativeNumber);

  int res_count = 5;
  auto* resonances = app.add_subcommand("resonances", "Dielectric, Minnaert or plasmonic resonances");
  add_common(resonances, common);
  resonances->add_option("--count", res_count, "Dielectric resonances listed")->check(CLI::PositiveNumber);

  int born = 5;
  bool oracle = false, literal = false;
  auto* solve = app.add_subcommand("solve", "Foldy-Lax solve with field samples");
  add_common(solve, common);
  solve->add_option("--born", born, "Highest Born order")->check(CLI::NonNegativeNumber);
  solve->add_flag("--oracle", oracle, "Also solve the volume integral equation");
  solve->add_flag("--literal-coupling", literal, "Use the literal 1 - i k C self-interaction");

  SweepSpec spec;
  bool no_oracle = false, sweep_literal = false;
  auto* sweep = app.add_subcommand("sweep", "Delta sweep with exponent fits");
  add_common(sweep, common);
  sweep->add_option("--deltas", spec.deltas, "Delta grid (>= 4 values)")->delimiter(',');
  sweep->add_option("--orders", spec.orders, "Born orders N")->delimiter(',');
  sweep->add_option("--tolerance", spec.tolerance, "Accepted |slope - target|")->capture_default_str();
  sweep->add_flag("--no-oracle", no_oracle, "Skip the volume-integral oracle");
  sweep->add_flag("--literal-coupling", sweep_literal, "Use the literal 1 - i k C self-interaction");

  std::string input, xcol = "delta", ycol, kind = "log_delta";
  std::optional<int> order;
  auto* fit = app.add_subcommand("fit", "Power-law fit of two columns of a CSV table");
  add_common(fit, common, false);
  fit->add_option("--input", input, "CSV table")->required()->check(CLI::ExistingFile);
  fit->add_option("--x", xcol, "Abscissa column")->capture_default_str();
  fit->add_option("--y", ycol, "Ordinate column")->required();
  fit->add_option("--kind", kind, "Abscissa kind")->check(CLI::IsMember({"log_delta", "log_log_delta"}))->capture_default_str();
  fit->add_option("--N", order, "Keep only rows with this Born order");

  CLI11_PARSE(app, argc, argv);

  try {
    set_worker_count(common.jobs);
    if (*spectrum) cmd_spectrum(common, count);
    if (*resonances) cmd_resonances(common, res_count);
    if (*solve) cmd_solve(common, born, oracle, literal);
    if (*sweep) {
      spec.oracle = !no_oracle;
      spec.coupling = sweep_literal ? SelfCoupling::literal : SelfCoupling::consistent;
      cmd_sweep(common, spec);
    }
    if (*fit) cmd_fit(common, input, xcol, ycol, kind, order);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
