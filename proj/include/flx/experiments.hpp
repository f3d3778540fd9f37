#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flx/config.hpp"
#include "flx/foldylax.hpp"

namespace flx {

// ---- slope fitting ---------------------------------------------------------

enum class Abscissa { log_delta, log_log_delta };
std::string_view to_string(Abscissa a);
Abscissa parse_abscissa(std::string_view s);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  Abscissa kind = Abscissa::log_delta;
  std::size_t points = 0;
};

// Least squares of log y against log x (log_delta) or log|log x|
// (log_log_delta). Needs >= 4 points with y > 0.
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, Abscissa kind = Abscissa::log_delta);

// ---- tables ----------------------------------------------------------------

using Cell = std::variant<double, long long, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  void add(std::vector<Cell> row);
};

// "%.16e": 17 significant digits, '.' decimal point.
std::string format_number(double v);
void write_csv(std::ostream& os, const Table& t);

// ---- sweeps ----------------------------------------------------------------

struct SweepSpec {
  std::vector<double> deltas;     // empty: 4 geometric points (3D 0.08..0.034, 2D e^-3..e^-6)
  std::vector<int> orders{1, 2};  // Born truncation orders N
  bool oracle = true;
  SelfCoupling coupling = SelfCoupling::consistent;
  int born_max = 0;  // extra Born terms for the ladder (0: max(orders))
  double tolerance = 0.3;
  std::optional<std::filesystem::path> cache_dir;
  int jobs = 1;
};

struct SweepRecord {
  double delta = 0.0;
  double h = 0.0;
  double t = 0.0;
  int N = 0;
  double k = 0.0;
  double kappa = 0.0;
  double d = 0.0;            // measured minimum distance (inf for M = 1)
  double norm_Bk = 0.0;
  double C = 0.0;            // particle 1
  double norm_w = 0.0;       // particle 1
  bool predicate = false;    // truncation condition for this N
  bool invertible = false;   // analytic invertibility predicate
  double field_direct = 0.0; // mean |u^{s,inf}|
  double field_born = 0.0;   // mean |u^{s,N}|
  double field_oracle = 0.0; // mean |u^s| (NaN without oracle)
  double error_direct = 0.0; // mean |u^s - u^{s,inf}|
  double error_born = 0.0;   // mean |u^s - u^{s,N}|
  double increment = 0.0;    // mean |u^{s,N} - u^{s,N-1}|
  double apriori = 0.0;      // max_m ||v_m|| / ||u^i||_{D_m}
};

struct FitReport {
  std::string quantity;
  int N = -1;  // -1: not order-dependent
  double target = 0.0;
  SlopeFit fit;
  bool accepted = false;  // |slope - target| <= tolerance
  std::size_t excluded = 0;  // rows dropped by the truncation predicate
};

struct SweepResult {
  ClusterConfig base;
  SweepSpec spec;
  double evaluation_radius = 0.0;
  std::vector<SweepRecord> records;  // delta descending, then N ascending
  std::vector<FitReport> fits;
  double span_decades = 0.0;
};

// Runs every delta of the grid (concurrently, spec.jobs workers) and fits
// the predicted exponents. Rows failing the truncation predicate are kept
// but excluded from the order-dependent fits.
SweepResult run_sweep(const ClusterConfig& base, const SweepSpec& spec);

Table sweep_table(const SweepResult& r);
// Predicted exponent for a sweep quantity; nullopt when no prediction applies.
std::optional<double> predicted_slope(int dim, const std::string& quantity, double h, double t, int N);
Abscissa sweep_abscissa(int dim, const std::string& quantity);

// Default delta grid for the config's dimension.
std::vector<double> default_deltas(int dim);

}  // namespace flx
