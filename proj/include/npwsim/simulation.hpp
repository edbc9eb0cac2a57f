#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "npwsim/config.hpp"
#include "npwsim/oracle.hpp"
#include "npwsim/parallel.hpp"
#include "npwsim/stats.hpp"

namespace npwsim {

enum class Method { oracle, pplus, npw };

std::string to_string(Method m);
Method parse_method(const std::string& s);

/// How far the ensemble mean field reaches. batch: each estimator batch runs
/// its own E_f, so batches are independent. ensemble: one E_f over all trajectories.
enum class MeanFieldScope { batch, ensemble };

std::string to_string(MeanFieldScope s);
MeanFieldScope parse_mean_field_scope(const std::string& s);

struct RunOptions {
  OracleScheme oracle_scheme = OracleScheme::exponential;
  MatrixStorage oracle_storage = MatrixStorage::full;
  Exec exec = Exec::parallel;
  /// Keep stepping a flagged ensemble until its state turns non-finite. Output
  /// channels are masked from the divergence time either way; the raw values are
  /// kept in MethodSeries for diagnostics.
  bool continue_after_divergence = false;
  MeanFieldScope mean_field = MeanFieldScope::batch;
};

struct OracleSeries {
  std::vector<double> mean_n;
  std::vector<double> var_n;
  std::vector<double> trace_error;
  std::vector<double> purity;
};

/// Per-output-time channels of a weighted-trajectory method. Entries are NaN
/// where the ensemble was no longer evolved.
struct MethodSeries {
  std::vector<double> mean_n;
  std::vector<double> mean_n_imag;
  std::vector<double> mean_n2;
  std::vector<double> precision;
  std::vector<double> ess;
  std::vector<double> weight_sum;
  std::vector<double> phase_spread;
  DivergenceStatus divergence;

  /// True if row `i` (at time t) is at or after the divergence time.
  bool masked(double t) const { return divergence.diverged && t >= *divergence.time; }
};

/// Output grid shared by every method of a run.
struct TimeGrid {
  std::vector<std::int64_t> steps;
  std::vector<double> times;
};

TimeGrid make_time_grid(const SimulationConfig& cfg);

OracleSeries run_oracle(const SimulationConfig& cfg, const RunOptions& opts = {});
MethodSeries run_npw(const SimulationConfig& cfg, const RunOptions& opts = {});
MethodSeries run_pplus(const SimulationConfig& cfg, const RunOptions& opts = {});

struct ComparisonReport {
  SimulationConfig config;
  TimeGrid grid;
  OracleSeries oracle;
  std::optional<MethodSeries> npw;
  std::optional<MethodSeries> pplus;
  std::vector<double> npw_accuracy;
  std::vector<double> pplus_accuracy;
  std::map<std::string, double> seconds;
};

struct CompareMethods {
  bool npw = true;
  bool pplus = true;
};

/// Oracle, P+ and NPW on the identical measurement record.
ComparisonReport compare(const SimulationConfig& cfg, const RunOptions& opts = {}, CompareMethods methods = {});

// CSV writers. One header line; missing values are empty fields.
std::string oracle_csv(const TimeGrid& grid, const OracleSeries& s);
std::string npw_csv(const TimeGrid& grid, const MethodSeries& s);
std::string pplus_csv(const TimeGrid& grid, const MethodSeries& s);
std::string compare_csv(const ComparisonReport& r);

struct RunManifest {
  SimulationConfig config;
  std::string version;
  std::map<std::string, std::string> outputs;  ///< method -> CSV path
  std::map<std::string, double> seconds;       ///< method -> wall clock
  std::map<std::string, DivergenceStatus> divergence;
  std::string oracle_scheme;
  std::string mean_field;
};

std::string manifest_json(const RunManifest& m);
std::string artifact_version();

/// Run one method and write `<out_dir>/<method>.csv` plus `<out_dir>/<method>_manifest.json`.
RunManifest run_simulation(const SimulationConfig& cfg, Method method, const std::string& out_dir,
                           const RunOptions& opts = {});
/// Run compare and write `<out_dir>/compare.csv` plus `<out_dir>/compare_manifest.json`.
RunManifest run_compare(const SimulationConfig& cfg, const std::string& out_dir, const RunOptions& opts = {},
                        CompareMethods methods = {});

}  // namespace npwsim
