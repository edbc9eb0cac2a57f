#include "npwsim/selftest.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "npwsim/noise.hpp"
#include "npwsim/npw.hpp"
#include "npwsim/oracle.hpp"
#include "npwsim/simulation.hpp"

namespace npwsim {

namespace {

struct Check {
  std::string name;
  std::function<bool(std::string&)> run;
};

SimulationConfig small_config() {
  SimulationConfig cfg;
  cfg.alpha_amplitude = 3.0;
  cfg.fock_cutoff = 40;
  cfg.n_traj = 1000;
  cfg.t_final = 0.05;
  cfg.record_stride = 50;
  return validate_config(cfg);
}

}  // namespace

int run_selftest(std::ostream& out) {
  const std::vector<Check> checks = {
      {"oracle trace and hermiticity",
       [](std::string& detail) {
         const NoiseStreams streams(7);
         auto rho = init_coherent_density(3.0, 0.4, 40);
         double herm = 0.0;
         double trace_err = 0.0;
         for (std::int64_t k = 0; k < 1000; ++k) {
           step_master_exponential(rho, streams.measurement(k, 1e-4), 1e-4, 1.0, Exec::parallel, k);
           herm = std::max(herm, hermiticity_error(rho));
           trace_err = std::max(trace_err, std::abs(trace(rho) - 1.0));
         }
         detail = "hermiticity " + std::to_string(herm) + ", trace error " + std::to_string(trace_err);
         return herm <= 1e-12 && trace_err <= 1e-9;
       }},
      {"number state is a fixed point",
       [](std::string& detail) {
         auto rho = DensityMatrix::number_state(5, 20, MatrixStorage::full);
         for (auto scheme : {OracleScheme::ito, OracleScheme::stratonovich, OracleScheme::exponential})
           step_master(scheme, rho, 0.3, 1e-3, 1.0, 3);
         detail = "population " + std::to_string(rho.population(5));
         return rho.population(5) == 1.0 && variance_number(rho) == 0.0;
       }},
      {"NPW number conservation and weight positivity",
       [](std::string& detail) {
         const NoiseStreams streams(11);
         auto ens = init_npw_coherent(3.0, 0.0, 1000, streams);
         const auto n0 = ens.number;
         std::vector<double> dv1(ens.size());
         bool positive = true;
         for (std::int64_t k = 0; k < 500; ++k) {
           draw_fictitious(streams, StreamTag::fictitious_v1, k, 1e-4, dv1);
           step_npw(ens, streams.measurement(k, 1e-4), dv1, 1e-4, 1.0, NpwNoiseCoefficient::derived_two);
           for (double lw : ens.log_weight) positive = positive && std::isfinite(lw);
         }
         detail = positive ? "all weights positive" : "non-positive weight";
         return positive && ens.number == n0;
       }},
      {"stream separation (P+ toggle)",
       [](std::string& detail) {
         const auto cfg = small_config();
         const auto with = compare(cfg, {}, {true, true});
         const auto without = compare(cfg, {}, {true, false});
         const bool same = with.oracle.mean_n == without.oracle.mean_n && with.npw->mean_n == without.npw->mean_n;
         detail = same ? "oracle and NPW channels identical" : "channels differ";
         return same;
       }},
      {"oracle martingale (100 paths)",
       [](std::string& detail) {
         double sum = 0.0;
         double sum2 = 0.0;
         const int paths = 100;
         for (int p = 0; p < paths; ++p) {
           const NoiseStreams streams(1000 + p);
           auto rho = init_coherent_density(3.0, 0.0, 40, MatrixStorage::diagonal);
           for (std::int64_t k = 0; k < 500; ++k) step_master_exponential(rho, streams.measurement(k, 1e-4), 1e-4, 1.0);
           const double m = mean_number(rho);
           sum += m;
           sum2 += m * m;
         }
         const double mean = sum / paths;
         const double se = std::sqrt((sum2 / paths - mean * mean) / (paths - 1));
         detail = "mean " + std::to_string(mean) + " +- " + std::to_string(se);
         return std::abs(mean - 9.0) <= 3.0 * se;
       }},
  };

  int failures = 0;
  for (const auto& c : checks) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = e.what();
    }
    out << (ok ? "PASS " : "FAIL ") << c.name << " (" << detail << ")\n";
    if (!ok) ++failures;
  }
  return failures;
}

}  // namespace npwsim
