// Command-line front end: oracle / run / compare / selftest.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "npwsim/config.hpp"
#include "npwsim/errors.hpp"
#include "npwsim/selftest.hpp"
#include "npwsim/simulation.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string npw_coefficient;
  std::string oracle_scheme = "exponential";
  std::string mean_field = "batch";
  bool diagonal_oracle = false;
  bool keep_going = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (defaults are used for absent keys)");
  cmd->add_option("--seed", f.seed, "Override the config seed");
  cmd->add_option("--npw-coefficient", f.npw_coefficient, "NPW weight noise coefficient")
      ->check(CLI::IsMember({"derived_two", "paper_one"}));
  cmd->add_option("--oracle-scheme", f.oracle_scheme, "Fock-basis integrator")
      ->check(CLI::IsMember({"exponential", "ito", "stratonovich"}));
  cmd->add_option("--mean-field", f.mean_field, "Mean-field reach: per estimator batch or whole ensemble")
      ->check(CLI::IsMember({"batch", "ensemble"}));
  cmd->add_flag("--continue-after-divergence", f.keep_going,
                "Keep evolving flagged ensembles until non-finite (output stays masked)");
  cmd->add_flag("--diagonal-oracle", f.diagonal_oracle, "Evolve populations only (purity column becomes sum p_n^2)");
}

npwsim::SimulationConfig resolve_config(const CommonFlags& f) {
  npwsim::SimulationConfig cfg;
  if (!f.config_path.empty()) cfg = npwsim::load_config(f.config_path);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.npw_coefficient.empty()) cfg.npw_noise_coefficient = npwsim::parse_npw_coefficient(f.npw_coefficient);
  return npwsim::validate_config(cfg);
}

npwsim::RunOptions resolve_options(const CommonFlags& f) {
  npwsim::RunOptions opts;
  opts.oracle_scheme = npwsim::parse_oracle_scheme(f.oracle_scheme);
  opts.continue_after_divergence = f.keep_going;
  opts.mean_field = npwsim::parse_mean_field_scope(f.mean_field);
  opts.oracle_storage = f.diagonal_oracle ? npwsim::MatrixStorage::diagonal : npwsim::MatrixStorage::full;
  return opts;
}

void report_divergence(const npwsim::RunManifest& m) {
  for (const auto& [name, st] : m.divergence) {
    if (st.diverged)
      std::cout << name << ": diverged at t=" << *st.time << " (" << npwsim::to_string(*st.cause) << ")\n";
    else
      std::cout << name << ": no divergence\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional number-measurement simulations: Fock-basis oracle, positive-P and number-phase Wigner"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "OpenMP thread count (env NPWSIM_THREADS or OMP_NUM_THREADS otherwise)");

  CommonFlags oracle_flags;
  std::string oracle_out = "oracle.csv";
  auto* oracle_cmd = app.add_subcommand("oracle", "Integrate the Fock-basis conditional master equation");
  add_common(oracle_cmd, oracle_flags);
  oracle_cmd->add_option("--out", oracle_out, "Output CSV (t, mean_n, var_n, trace_error, purity)");

  CommonFlags run_flags;
  std::string run_method;
  std::string run_out_dir = "results";
  auto* run_cmd = app.add_subcommand("run", "Run one method");
  add_common(run_cmd, run_flags);
  run_cmd->add_option("--method", run_method, "oracle | pplus | npw")
      ->required()
      ->check(CLI::IsMember({"oracle", "pplus", "npw"}));
  run_cmd->add_option("--out-dir", run_out_dir, "Output directory");

  CommonFlags cmp_flags;
  std::string cmp_out_dir = "results";
  bool no_pplus = false;
  bool no_npw = false;
  auto* cmp_cmd = app.add_subcommand("compare", "Oracle, P+ and NPW on one shared measurement record");
  add_common(cmp_cmd, cmp_flags);
  cmp_cmd->add_option("--out-dir", cmp_out_dir, "Output directory");
  cmp_cmd->add_flag("--no-pplus", no_pplus, "Skip the positive-P method");
  cmp_cmd->add_flag("--no-npw", no_npw, "Skip the NPW method");

  auto* self_cmd = app.add_subcommand("selftest", "Quick reduced-scale invariant checks");

  CLI11_PARSE(app, argc, argv);

  if (threads <= 0) {
    if (const char* env = std::getenv("NPWSIM_THREADS")) threads = std::atoi(env);
  }
  npwsim::set_thread_count(threads);

  try {
    if (*oracle_cmd) {
      const auto cfg = resolve_config(oracle_flags);
      const auto opts = resolve_options(oracle_flags);
      const std::filesystem::path out(oracle_out);
      if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
      const auto series = npwsim::run_oracle(cfg, opts);
      std::ofstream f(out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open '" + out.string() + "' for writing");
      f << npwsim::oracle_csv(npwsim::make_time_grid(cfg), series);
      if (!f) throw std::runtime_error("failed writing '" + out.string() + "'");
      std::cout << "wrote " << out.string() << "\n";
    } else if (*run_cmd) {
      const auto cfg = resolve_config(run_flags);
      const auto m = npwsim::run_simulation(cfg, npwsim::parse_method(run_method), run_out_dir,
                                            resolve_options(run_flags));
      for (const auto& [name, path] : m.outputs) std::cout << "wrote " << path << "\n";
      report_divergence(m);
    } else if (*cmp_cmd) {
      const auto cfg = resolve_config(cmp_flags);
      const auto m = npwsim::run_compare(cfg, cmp_out_dir, resolve_options(cmp_flags), {!no_npw, !no_pplus});
      for (const auto& [name, path] : m.outputs) std::cout << "wrote " << path << "\n";
      report_divergence(m);
    } else if (*self_cmd) {
      return npwsim::run_selftest(std::cout) == 0 ? 0 : 1;
    }
  } catch (const npwsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
