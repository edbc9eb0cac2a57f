// Acceptance suite: one PASS/FAIL line per criterion, exit code = number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "npwsim/npw.hpp"
#include "npwsim/oracle.hpp"
#include "npwsim/simulation.hpp"

using namespace npwsim;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(int id, bool ok, const std::string& what, const std::string& detail, double secs, double budget) {
  const bool in_time = secs <= budget;
  ok = ok && in_time;
  if (!ok) ++failures;
  std::printf("%s criterion %d: %s | %s | %.1fs (budget %.0fs)%s\n", ok ? "PASS" : "FAIL", id, what.c_str(),
              detail.c_str(), secs, budget, in_time ? "" : " OVER BUDGET");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---- 1: stepper vs closed form, dt and dt/2 on one Brownian path ------------

struct PathError {
  double coarse = 0.0;
  double fine = 0.0;
};

// 3 fixed-point sweeps leave the implicit midpoint unconverged on steps where the
// tail noise factor is large (seed 1 reaches 0.077 near t=0.008); 10 converge it.
constexpr int kMidpointIterations = 10;

double closed_form_error(OracleScheme scheme, const DensityMatrix& rho0, const std::vector<double>& dw, double dt,
                         double gamma) {
  auto rho = rho0;
  std::vector<double> w{0.0}, nbar{mean_number(rho)};
  for (std::size_t k = 0; k < dw.size(); ++k) {
    step_master(scheme, rho, dw[k], dt, gamma, kMidpointIterations, Exec::serial, static_cast<std::int64_t>(k));
    w.push_back(w.back() + dw[k]);
    nbar.push_back(mean_number(rho));
  }
  const auto rec = reconstruct_record(w, nbar, dt, gamma);
  double err = 0.0;
  for (std::size_t k = 0; k < nbar.size(); ++k)
    err = std::max(err, std::abs(mean_number(closed_form_linear_solution(rho0, rec, k, gamma)) - nbar[k]));
  return err;
}

PathError refinement_pair(OracleScheme scheme, std::uint64_t seed, double dt, double t, double gamma) {
  const auto rho0 = init_coherent_density(10.0, 0.0, 200, MatrixStorage::diagonal);
  const double h = dt / 2.0;
  const auto fine_steps = static_cast<std::size_t>(std::llround(t / h));
  NoiseStreams s(seed);
  std::vector<double> fine(fine_steps), coarse(fine_steps / 2);
  for (std::size_t k = 0; k < fine_steps; ++k) fine[k] = s.measurement(static_cast<std::int64_t>(k), h);
  for (std::size_t k = 0; k < coarse.size(); ++k) coarse[k] = fine[2 * k] + fine[2 * k + 1];
  return {closed_form_error(scheme, rho0, coarse, dt, gamma), closed_form_error(scheme, rho0, fine, h, gamma)};
}

void criterion_1() {
  const auto t0 = Clock::now();
  const int seeds = 6;
  double worst = 0.0, sum_c = 0.0, sum_f = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    const auto e = refinement_pair(OracleScheme::stratonovich, static_cast<std::uint64_t>(s), 1e-5, 0.2, 1.0);
    worst = std::max(worst, e.coarse);
    sum_c += e.coarse;
    sum_f += e.fine;
  }
  const double ratio = sum_c / sum_f;
  const bool ok = worst <= 5e-2 && std::abs(ratio - 2.0) <= 0.6;
  report(1, ok, "oracle stepper vs closed form (stratonovich midpoint x10, amplitude 10, dt=1e-5, t<=0.2)",
         "max|dn| " + fmt("%.3g", worst) + " <= 5e-2 over " + std::to_string(seeds) + " paths; error ratio dt/(dt/2) " +
             fmt("%.3f", ratio) + " in [1.4, 2.6]",
         seconds_since(t0), 120);
}

// ---- 2: conservation --------------------------------------------------------

void criterion_2() {
  const auto t0 = Clock::now();
  SimulationConfig cfg = validate_config(SimulationConfig{});
  NoiseStreams streams(cfg.seed);

  auto rho = init_coherent_density(cfg.alpha_amplitude, cfg.alpha_phase, cfg.fock_cutoff);
  double trace_err = 0.0, herm = 0.0;
  for (std::int64_t k = 0; k < cfg.steps(); ++k) {
    step_master_exponential(rho, streams.measurement(k, cfg.dt), cfg.dt, cfg.gamma, Exec::parallel, k);
    trace_err = std::max(trace_err, std::abs(trace(rho) - 1.0));
    herm = std::max(herm, hermiticity_error(rho));
  }

  auto ens = init_npw_coherent(cfg.alpha_amplitude, cfg.alpha_phase, cfg.n_traj, streams, Exec::parallel,
                               cfg.batch_count);
  const auto n0 = ens.number;
  std::vector<double> dv(ens.size());
  bool positive = true;
  for (std::int64_t k = 0; k < cfg.steps(); ++k) {
    draw_fictitious(streams, StreamTag::fictitious_v1, k, cfg.dt, dv, Exec::parallel);
    step_npw(ens, streams.measurement(k, cfg.dt), dv, cfg.dt, cfg.gamma, cfg.npw_noise_coefficient);
    for (double l : ens.log_weight) positive = positive && std::isfinite(l);
  }
  const bool conserved = ens.number == n0;
  const bool ok = trace_err <= 1e-9 && herm <= 1e-12 && conserved && positive;
  report(2, ok, "conservation over a full t=0.5 run",
         "trace err " + fmt("%.2g", trace_err) + " <= 1e-9; hermiticity " + fmt("%.2g", herm) +
             " <= 1e-12; NPW numbers " + (conserved ? "unchanged" : "CHANGED") + "; NPW weights " +
             (positive ? "all positive" : "NOT positive"),
         seconds_since(t0), 120);
}

// ---- 3: martingale -----------------------------------------------------------

void criterion_3() {
  const auto t0 = Clock::now();
  const int paths = 500;
  const double dt = 1e-4, gamma = 1.0;
  const auto rho0 = init_coherent_density(10.0, 0.0, 200, MatrixStorage::diagonal);
  std::vector<double> fin(paths);
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < paths; ++p) {
    auto rho = rho0;
    NoiseStreams s(1000 + static_cast<std::uint64_t>(p));
    for (std::int64_t k = 0; k < 1000; ++k) step_master_exponential(rho, s.measurement(k, dt), dt, gamma, Exec::serial, k);
    fin[p] = mean_number(rho);
  }
  double m = 0.0, q = 0.0;
  for (double x : fin) m += x;
  m /= paths;
  for (double x : fin) q += (x - m) * (x - m);
  const double se = std::sqrt(q / (paths - 1) / paths);
  report(3, std::abs(m - 100.0) <= 3.0 * se, "oracle <n>(0.1) is a martingale over 500 paths",
         "mean " + fmt("%.3f", m) + " vs 100, 3 SE = " + fmt("%.3f", 3.0 * se), seconds_since(t0), 600);
}

// ---- 4: collapse ---------------------------------------------------------------

void criterion_4() {
  const auto t0 = Clock::now();
  const int runs = 1000;
  const double dt = 1e-4, gamma = 1.0;
  const std::int64_t steps = 10000;
  const auto rho0 = init_coherent_density(10.0, 0.0, 200, MatrixStorage::diagonal);
  std::vector<double> fin(runs), fvar(runs);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < runs; ++r) {
    auto rho = rho0;
    NoiseStreams s(1 + static_cast<std::uint64_t>(r));
    for (std::int64_t k = 0; k < steps; ++k) step_master_exponential(rho, s.measurement(k, dt), dt, gamma, Exec::serial, k);
    fin[r] = mean_number(rho);
    fvar[r] = variance_number(rho);
  }
  // run 0 uses the default seed 1
  const double single = fvar[0];
  double m = 0.0, q = 0.0, mv = 0.0;
  for (int r = 0; r < runs; ++r) m += fin[r], mv += fvar[r];
  m /= runs;
  mv /= runs;
  for (double x : fin) q += (x - m) * (x - m);
  const double var = q / (runs - 1);
  const double se_mean = std::sqrt(100.0 / runs);
  // Poisson(100): sd of the sample variance is sqrt((lambda + 2 lambda^2) / N)
  const double se_var = std::sqrt((100.0 + 2.0 * 100.0 * 100.0) / runs);
  const bool stats_ok = std::abs(m - 100.0) <= 3.0 * se_mean && std::abs(var - 100.0) <= 3.0 * se_var;
  report(4, single < 1e-3 && stats_ok, "collapse at t=1.0",
         "single-run Var(n) " + fmt("%.3g", single) + " < 1e-3 required (mean over runs " + fmt("%.3g", mv) +
             "); over 1000 runs mean " + fmt("%.2f", m) + " (3 SE " + fmt("%.2f", 3 * se_mean) + "), variance " +
             fmt("%.1f", var) + " (3 SE " + fmt("%.1f", 3 * se_var) + ")" + (stats_ok ? " ok" : " MISMATCH"),
         seconds_since(t0), 900);
}

// ---- 5: NPW filter equivalence --------------------------------------------------

double tv_distance(NpwNoiseCoefficient c, std::uint64_t seed) {
  SimulationConfig cfg;
  cfg.n_traj = 100000;
  cfg.t_final = 0.1;
  cfg.seed = seed;
  cfg.npw_noise_coefficient = c;
  cfg = validate_config(cfg);
  NoiseStreams s(cfg.seed);
  auto ens = init_npw_coherent(cfg.alpha_amplitude, 0.0, cfg.n_traj, s, Exec::parallel, cfg.batch_count);
  auto rho = init_coherent_density(cfg.alpha_amplitude, 0.0, cfg.fock_cutoff, MatrixStorage::diagonal);
  std::vector<double> dv(ens.size());
  for (std::int64_t k = 0; k < cfg.steps(); ++k) {
    const double dW = s.measurement(k, cfg.dt);
    draw_fictitious(s, StreamTag::fictitious_v1, k, cfg.dt, dv, Exec::parallel);
    step_npw(ens, dW, dv, cfg.dt, cfg.gamma, c);
    step_master_exponential(rho, dW, cfg.dt, cfg.gamma, Exec::serial, k);
  }
  const auto p = npw_number_distribution(ens, cfg.fock_cutoff);
  double tv = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) tv += std::abs(p[n] - rho.population(n));
  return 0.5 * tv;
}

void criterion_5() {
  const auto t0 = Clock::now();
  double worst_two = 0.0, best_one = 1.0;
  int one_failing = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double two = tv_distance(NpwNoiseCoefficient::derived_two, seed);
    const double one = tv_distance(NpwNoiseCoefficient::paper_one, seed);
    worst_two = std::max(worst_two, two);
    best_one = std::min(best_one, one);
    if (one > 0.05) ++one_failing;
    per_seed << (seed > 1 ? " " : "") << fmt("%.3f", two) << "/" << fmt("%.3f", one);
  }
  report(5, worst_two <= 0.05 && one_failing == 5,
         "NPW weighted p_n vs oracle diagonal at t=0.1 (1e5 trajectories, seeds 1-5)",
         "max TV derived_two " + fmt("%.4f", worst_two) + " <= 0.05; paper_one outside the bound on " +
             std::to_string(one_failing) + "/5 seeds (min TV " + fmt("%.4f", best_one) +
             ", all 5 required); TV two/one per seed: " + per_seed.str(),
         seconds_since(t0), 600);
}

// ---- 6: comparison run properties over 5 seeds --------------------------------

void criterion_6() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg = validate_config(cfg);
    RunOptions opts;
    opts.continue_after_divergence = true;  // keeps raw P+ statistics after the flag
    const auto r = compare(cfg, opts);
    const auto& npw = *r.npw;
    const auto& pp = *r.pplus;

    const bool flagged = pp.divergence.diverged && *pp.divergence.time <= 0.3;
    const double td = pp.divergence.diverged ? *pp.divergence.time : std::numeric_limits<double>::infinity();

    double worst = 0.0;
    bool convergent = true;
    for (std::size_t i = 0; i < r.grid.times.size(); ++i) {
      if (r.grid.times[i] > 0.5 + 1e-12) break;
      const double ratio = r.npw_accuracy[i] / npw.precision[i];
      if (!(r.npw_accuracy[i] <= 3.0 * npw.precision[i])) convergent = false;
      if (r.grid.times[i] > 0.0) worst = std::max(worst, ratio);
    }
    const bool horizon = r.grid.times.back() >= 3.0 * td - 1e-12;

    std::size_t i01 = 0;
    while (i01 + 1 < r.grid.times.size() && r.grid.times[i01] < 0.1 - 1e-12) ++i01;
    const double npw_prec = npw.precision[i01];
    double pp_prec = pp.precision[i01];
    if (!std::isfinite(pp_prec)) pp_prec = std::numeric_limits<double>::infinity();
    const bool sharper = 5.0 * npw_prec <= pp_prec;

    ok = ok && flagged && convergent && horizon && sharper;
    detail << "seed " << seed << ": P+ t_d=" << fmt("%.4f", td) << (flagged ? "" : "(!)")
           << " NPW max acc/prec=" << fmt("%.2f", worst) << (convergent && horizon ? "" : "(!)")
           << " prec(0.1) NPW/P+=" << fmt("%.3g", npw_prec) << "/" << fmt("%.3g", pp_prec) << (sharper ? "" : "(!)")
           << (seed < 5 ? "; " : "");
  }
  report(6, ok, "P+ diverges by t=0.3; NPW convergent through t=0.5; NPW precision 5x better at t=0.1",
         detail.str(), seconds_since(t0), 1200);
}

// ---- 7: determinism ---------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Keep the first `keep` comma-separated fields of every line.
std::string leading_columns(const std::string& csv, std::size_t keep) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::size_t pos = 0;
    for (std::size_t f = 0; f < keep && pos != std::string::npos; ++f) {
      pos = line.find(',', pos);
      if (pos != std::string::npos && f + 1 < keep) ++pos;
    }
    out += line.substr(0, pos) + '\n';
  }
  return out;
}

void criterion_7() {
  const auto t0 = Clock::now();
  const auto base = fs::temp_directory_path() / "npwsim_acceptance";
  fs::remove_all(base);
  const SimulationConfig cfg = validate_config(SimulationConfig{});
  run_compare(cfg, (base / "a").string());
  run_compare(cfg, (base / "b").string());
  run_compare(cfg, (base / "c").string(), {}, CompareMethods{true, false});
  const auto a = slurp(base / "a" / "compare.csv");
  const auto b = slurp(base / "b" / "compare.csv");
  const auto c = slurp(base / "c" / "compare.csv");
  const bool same = !a.empty() && a == b;
  // t, oracle (2) and npw (5) columns
  const bool separated = leading_columns(a, 8) == leading_columns(c, 8);
  fs::remove_all(base);
  report(7, same && separated, "determinism and stream separation",
         std::string("repeat compare ") + (same ? "byte-identical" : "DIFFERS") + "; oracle/NPW columns without P+ " +
             (separated ? "byte-identical" : "DIFFER"),
         seconds_since(t0), 300);
}

}  // namespace

// Optional arguments select criteria by number; the default runs all seven.
int main(int argc, char** argv) {
  void (*const criteria[])() = {criterion_1, criterion_2, criterion_3, criterion_4,
                                criterion_5, criterion_6, criterion_7};
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > 7) {
      std::fprintf(stderr, "unknown criterion '%s' (expected 1-7)\n", argv[i]);
      return 64;
    }
    chosen.push_back(id);
  }
  if (chosen.empty()) chosen = {1, 2, 3, 4, 5, 6, 7};
  for (int id : chosen) criteria[id - 1]();
  std::printf("%d of %zu criteria failed\n", failures, chosen.size());
  return failures;
}
