#include "npwsim/simulation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "npwsim/errors.hpp"
#include "npwsim/noise.hpp"
#include "npwsim/npw.hpp"
#include "npwsim/pplus.hpp"

#ifndef NPWSIM_VERSION
#define NPWSIM_VERSION "0.0.0-unknown"
#endif

namespace npwsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void resize_series(MethodSeries& s, std::size_t n) {
  for (auto* v : {&s.mean_n, &s.mean_n_imag, &s.mean_n2, &s.precision, &s.ess, &s.weight_sum, &s.phase_spread})
    v->assign(n, kNaN);
}

std::string num(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string masked_num(const MethodSeries& s, double t, double x) { return s.masked(t) ? "" : num(x); }

std::string diverged_at(const MethodSeries& s) { return s.divergence.diverged ? num(*s.divergence.time) : ""; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

/// Flag divergence once; returns true if the ensemble should stop evolving.
bool update_divergence(MethodSeries& s, const EnsembleHealth& h, double threshold, double t, const RunOptions& opts) {
  if (!s.divergence.diverged) {
    const auto st = detect_divergence(h, threshold, t);
    if (st.diverged) s.divergence = st;
  }
  if (!h.all_finite) return true;
  return s.divergence.diverged && !opts.continue_after_divergence;
}

std::size_t mean_field_groups(const SimulationConfig& cfg, const RunOptions& opts) {
  return opts.mean_field == MeanFieldScope::batch ? cfg.batch_count : 1;
}

}  // namespace

std::string to_string(MeanFieldScope s) { return s == MeanFieldScope::batch ? "batch" : "ensemble"; }

MeanFieldScope parse_mean_field_scope(const std::string& s) {
  if (s == "batch") return MeanFieldScope::batch;
  if (s == "ensemble") return MeanFieldScope::ensemble;
  throw UsageError("unknown mean-field scope '" + s + "' (expected batch or ensemble)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::oracle: return "oracle";
    case Method::pplus: return "pplus";
    case Method::npw: return "npw";
  }
  return "unknown";
}

Method parse_method(const std::string& s) {
  if (s == "oracle") return Method::oracle;
  if (s == "pplus") return Method::pplus;
  if (s == "npw") return Method::npw;
  throw UsageError("unknown method '" + s + "' (expected oracle, pplus or npw)");
}

TimeGrid make_time_grid(const SimulationConfig& cfg) {
  TimeGrid g;
  g.steps = output_steps(cfg);
  g.times.reserve(g.steps.size());
  for (auto k : g.steps) g.times.push_back(static_cast<double>(k) * cfg.dt);
  return g;
}

OracleSeries run_oracle(const SimulationConfig& raw_cfg, const RunOptions& opts) {
  const SimulationConfig cfg = validate_config(raw_cfg);
  const NoiseStreams streams(cfg.seed);
  const TimeGrid grid = make_time_grid(cfg);
  OracleSeries s;
  s.mean_n.resize(grid.steps.size());
  s.var_n.resize(grid.steps.size());
  s.trace_error.resize(grid.steps.size());
  s.purity.resize(grid.steps.size());

  DensityMatrix rho = init_coherent_density(cfg.alpha_amplitude, cfg.alpha_phase, cfg.fock_cutoff, opts.oracle_storage);
  auto record = [&](std::size_t row) {
    s.mean_n[row] = mean_number(rho);
    s.var_n[row] = variance_number(rho);
    s.trace_error[row] = std::abs(trace(rho) - 1.0);
    s.purity[row] = purity(rho);
  };
  record(0);
  std::size_t row = 1;
  const std::int64_t n_steps = cfg.steps();
  for (std::int64_t k = 0; k < n_steps; ++k) {
    step_master(opts.oracle_scheme, rho, streams.measurement(k, cfg.dt), cfg.dt, cfg.gamma,
                static_cast<int>(cfg.midpoint_iterations), opts.exec, k);
    if (row < grid.steps.size() && k + 1 == grid.steps[row]) record(row++);
  }
  return s;
}

MethodSeries run_npw(const SimulationConfig& raw_cfg, const RunOptions& opts) {
  const SimulationConfig cfg = validate_config(raw_cfg);
  const NoiseStreams streams(cfg.seed);
  const TimeGrid grid = make_time_grid(cfg);
  MethodSeries s;
  resize_series(s, grid.steps.size());

  NpwEnsemble ens = init_npw_coherent(cfg.alpha_amplitude, cfg.alpha_phase, cfg.n_traj, streams, opts.exec, mean_field_groups(cfg, opts));
  std::vector<double> numbers(ens.size());
  auto record = [&](std::size_t row, const EnsembleHealth& h) {
    s.ess[row] = h.ess;
    s.weight_sum[row] = std::exp(h.log_weight_sum);
    try {
      for (std::size_t i = 0; i < numbers.size(); ++i) numbers[i] = ens.number[i];
      const auto w = npw_scaled_weights(ens);
      const auto est = batch_estimate(numbers, w, cfg.batch_count);
      s.mean_n[row] = est.value;
      s.mean_n_imag[row] = 0.0;
      s.precision[row] = est.precision;
      s.mean_n2[row] = npw_mean_number_squared(ens, opts.exec);
      s.phase_spread[row] = npw_phase_spread(ens, opts.exec);
    } catch (const DivergenceError&) {
      if (!s.divergence.diverged)
        s.divergence = {true, grid.times[row], DivergenceCause::weight_sum_underflow};
    }
  };

  record(0, npw_health(ens, opts.exec));
  std::size_t row = 1;
  std::vector<double> dv1(ens.size());
  const std::int64_t n_steps = cfg.steps();
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const double dW = streams.measurement(k, cfg.dt);
    draw_fictitious(streams, StreamTag::fictitious_v1, k, cfg.dt, dv1, opts.exec);
    step_npw(ens, dW, dv1, cfg.dt, cfg.gamma, cfg.npw_noise_coefficient, opts.exec);
    const double t = static_cast<double>(k + 1) * cfg.dt;
    const EnsembleHealth h = npw_health(ens, opts.exec);
    const bool stop = update_divergence(s, h, cfg.ess_fraction_threshold, t, opts);
    if (row < grid.steps.size() && k + 1 == grid.steps[row]) {
      if (h.all_finite) record(row, h);
      ++row;
    }
    if (stop) break;
  }
  return s;
}

MethodSeries run_pplus(const SimulationConfig& raw_cfg, const RunOptions& opts) {
  const SimulationConfig cfg = validate_config(raw_cfg);
  const NoiseStreams streams(cfg.seed);
  const TimeGrid grid = make_time_grid(cfg);
  MethodSeries s;
  resize_series(s, grid.steps.size());

  PPlusEnsemble ens = init_pplus(cfg.alpha_amplitude, cfg.alpha_phase, cfg.n_traj, mean_field_groups(cfg, opts));
  auto record = [&](std::size_t row, const EnsembleHealth& h) {
    s.ess[row] = h.ess;
    s.weight_sum[row] = std::exp(h.log_weight_sum);
    try {
      const auto w = pplus_scaled_weights(ens);
      const auto x = pplus_products(ens);
      const auto est = batch_estimate(x, w, cfg.batch_count);
      s.mean_n[row] = est.value;
      s.mean_n_imag[row] = est.value_imag;
      s.precision[row] = est.precision;
      std::vector<std::complex<double>> x2(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) x2[i] = x[i] * x[i] + x[i];  // <n^2> = <a+a+aa> + <a+a>
      s.mean_n2[row] = weighted_mean(x2, w).real();
    } catch (const DivergenceError&) {
      if (!s.divergence.diverged)
        s.divergence = {true, grid.times[row], DivergenceCause::weight_sum_underflow};
    }
  };

  record(0, pplus_health(ens, opts.exec));
  std::size_t row = 1;
  std::vector<double> dv1(ens.size());
  std::vector<double> dv2(ens.size());
  const std::int64_t n_steps = cfg.steps();
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const double dW = streams.measurement(k, cfg.dt);
    draw_fictitious(streams, StreamTag::fictitious_v1, k, cfg.dt, dv1, opts.exec);
    draw_fictitious(streams, StreamTag::fictitious_v2, k, cfg.dt, dv2, opts.exec);
    step_pplus(ens, dW, dv1, dv2, cfg.dt, cfg.gamma, static_cast<int>(cfg.midpoint_iterations), opts.exec);
    const double t = static_cast<double>(k + 1) * cfg.dt;
    const EnsembleHealth h = pplus_health(ens, opts.exec);
    const bool stop = update_divergence(s, h, cfg.ess_fraction_threshold, t, opts);
    if (row < grid.steps.size() && k + 1 == grid.steps[row]) {
      if (h.all_finite) record(row, h);
      ++row;
    }
    if (stop) break;
  }
  return s;
}

ComparisonReport compare(const SimulationConfig& raw_cfg, const RunOptions& opts, CompareMethods methods) {
  ComparisonReport r;
  r.config = validate_config(raw_cfg);
  r.grid = make_time_grid(r.config);

  auto t0 = Clock::now();
  r.oracle = run_oracle(r.config, opts);
  r.seconds["oracle"] = seconds_since(t0);

  auto accuracy = [&](const MethodSeries& m) {
    auto acc = accuracy_series(m.mean_n, r.oracle.mean_n);
    for (std::size_t i = 0; i < acc.size(); ++i)
      if (m.masked(r.grid.times[i])) acc[i] = kNaN;
    return acc;
  };
  if (methods.npw) {
    t0 = Clock::now();
    r.npw = run_npw(r.config, opts);
    r.seconds["npw"] = seconds_since(t0);
    r.npw_accuracy = accuracy(*r.npw);
  }
  if (methods.pplus) {
    t0 = Clock::now();
    r.pplus = run_pplus(r.config, opts);
    r.seconds["pplus"] = seconds_since(t0);
    r.pplus_accuracy = accuracy(*r.pplus);
  }
  return r;
}

std::string oracle_csv(const TimeGrid& grid, const OracleSeries& s) {
  std::ostringstream out;
  out << "t,mean_n,var_n,trace_error,purity\n";
  for (std::size_t i = 0; i < grid.times.size(); ++i)
    out << num(grid.times[i]) << ',' << num(s.mean_n[i]) << ',' << num(s.var_n[i]) << ','
        << num(s.trace_error[i]) << ',' << num(s.purity[i]) << '\n';
  return out.str();
}

std::string npw_csv(const TimeGrid& grid, const MethodSeries& s) {
  std::ostringstream out;
  out << "t,mean_n,precision,ess,phase_spread,weight_sum,diverged_at\n";
  const std::string div = diverged_at(s);
  for (std::size_t i = 0; i < grid.times.size(); ++i) {
    const double t = grid.times[i];
    out << num(t) << ',' << masked_num(s, t, s.mean_n[i]) << ',' << masked_num(s, t, s.precision[i]) << ','
        << masked_num(s, t, s.ess[i]) << ',' << masked_num(s, t, s.phase_spread[i]) << ','
        << masked_num(s, t, s.weight_sum[i]) << ',' << div << '\n';
  }
  return out.str();
}

std::string pplus_csv(const TimeGrid& grid, const MethodSeries& s) {
  std::ostringstream out;
  out << "t,mean_n,mean_n_imag,precision,ess,weight_sum_magnitude,diverged_at\n";
  const std::string div = diverged_at(s);
  for (std::size_t i = 0; i < grid.times.size(); ++i) {
    const double t = grid.times[i];
    out << num(t) << ',' << masked_num(s, t, s.mean_n[i]) << ',' << masked_num(s, t, s.mean_n_imag[i]) << ','
        << masked_num(s, t, s.precision[i]) << ',' << masked_num(s, t, s.ess[i]) << ','
        << masked_num(s, t, s.weight_sum[i]) << ',' << div << '\n';
  }
  return out.str();
}

std::string compare_csv(const ComparisonReport& r) {
  std::ostringstream out;
  out << "t,oracle_mean_n,oracle_var_n,"
         "npw_mean_n,npw_precision,npw_accuracy,npw_ess,npw_diverged,"
         "pplus_mean_n,pplus_mean_n_imag,pplus_precision,pplus_accuracy,pplus_ess,pplus_diverged\n";
  for (std::size_t i = 0; i < r.grid.times.size(); ++i) {
    const double t = r.grid.times[i];
    out << num(t) << ',' << num(r.oracle.mean_n[i]) << ',' << num(r.oracle.var_n[i]);
    if (r.npw) {
      const auto& s = *r.npw;
      out << ',' << masked_num(s, t, s.mean_n[i]) << ',' << masked_num(s, t, s.precision[i]) << ','
          << num(r.npw_accuracy[i]) << ',' << masked_num(s, t, s.ess[i]) << ',' << (s.masked(t) ? 1 : 0);
    } else {
      out << ",,,,,";
    }
    if (r.pplus) {
      const auto& s = *r.pplus;
      out << ',' << masked_num(s, t, s.mean_n[i]) << ',' << masked_num(s, t, s.mean_n_imag[i]) << ','
          << masked_num(s, t, s.precision[i]) << ',' << num(r.pplus_accuracy[i]) << ','
          << masked_num(s, t, s.ess[i]) << ',' << (s.masked(t) ? 1 : 0);
    } else {
      out << ",,,,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string artifact_version() { return NPWSIM_VERSION; }

std::string manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["version"] = m.version;
  j["config"] = nlohmann::json::parse(config_to_json(m.config));
  j["seed"] = m.config.seed;
  j["oracle_scheme"] = m.oracle_scheme;
  j["mean_field"] = m.mean_field;
  j["outputs"] = m.outputs;
  j["seconds"] = m.seconds;
  nlohmann::json div = nlohmann::json::object();
  for (const auto& [name, st] : m.divergence) {
    nlohmann::json d;
    d["diverged"] = st.diverged;
    d["time"] = st.time ? nlohmann::json(*st.time) : nlohmann::json(nullptr);
    d["cause"] = st.cause ? nlohmann::json(to_string(*st.cause)) : nlohmann::json(nullptr);
    div[name] = d;
  }
  j["divergence"] = div;
  return j.dump(2) + "\n";
}

RunManifest run_simulation(const SimulationConfig& raw_cfg, Method method, const std::string& out_dir,
                           const RunOptions& opts) {
  const SimulationConfig cfg = validate_config(raw_cfg);
  const TimeGrid grid = make_time_grid(cfg);
  std::filesystem::create_directories(out_dir);
  RunManifest m;
  m.config = cfg;
  m.version = artifact_version();
  m.oracle_scheme = to_string(opts.oracle_scheme);
  m.mean_field = to_string(opts.mean_field);

  const std::string name = to_string(method);
  const auto csv_path = std::filesystem::path(out_dir) / (name + ".csv");
  const auto t0 = Clock::now();
  std::string csv;
  switch (method) {
    case Method::oracle: csv = oracle_csv(grid, run_oracle(cfg, opts)); break;
    case Method::npw: {
      const auto s = run_npw(cfg, opts);
      m.divergence[name] = s.divergence;
      csv = npw_csv(grid, s);
      break;
    }
    case Method::pplus: {
      const auto s = run_pplus(cfg, opts);
      m.divergence[name] = s.divergence;
      csv = pplus_csv(grid, s);
      break;
    }
  }
  m.seconds[name] = seconds_since(t0);
  write_file(csv_path, csv);
  m.outputs[name] = csv_path.string();
  write_file(std::filesystem::path(out_dir) / (name + "_manifest.json"), manifest_json(m));
  return m;
}

RunManifest run_compare(const SimulationConfig& raw_cfg, const std::string& out_dir, const RunOptions& opts,
                        CompareMethods methods) {
  const ComparisonReport r = compare(raw_cfg, opts, methods);
  std::filesystem::create_directories(out_dir);
  RunManifest m;
  m.config = r.config;
  m.version = artifact_version();
  m.oracle_scheme = to_string(opts.oracle_scheme);
  m.mean_field = to_string(opts.mean_field);
  m.seconds = r.seconds;
  if (r.npw) m.divergence["npw"] = r.npw->divergence;
  if (r.pplus) m.divergence["pplus"] = r.pplus->divergence;
  const auto csv_path = std::filesystem::path(out_dir) / "compare.csv";
  write_file(csv_path, compare_csv(r));
  m.outputs["compare"] = csv_path.string();
  write_file(std::filesystem::path(out_dir) / "compare_manifest.json", manifest_json(m));
  return m;
}

}  // namespace npwsim
