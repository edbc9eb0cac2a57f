#include "npwsim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "npwsim/errors.hpp"

namespace npwsim {

namespace {

using nlohmann::json;

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) throw ConfigError(std::string("config field '") + field + "': " + why);
}

}  // namespace

std::string to_string(NpwNoiseCoefficient c) {
  return c == NpwNoiseCoefficient::derived_two ? "derived_two" : "paper_one";
}

NpwNoiseCoefficient parse_npw_coefficient(const std::string& s) {
  if (s == "derived_two") return NpwNoiseCoefficient::derived_two;
  if (s == "paper_one") return NpwNoiseCoefficient::paper_one;
  throw ConfigError("config field 'npw_noise_coefficient': expected derived_two or paper_one, got '" + s + "'");
}

std::int64_t SimulationConfig::steps() const {
  return static_cast<std::int64_t>(std::ceil(t_final / dt - 1e-9));
}

std::uint64_t minimum_fock_cutoff(double amplitude) {
  return static_cast<std::uint64_t>(std::ceil(amplitude * amplitude + 8.0 * amplitude));
}

SimulationConfig validate_config(SimulationConfig cfg) {
  require(std::isfinite(cfg.gamma) && cfg.gamma >= 0.0, "gamma", "must be finite and >= 0");
  require(std::isfinite(cfg.alpha_amplitude) && cfg.alpha_amplitude >= 0.0, "alpha_amplitude",
          "must be finite and >= 0");
  require(std::isfinite(cfg.alpha_phase), "alpha_phase", "must be finite");
  require(cfg.n_traj > 0, "n_traj", "must be positive");
  require(std::isfinite(cfg.dt) && cfg.dt > 0.0, "dt", "must be > 0");
  require(std::isfinite(cfg.t_final) && cfg.t_final > 0.0, "t_final", "must be > 0");
  require(cfg.fock_cutoff > 0, "fock_cutoff", "must be positive");
  require(static_cast<double>(cfg.fock_cutoff) >=
              cfg.alpha_amplitude * cfg.alpha_amplitude + 8.0 * cfg.alpha_amplitude,
          "fock_cutoff",
          "must be >= alpha_amplitude^2 + 8*alpha_amplitude = " +
              std::to_string(minimum_fock_cutoff(cfg.alpha_amplitude)) + " (Poisson tail containment)");
  require(cfg.batch_count >= 2, "batch_count", "must be >= 2 (the precision needs two batch means)");
  require(cfg.n_traj % cfg.batch_count == 0, "batch_count",
          "must divide n_traj (" + std::to_string(cfg.n_traj) + ")");
  require(cfg.ess_fraction_threshold > 0.0 && cfg.ess_fraction_threshold <= 1.0, "ess_fraction_threshold",
          "must lie in (0, 1]");
  require(cfg.midpoint_iterations > 0, "midpoint_iterations", "must be positive");
  require(cfg.record_stride > 0, "record_stride", "must be positive");

  cfg.t_final = static_cast<double>(cfg.steps()) * cfg.dt;
  return cfg;
}

std::string config_to_json(const SimulationConfig& cfg) {
  json j;
  j["gamma"] = cfg.gamma;
  j["alpha_amplitude"] = cfg.alpha_amplitude;
  j["alpha_phase"] = cfg.alpha_phase;
  j["n_traj"] = cfg.n_traj;
  j["dt"] = cfg.dt;
  j["t_final"] = cfg.t_final;
  j["seed"] = cfg.seed;
  j["fock_cutoff"] = cfg.fock_cutoff;
  j["batch_count"] = cfg.batch_count;
  j["ess_fraction_threshold"] = cfg.ess_fraction_threshold;
  j["midpoint_iterations"] = cfg.midpoint_iterations;
  j["npw_noise_coefficient"] = to_string(cfg.npw_noise_coefficient);
  j["record_stride"] = cfg.record_stride;
  return j.dump(2);
}

SimulationConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  SimulationConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "gamma") cfg.gamma = value.get<double>();
      else if (key == "alpha_amplitude") cfg.alpha_amplitude = value.get<double>();
      else if (key == "alpha_phase") cfg.alpha_phase = value.get<double>();
      else if (key == "n_traj") cfg.n_traj = value.get<std::uint64_t>();
      else if (key == "dt") cfg.dt = value.get<double>();
      else if (key == "t_final") cfg.t_final = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "fock_cutoff") cfg.fock_cutoff = value.get<std::uint64_t>();
      else if (key == "batch_count") cfg.batch_count = value.get<std::uint64_t>();
      else if (key == "ess_fraction_threshold") cfg.ess_fraction_threshold = value.get<double>();
      else if (key == "midpoint_iterations") cfg.midpoint_iterations = value.get<std::uint64_t>();
      else if (key == "npw_noise_coefficient") cfg.npw_noise_coefficient = parse_npw_coefficient(value.get<std::string>());
      else if (key == "record_stride") cfg.record_stride = value.get<std::uint64_t>();
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("config field '" + key + "': " + e.what());
    }
  }
  return cfg;
}

SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

std::vector<std::int64_t> output_steps(const SimulationConfig& cfg) {
  const std::int64_t n = cfg.steps();
  const auto stride = static_cast<std::int64_t>(cfg.record_stride);
  std::vector<std::int64_t> out;
  for (std::int64_t k = 0; k <= n; k += stride) out.push_back(k);
  if (out.back() != n) out.push_back(n);
  return out;
}

}  // namespace npwsim
