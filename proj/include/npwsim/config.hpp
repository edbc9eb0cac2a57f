#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace npwsim {

/// Stochastic coefficient on the NPW weight equation.
///   derived_two: 2*sqrt(gamma)*n (reproduces the exact diagonal filter)
///   paper_one:   sqrt(gamma)*n (literal printed trajectory equation)
enum class NpwNoiseCoefficient { derived_two, paper_one };

std::string to_string(NpwNoiseCoefficient c);
NpwNoiseCoefficient parse_npw_coefficient(const std::string& s);

/// All physical and numerical parameters of one run. Dimensionless units
/// (time in units of 1/gamma when gamma = 1).
struct SimulationConfig {
  double gamma = 1.0;
  double alpha_amplitude = 10.0;
  double alpha_phase = 0.0;
  std::uint64_t n_traj = 10000;
  double dt = 1e-4;
  double t_final = 0.5;
  std::uint64_t seed = 1;
  std::uint64_t fock_cutoff = 200;
  std::uint64_t batch_count = 10;
  double ess_fraction_threshold = 0.01;
  std::uint64_t midpoint_iterations = 3;
  NpwNoiseCoefficient npw_noise_coefficient = NpwNoiseCoefficient::derived_two;
  std::uint64_t record_stride = 100;

  /// Number of integration steps; t_final == steps() * dt after validation.
  std::int64_t steps() const;

  bool operator==(const SimulationConfig&) const = default;
};

/// Returns `cfg` with t_final snapped onto the dt grid, or throws ConfigError
/// naming the first field that violates an invariant.
SimulationConfig validate_config(SimulationConfig cfg);

/// Smallest cutoff that keeps the Poisson tail of a coherent state in the basis.
std::uint64_t minimum_fock_cutoff(double amplitude);

std::string config_to_json(const SimulationConfig& cfg);
/// Parses a JSON object whose keys are a subset of the SimulationConfig field
/// names; absent keys keep their defaults, unknown keys are rejected.
SimulationConfig config_from_json(const std::string& text);
SimulationConfig load_config(const std::string& path);

/// Output grid: step indices at which a record is emitted (0, stride, 2*stride,
/// ..., and always the last step).
std::vector<std::int64_t> output_steps(const SimulationConfig& cfg);

}  // namespace npwsim
