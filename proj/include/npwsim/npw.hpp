#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "npwsim/config.hpp"
#include "npwsim/ensemble.hpp"
#include "npwsim/noise.hpp"
#include "npwsim/parallel.hpp"
#include "npwsim/stats.hpp"

namespace npwsim {

/// Number-phase Wigner trajectories: frozen integer number, diffusing
/// (unwrapped) phase and a strictly positive weight stored as its logarithm.
///
/// The ensemble is split into `groups` equal contiguous sub-ensembles, each with
/// its own mean field E_f[n] and its own weight normalisation. groups = 1 couples
/// every trajectory to one ensemble-wide mean field. Pooled observables use the
/// per-group normalised weights, so with balanced groups the pooled mean is the
/// average of the group means.
struct NpwEnsemble {
  std::vector<std::uint32_t> number;
  std::vector<double> phase;
  std::vector<double> log_weight;
  std::size_t groups = 1;
  std::int64_t step = 0;

  std::size_t size() const noexcept { return number.size(); }
  std::size_t group_size() const noexcept { return number.size() / groups; }
};

/// n_i ~ Poisson(amplitude^2) from the (seed, "N0", i) streams, phi_i = phase, w_i = 1.
/// `groups` must divide n_traj.
NpwEnsemble init_npw_coherent(double amplitude, double phase, std::size_t n_traj, const NoiseStreams& streams,
                              Exec exec = Exec::parallel, std::size_t groups = 1);

/// log(sum of group weights / group size) for each group, in the current gauge.
std::vector<double> npw_group_log_norms(const NpwEnsemble& ens, Exec exec = Exec::parallel);
/// E_f[n] of each group.
std::vector<double> npw_group_means(const NpwEnsemble& ens, Exec exec = Exec::parallel);

/// One step: phi_i += sqrt(gamma) dV1_i and
///   w_i <- w_i exp(gamma (-2 n_i^2 + 4 E_f[n] n_i) dt + c sqrt(gamma) n_i dW),
/// the exact solution of the Stratonovich weight equation with E_f[n] frozen at
/// the start of the step (c = 2 for derived_two, 1 for paper_one).
void step_npw(NpwEnsemble& ens, double dW, std::span<const double> dv1, double dt, double gamma,
              NpwNoiseCoefficient coefficient, Exec exec = Exec::parallel);

/// Divide every weight by its group's sum(w)/group_size.
void renormalize_npw(NpwEnsemble& ens, Exec exec = Exec::parallel);

/// E_f[n]; throws DivergenceError when the weight sum vanishes.
double npw_mean_number(const NpwEnsemble& ens, Exec exec = Exec::parallel);
/// E_f[n^2] (diagnostic).
double npw_mean_number_squared(const NpwEnsemble& ens, Exec exec = Exec::parallel);
/// Weighted variance of the unwrapped phase.
double npw_phase_spread(const NpwEnsemble& ens, Exec exec = Exec::parallel);

/// Weights normalised per group (each group sums to its size).
std::vector<double> npw_scaled_weights(const NpwEnsemble& ens);
/// Weighted empirical number distribution on 0..cutoff (mass above the cutoff is dropped).
std::vector<double> npw_number_distribution(const NpwEnsemble& ens, std::size_t cutoff);
/// Number carrying the largest total weight.
std::uint32_t npw_dominant_number(const NpwEnsemble& ens);

EnsembleHealth npw_health(const NpwEnsemble& ens, Exec exec = Exec::parallel);
/// Smallest group sum(w)/group_size in the current gauge.
double npw_weight_sum(const NpwEnsemble& ens, Exec exec = Exec::parallel);

}  // namespace npwsim
