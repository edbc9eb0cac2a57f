#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "npwsim/ensemble.hpp"
#include "npwsim/parallel.hpp"
#include "npwsim/stats.hpp"

namespace npwsim {

/// Positive-P trajectories on the doubled phase space. Complex weights are held
/// as complex logarithms so that their magnitude never overflows. Groups work as
/// in NpwEnsemble: each contiguous sub-ensemble has its own mean field and weight
/// normalisation.
struct PPlusEnsemble {
  std::vector<std::complex<double>> alpha;
  std::vector<std::complex<double>> beta;
  std::vector<std::complex<double>> log_weight;
  std::size_t groups = 1;
  std::int64_t step = 0;

  std::size_t size() const noexcept { return alpha.size(); }
  std::size_t group_size() const noexcept { return alpha.size() / groups; }
};

/// Coherent state: alpha_i = a0, beta_i = conj(a0), w_i = 1.
PPlusEnsemble init_pplus(double amplitude, double phase, std::size_t n_traj, std::size_t groups = 1);

/// Complex log(sum of group weights / group size) per group.
std::vector<std::complex<double>> pplus_group_log_norms(const PPlusEnsemble& ens, Exec exec = Exec::parallel);

/// One semi-implicit midpoint step of the Stratonovich system
///   d alpha = -2 g alpha (x - E_f[x]) dt + sqrt(g) alpha o (i dV1 + i dV2 + dW)
///   d beta  = -2 g beta  (x - E_f[x]) dt + sqrt(g) beta  o (-i dV1 + i dV2 + dW)
///   d ln w  = -2 g (x + x^2 - 2 x E_f[x]) dt + 2 sqrt(g) x o dW,      x = beta alpha,
/// with each group's E_f[x] re-evaluated at every iteration.
void step_pplus(PPlusEnsemble& ens, double dW, std::span<const double> dv1, std::span<const double> dv2, double dt,
                double gamma, int iterations, Exec exec = Exec::parallel);

/// Divide every weight by its group's sum(w)/group_size (a common complex factor).
void renormalize_pplus(PPlusEnsemble& ens, Exec exec = Exec::parallel);

/// E_f[beta alpha] = <a^dag a>; the imaginary part is a diagnostic. Throws
/// DivergenceError when the weight sum vanishes.
std::complex<double> pplus_mean_number(const PPlusEnsemble& ens, Exec exec = Exec::parallel);

/// Weights normalised per group (each group sums to its size).
std::vector<std::complex<double>> pplus_scaled_weights(const PPlusEnsemble& ens);
std::vector<std::complex<double>> pplus_products(const PPlusEnsemble& ens);

EnsembleHealth pplus_health(const PPlusEnsemble& ens, Exec exec = Exec::parallel);

}  // namespace npwsim
