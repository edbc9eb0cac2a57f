#include "npwsim/npw.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "npwsim/errors.hpp"

namespace npwsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Pooled (sum w f, sum w) with per-group normalised weights.
template <class F>
SumPair<double> pooled_sums(const NpwEnsemble& ens, const std::vector<double>& log_norm, Exec exec, F&& f) {
  const std::size_t len = ens.group_size();
  return reduce_sum<SumPair<double>>(ens.size(), exec, [&](std::size_t i) {
    const double ln = log_norm[i / len];
    const double w = std::isfinite(ln) ? std::exp(ens.log_weight[i] - ln) : 0.0;
    return SumPair<double>{w * f(i), w};
  });
}

template <class F>
double pooled_average(const NpwEnsemble& ens, Exec exec, F&& f) {
  const auto s = pooled_sums(ens, npw_group_log_norms(ens, exec), exec, std::forward<F>(f));
  if (!(s.den > 0.0)) throw DivergenceError("NPW ensemble: weight sum vanished");
  return s.num / s.den;
}

}  // namespace

NpwEnsemble init_npw_coherent(double amplitude, double phase, std::size_t n_traj, const NoiseStreams& streams,
                              Exec exec, std::size_t groups) {
  if (!(amplitude >= 0.0)) throw UsageError("init_npw_coherent: amplitude must be >= 0");
  if (groups == 0 || n_traj % groups != 0) throw UsageError("init_npw_coherent: groups must divide n_traj");
  NpwEnsemble ens;
  ens.number.resize(n_traj);
  ens.phase.assign(n_traj, phase);
  ens.log_weight.assign(n_traj, 0.0);
  ens.groups = groups;
  const double lambda = amplitude * amplitude;
  for_each_index(n_traj, exec, [&](std::size_t i) {
    ens.number[i] = sample_poisson(lambda, streams.key(StreamTag::initial_number, i), 0);
  });
  return ens;
}

std::vector<double> npw_group_log_norms(const NpwEnsemble& ens, Exec exec) {
  const std::size_t len = ens.group_size();
  const auto top = grouped_reduce_max(ens.size(), ens.groups, exec, [&](std::size_t i) { return ens.log_weight[i]; });
  const auto sum = grouped_reduce_sum<double>(ens.size(), ens.groups, exec, [&](std::size_t i) {
    const double t = top[i / len];
    return std::isfinite(t) ? std::exp(ens.log_weight[i] - t) : 0.0;
  });
  std::vector<double> out(ens.groups);
  for (std::size_t g = 0; g < ens.groups; ++g)
    out[g] = std::isfinite(top[g]) ? top[g] + std::log(sum[g] / static_cast<double>(len)) : top[g];
  return out;
}

std::vector<double> npw_group_means(const NpwEnsemble& ens, Exec exec) {
  const std::size_t len = ens.group_size();
  const auto top = grouped_reduce_max(ens.size(), ens.groups, exec, [&](std::size_t i) { return ens.log_weight[i]; });
  const auto sums = grouped_reduce_sum<SumPair<double>>(ens.size(), ens.groups, exec, [&](std::size_t i) {
    const double t = top[i / len];
    const double w = std::isfinite(t) ? std::exp(ens.log_weight[i] - t) : 0.0;
    return SumPair<double>{w * static_cast<double>(ens.number[i]), w};
  });
  std::vector<double> out(ens.groups);
  for (std::size_t g = 0; g < ens.groups; ++g) {
    if (!(sums[g].den > 0.0)) throw DivergenceError("NPW ensemble: weight sum of group " + std::to_string(g) + " vanished");
    out[g] = sums[g].num / sums[g].den;
  }
  return out;
}

void step_npw(NpwEnsemble& ens, double dW, std::span<const double> dv1, double dt, double gamma,
              NpwNoiseCoefficient coefficient, Exec exec) {
  if (dv1.size() != ens.size()) throw UsageError("step_npw: one dV1 increment per trajectory required");
  const auto mean = npw_group_means(ens, exec);
  const std::size_t len = ens.group_size();
  const double sg = std::sqrt(gamma);
  const double c = coefficient == NpwNoiseCoefficient::derived_two ? 2.0 : 1.0;
  for_each_index(ens.size(), exec, [&](std::size_t i) {
    const double n = ens.number[i];
    ens.phase[i] += sg * dv1[i];
    ens.log_weight[i] += gamma * (-2.0 * n * n + 4.0 * mean[i / len] * n) * dt + c * sg * n * dW;
  });
  ++ens.step;
  if (ens.step % kRenormalizeEvery == 0) renormalize_npw(ens, exec);
}

void renormalize_npw(NpwEnsemble& ens, Exec exec) {
  const auto log_norm = npw_group_log_norms(ens, exec);
  const std::size_t len = ens.group_size();
  for_each_index(ens.size(), exec, [&](std::size_t i) {
    const double ln = log_norm[i / len];
    if (std::isfinite(ln)) ens.log_weight[i] -= ln;
  });
}

double npw_mean_number(const NpwEnsemble& ens, Exec exec) {
  return pooled_average(ens, exec, [&](std::size_t i) { return static_cast<double>(ens.number[i]); });
}

double npw_mean_number_squared(const NpwEnsemble& ens, Exec exec) {
  return pooled_average(ens, exec, [&](std::size_t i) {
    const double n = ens.number[i];
    return n * n;
  });
}

double npw_phase_spread(const NpwEnsemble& ens, Exec exec) {
  const double mean = pooled_average(ens, exec, [&](std::size_t i) { return ens.phase[i]; });
  return pooled_average(ens, exec, [&](std::size_t i) {
    const double d = ens.phase[i] - mean;
    return d * d;
  });
}

std::vector<double> npw_scaled_weights(const NpwEnsemble& ens) {
  const auto log_norm = npw_group_log_norms(ens, Exec::serial);
  const std::size_t len = ens.group_size();
  std::vector<double> w(ens.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double ln = log_norm[i / len];
    w[i] = std::isfinite(ln) ? std::exp(ens.log_weight[i] - ln) : 0.0;
  }
  return w;
}

std::vector<double> npw_number_distribution(const NpwEnsemble& ens, std::size_t cutoff) {
  const auto w = npw_scaled_weights(ens);
  std::vector<double> p(cutoff + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    total += w[i];
    if (ens.number[i] <= cutoff) p[ens.number[i]] += w[i];
  }
  if (!(total > 0.0)) throw DivergenceError("NPW ensemble: weight sum vanished");
  for (double& x : p) x /= total;
  return p;
}

std::uint32_t npw_dominant_number(const NpwEnsemble& ens) {
  const auto w = npw_scaled_weights(ens);
  std::map<std::uint32_t, double> mass;
  for (std::size_t i = 0; i < w.size(); ++i) mass[ens.number[i]] += w[i];
  std::uint32_t best = 0;
  double best_mass = -1.0;
  for (const auto& [n, m] : mass) {
    if (m > best_mass) {
      best = n;
      best_mass = m;
    }
  }
  return best;
}

EnsembleHealth npw_health(const NpwEnsemble& ens, Exec exec) {
  EnsembleHealth h;
  h.n_traj = ens.size();
  const auto bad = reduce_sum<std::size_t>(ens.size(), exec, [&](std::size_t i) -> std::size_t {
    return std::isnan(ens.log_weight[i]) || ens.log_weight[i] == std::numeric_limits<double>::infinity() ||
                   !std::isfinite(ens.phase[i])
               ? 1
               : 0;
  });
  h.all_finite = bad == 0;
  if (!h.all_finite) {
    h.ess = std::numeric_limits<double>::quiet_NaN();
    h.log_weight_sum = std::numeric_limits<double>::quiet_NaN();
    return h;
  }
  const auto log_norm = npw_group_log_norms(ens, exec);
  h.log_weight_sum = std::numeric_limits<double>::infinity();
  for (double ln : log_norm) h.log_weight_sum = std::min(h.log_weight_sum, ln);
  if (h.log_weight_sum == kNegInf) {
    h.ess = 0.0;
    return h;
  }
  const auto s = pooled_sums(ens, log_norm, exec, [&](std::size_t i) {
    return std::exp(ens.log_weight[i] - log_norm[i / ens.group_size()]);
  });
  // s.num = sum w^2, s.den = sum w
  h.ess = s.num > 0.0 ? s.den * s.den / s.num : 0.0;
  return h;
}

double npw_weight_sum(const NpwEnsemble& ens, Exec exec) { return std::exp(npw_health(ens, exec).log_weight_sum); }

}  // namespace npwsim
