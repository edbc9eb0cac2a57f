#include "npwsim/pplus.hpp"

#include <cmath>
#include <limits>

#include "npwsim/errors.hpp"

namespace npwsim {

namespace {

using cplx = std::complex<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Per-group (sum w x, sum w) with weights exp(lw) scaled by the group's largest Re(lw).
template <class LogW, class X>
std::vector<SumPair<cplx>> group_sums(std::size_t n, std::size_t groups, Exec exec, LogW&& lw, X&& x) {
  const std::size_t len = n / groups;
  const auto top = grouped_reduce_max(n, groups, exec, [&](std::size_t i) { return lw(i).real(); });
  return grouped_reduce_sum<SumPair<cplx>>(n, groups, exec, [&](std::size_t i) {
    const double t = top[i / len];
    if (!std::isfinite(t)) return SumPair<cplx>{};
    const cplx w = std::exp(lw(i) - t);
    return SumPair<cplx>{w * x(i), w};
  });
}

}  // namespace

PPlusEnsemble init_pplus(double amplitude, double phase, std::size_t n_traj, std::size_t groups) {
  if (!(amplitude >= 0.0)) throw UsageError("init_pplus: amplitude must be >= 0");
  if (groups == 0 || n_traj % groups != 0) throw UsageError("init_pplus: groups must divide n_traj");
  const cplx a0 = std::polar(amplitude, phase);
  PPlusEnsemble ens;
  ens.alpha.assign(n_traj, a0);
  ens.beta.assign(n_traj, std::conj(a0));
  ens.log_weight.assign(n_traj, cplx(0.0, 0.0));
  ens.groups = groups;
  return ens;
}

void step_pplus(PPlusEnsemble& ens, double dW, std::span<const double> dv1, std::span<const double> dv2, double dt,
                double gamma, int iterations, Exec exec) {
  const std::size_t n = ens.size();
  if (dv1.size() != n || dv2.size() != n) throw UsageError("step_pplus: one dV1 and dV2 increment per trajectory required");
  if (iterations < 1) throw UsageError("step_pplus: iterations must be >= 1");

  const std::vector<cplx> a0 = ens.alpha;
  const std::vector<cplx> b0 = ens.beta;
  const std::vector<cplx> l0 = ens.log_weight;
  const std::size_t len = ens.group_size();
  const double sg = std::sqrt(gamma);
  const cplx i1(0.0, 1.0);
  std::vector<cplx> mean_field(ens.groups);

  for (int it = 0; it < iterations; ++it) {
    auto mid_a = [&](std::size_t i) { return 0.5 * (a0[i] + ens.alpha[i]); };
    auto mid_b = [&](std::size_t i) { return 0.5 * (b0[i] + ens.beta[i]); };
    auto mid_l = [&](std::size_t i) { return 0.5 * (l0[i] + ens.log_weight[i]); };
    const auto sums = group_sums(n, ens.groups, exec, mid_l, [&](std::size_t i) { return mid_a(i) * mid_b(i); });
    for (std::size_t g = 0; g < ens.groups; ++g) mean_field[g] = sums[g].num / sums[g].den;

    for_each_index(n, exec, [&](std::size_t i) {
      const cplx a = mid_a(i);
      const cplx b = mid_b(i);
      const cplx x = a * b;
      const cplx e = mean_field[i / len];
      const cplx pull = -2.0 * gamma * (x - e) * dt;
      ens.alpha[i] = a0[i] + a * (pull + sg * (i1 * dv1[i] + i1 * dv2[i] + dW));
      ens.beta[i] = b0[i] + b * (pull + sg * (-i1 * dv1[i] + i1 * dv2[i] + dW));
      ens.log_weight[i] = l0[i] + (-2.0 * gamma * (x + x * x - 2.0 * x * e) * dt + 2.0 * sg * x * dW);
    });
  }
  ++ens.step;
  if (ens.step % kRenormalizeEvery == 0) renormalize_pplus(ens, exec);
}

std::vector<std::complex<double>> pplus_group_log_norms(const PPlusEnsemble& ens, Exec exec) {
  const std::size_t len = ens.group_size();
  const auto top =
      grouped_reduce_max(ens.size(), ens.groups, exec, [&](std::size_t i) { return ens.log_weight[i].real(); });
  const auto sum = grouped_reduce_sum<cplx>(ens.size(), ens.groups, exec, [&](std::size_t i) {
    const double t = top[i / len];
    return std::isfinite(t) ? std::exp(ens.log_weight[i] - t) : cplx{};
  });
  std::vector<cplx> out(ens.groups);
  for (std::size_t g = 0; g < ens.groups; ++g) {
    if (!std::isfinite(top[g]) || sum[g] == cplx{})
      out[g] = cplx(-kInf, 0.0);
    else
      out[g] = top[g] + std::log(sum[g] / static_cast<double>(len));
  }
  return out;
}

void renormalize_pplus(PPlusEnsemble& ens, Exec exec) {
  const auto log_norm = pplus_group_log_norms(ens, exec);
  const std::size_t len = ens.group_size();
  for_each_index(ens.size(), exec, [&](std::size_t i) {
    const cplx ln = log_norm[i / len];
    if (finite(ln)) ens.log_weight[i] -= ln;
  });
}

std::complex<double> pplus_mean_number(const PPlusEnsemble& ens, Exec exec) {
  const auto w = pplus_scaled_weights(ens);
  (void)exec;
  cplx num{};
  cplx den{};
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += w[i] * ens.alpha[i] * ens.beta[i];
    den += w[i];
  }
  if (den == cplx{} || !finite(den)) throw DivergenceError("P+ ensemble: weight sum vanished");
  return num / den;
}

std::vector<std::complex<double>> pplus_scaled_weights(const PPlusEnsemble& ens) {
  const auto log_norm = pplus_group_log_norms(ens, Exec::serial);
  const std::size_t len = ens.group_size();
  std::vector<cplx> w(ens.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const cplx ln = log_norm[i / len];
    w[i] = finite(ln) ? std::exp(ens.log_weight[i] - ln) : cplx{};
  }
  return w;
}

std::vector<std::complex<double>> pplus_products(const PPlusEnsemble& ens) {
  std::vector<cplx> x(ens.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = ens.alpha[i] * ens.beta[i];
  return x;
}

EnsembleHealth pplus_health(const PPlusEnsemble& ens, Exec exec) {
  const std::size_t n = ens.size();
  EnsembleHealth h;
  h.n_traj = n;
  const auto bad = reduce_sum<std::size_t>(n, exec, [&](std::size_t i) -> std::size_t {
    return finite(ens.alpha[i]) && finite(ens.beta[i]) && !std::isnan(ens.log_weight[i].real()) &&
                   ens.log_weight[i].real() != kInf && std::isfinite(ens.log_weight[i].imag())
               ? 0
               : 1;
  });
  h.all_finite = bad == 0;
  if (!h.all_finite) {
    h.ess = std::numeric_limits<double>::quiet_NaN();
    h.log_weight_sum = std::numeric_limits<double>::quiet_NaN();
    return h;
  }
  const auto log_norm = pplus_group_log_norms(ens, exec);
  h.log_weight_sum = kInf;
  for (const cplx& ln : log_norm) h.log_weight_sum = std::min(h.log_weight_sum, ln.real());
  if (h.log_weight_sum == -kInf) {
    h.ess = 0.0;
    return h;
  }
  const std::size_t len = ens.group_size();
  const auto s = reduce_sum<SumPair<double>>(n, exec, [&](std::size_t i) {
    const double a = std::exp((ens.log_weight[i] - log_norm[i / len]).real());
    return SumPair<double>{a * a, a};
  });
  h.ess = s.num > 0.0 ? s.den * s.den / s.num : 0.0;
  return h;
}

}  // namespace npwsim
