#include "npwsim/stats.hpp"

#include <cmath>

#include "npwsim/errors.hpp"

namespace npwsim {

namespace {

template <class V, class W>
void check_shapes(std::span<const V> values, std::span<const W> weights) {
  if (values.size() != weights.size())
    throw UsageError("weighted estimator: values and weights differ in length (" + std::to_string(values.size()) +
                     " vs " + std::to_string(weights.size()) + ")");
  if (values.empty()) throw UsageError("weighted estimator: empty ensemble");
}

template <class V, class W>
auto weighted_mean_impl(std::span<const V> values, std::span<const W> weights) {
  check_shapes(values, weights);
  using R = decltype(V{} * W{});
  R num{};
  W den{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += weights[i] * values[i];
    den += weights[i];
  }
  if (den == W{}) throw DivergenceError("weighted_mean: weight sum is zero");
  return num / den;
}

template <class W>
double ess_impl(std::span<const W> weights) {
  double s1 = 0.0;
  double s2 = 0.0;
  for (const W& w : weights) {
    const double a = std::abs(w);
    s1 += a;
    s2 += a * a;
  }
  if (s2 == 0.0) return 0.0;
  return s1 * s1 / s2;
}

template <class V, class W>
BatchEstimate batch_impl(std::span<const V> values, std::span<const W> weights, std::size_t batch_count) {
  check_shapes(values, weights);
  if (batch_count == 0 || values.size() % batch_count != 0)
    throw UsageError("batch_estimate: batch_count " + std::to_string(batch_count) + " does not divide " +
                     std::to_string(values.size()));
  const std::size_t len = values.size() / batch_count;

  using R = decltype(V{} * W{});
  BatchEstimate out;
  out.batch_means.reserve(batch_count);
  R num_total{};
  W den_total{};
  for (std::size_t b = 0; b < batch_count; ++b) {
    R num{};
    W den{};
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) {
      num += weights[i] * values[i];
      den += weights[i];
    }
    if (den == W{}) throw DivergenceError("batch_estimate: batch " + std::to_string(b) + " has zero weight sum");
    out.batch_means.push_back(std::real(num / den));
    num_total += num;
    den_total += den;
  }
  if (den_total == W{}) throw DivergenceError("batch_estimate: total weight sum is zero");
  const R mean = num_total / den_total;
  out.value = std::real(mean);
  out.value_imag = std::imag(mean);

  if (batch_count > 1) {
    double m = 0.0;
    for (double x : out.batch_means) m += x;
    m /= static_cast<double>(batch_count);
    double ss = 0.0;
    for (double x : out.batch_means) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / static_cast<double>(batch_count - 1));
    out.precision = sd / std::sqrt(static_cast<double>(batch_count));
  }
  return out;
}

}  // namespace

std::string to_string(DivergenceCause cause) {
  switch (cause) {
    case DivergenceCause::non_finite: return "non_finite";
    case DivergenceCause::ess_collapse: return "ess_collapse";
    case DivergenceCause::weight_sum_underflow: return "weight_sum_underflow";
  }
  return "unknown";
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  return weighted_mean_impl(values, weights);
}

std::complex<double> weighted_mean(std::span<const std::complex<double>> values,
                                   std::span<const std::complex<double>> weights) {
  return weighted_mean_impl(values, weights);
}

double effective_sample_size(std::span<const double> weights) { return ess_impl(weights); }
double effective_sample_size(std::span<const std::complex<double>> weights) { return ess_impl(weights); }

BatchEstimate batch_estimate(std::span<const double> values, std::span<const double> weights,
                             std::size_t batch_count) {
  return batch_impl(values, weights, batch_count);
}

BatchEstimate batch_estimate(std::span<const std::complex<double>> values,
                             std::span<const std::complex<double>> weights, std::size_t batch_count) {
  return batch_impl(values, weights, batch_count);
}

std::vector<double> accuracy_series(std::span<const double> method_means, std::span<const double> oracle_means) {
  if (method_means.size() != oracle_means.size())
    throw UsageError("accuracy_series: series lengths differ (" + std::to_string(method_means.size()) + " vs " +
                     std::to_string(oracle_means.size()) + ")");
  std::vector<double> out(method_means.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(method_means[i] - oracle_means[i]);
  return out;
}

DivergenceStatus detect_divergence(const EnsembleHealth& health, double ess_fraction_threshold, double t) {
  DivergenceStatus s;
  std::optional<DivergenceCause> cause;
  if (!health.all_finite || !std::isfinite(health.ess) || std::isnan(health.log_weight_sum))
    cause = DivergenceCause::non_finite;
  else if (health.log_weight_sum < std::log(kWeightSumUnderflow))
    cause = DivergenceCause::weight_sum_underflow;
  else if (health.ess < ess_fraction_threshold * static_cast<double>(health.n_traj))
    cause = DivergenceCause::ess_collapse;
  if (cause) {
    s.diverged = true;
    s.time = t;
    s.cause = cause;
  }
  return s;
}

}  // namespace npwsim
