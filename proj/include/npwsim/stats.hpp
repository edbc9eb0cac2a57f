#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace npwsim {

/// Full-ensemble weighted mean plus a batch-means standard error.
struct BatchEstimate {
  double value = 0.0;       ///< real part of the full-ensemble weighted mean
  double value_imag = 0.0;  ///< imaginary part (complex ensembles only)
  double precision = 0.0;   ///< stddev(real batch means, n-1) / sqrt(batch_count)
  std::vector<double> batch_means;
};

enum class DivergenceCause { non_finite, ess_collapse, weight_sum_underflow };

std::string to_string(DivergenceCause cause);

struct DivergenceStatus {
  bool diverged = false;
  std::optional<double> time;
  std::optional<DivergenceCause> cause;
};

/// What detect_divergence needs to know about an ensemble at one instant.
struct EnsembleHealth {
  bool all_finite = true;
  double ess = 0.0;
  /// log(|sum of weights| / n_traj) in the ensemble's current normalisation gauge.
  double log_weight_sum = 0.0;
  std::size_t n_traj = 0;
};

/// Weight sums below this (in the renormalised gauge) count as underflow.
inline constexpr double kWeightSumUnderflow = 1e-300;

double weighted_mean(std::span<const double> values, std::span<const double> weights);
std::complex<double> weighted_mean(std::span<const std::complex<double>> values,
                                   std::span<const std::complex<double>> weights);

/// (sum |w|)^2 / sum |w|^2; 0 when every weight is zero.
double effective_sample_size(std::span<const double> weights);
double effective_sample_size(std::span<const std::complex<double>> weights);

/// Contiguous-index batches; batch_count must divide the ensemble size.
BatchEstimate batch_estimate(std::span<const double> values, std::span<const double> weights,
                             std::size_t batch_count);
BatchEstimate batch_estimate(std::span<const std::complex<double>> values,
                             std::span<const std::complex<double>> weights, std::size_t batch_count);

/// Pointwise |method - oracle|. NaN (missing) entries propagate.
std::vector<double> accuracy_series(std::span<const double> method_means, std::span<const double> oracle_means);

/// Flags non-finite state, ESS < threshold * n_traj, or weight-sum underflow.
DivergenceStatus detect_divergence(const EnsembleHealth& health, double ess_fraction_threshold, double t);

}  // namespace npwsim
