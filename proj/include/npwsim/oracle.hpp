#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "npwsim/parallel.hpp"

namespace npwsim {

/// `full` keeps every rho_{mn}; `diagonal` keeps only populations. The number
/// measurement never couples populations to coherences, so the diagonal path
/// gives bit-identical number statistics at O(cutoff) cost per step.
enum class MatrixStorage { full, diagonal };

/// Truncated Fock-basis density matrix, indices 0..cutoff.
class DensityMatrix {
 public:
  DensityMatrix(std::size_t cutoff, MatrixStorage storage);

  static DensityMatrix number_state(std::size_t k, std::size_t cutoff, MatrixStorage storage);
  /// Diagonal state with the given (unnormalised) populations; dim = p.size().
  static DensityMatrix from_populations(std::span<const double> p, MatrixStorage storage);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t cutoff() const noexcept { return dim_ - 1; }
  MatrixStorage storage() const noexcept { return storage_; }
  bool diagonal_only() const noexcept { return storage_ == MatrixStorage::diagonal; }

  /// rho_{mn}; zero for coherences of a diagonal-only matrix.
  std::complex<double> operator()(std::size_t m, std::size_t n) const noexcept;
  double population(std::size_t n) const noexcept;
  std::vector<double> populations() const;

  /// Mutable entry; for diagonal storage only m == n is addressable.
  std::complex<double>& at(std::size_t m, std::size_t n);

  /// Raw storage: row-major dim*dim (full) or dim (diagonal).
  std::span<std::complex<double>> raw() noexcept { return entries_; }
  std::span<const std::complex<double>> raw() const noexcept { return entries_; }

 private:
  std::size_t index(std::size_t m, std::size_t n) const noexcept {
    return storage_ == MatrixStorage::full ? m * dim_ + n : m;
  }

  std::size_t dim_;
  MatrixStorage storage_;
  std::vector<std::complex<double>> entries_;
};

/// Integrators for the number-measurement conditional master equation.
///   exponential:   record-driven step rho <- U rho U / tr, U = exp(-gamma n^2 dt + sqrt(gamma) n dY),
///                  dY = dW + 2 sqrt(gamma) <n> dt. Positive and rank preserving; production default.
///   ito:           componentwise Euler-Maruyama on the Ito form (gamma D + sqrt(gamma) H dW).
///   stratonovich:  semi-implicit midpoint on gamma (D + C) dt + sqrt(gamma) H o dW.
enum class OracleScheme { exponential, ito, stratonovich };

std::string to_string(OracleScheme s);
OracleScheme parse_oracle_scheme(const std::string& s);

struct StepInfo {
  double trace_before_normalization = 1.0;
  double record_increment = 0.0;  ///< dY used by the step (exponential scheme), else dW + 2 sqrt(gamma) <n> dt
};

/// rho_{mn} = e^{-|a|^2} a^m conj(a)^n / sqrt(m! n!), a = amplitude e^{i phase},
/// renormalised over the truncated space. Throws ConfigError if the cutoff does
/// not contain the Poisson tail (cutoff < amplitude^2 + 8 amplitude).
DensityMatrix init_coherent_density(double amplitude, double phase, std::size_t cutoff,
                                    MatrixStorage storage = MatrixStorage::full);

StepInfo step_master_ito(DensityMatrix& rho, double dW, double dt, double gamma, Exec exec = Exec::parallel,
                         std::int64_t step_index = 0);
StepInfo step_master_stratonovich(DensityMatrix& rho, double dW, double dt, double gamma, int iterations,
                                  Exec exec = Exec::parallel, std::int64_t step_index = 0);
StepInfo step_master_exponential(DensityMatrix& rho, double dW, double dt, double gamma, Exec exec = Exec::parallel,
                                 std::int64_t step_index = 0);
StepInfo step_master(OracleScheme scheme, DensityMatrix& rho, double dW, double dt, double gamma, int iterations,
                     Exec exec = Exec::parallel, std::int64_t step_index = 0);

/// Cumulative record Y on the step grid: Y_0 = 0, length = steps + 1.
struct MeasurementRecord {
  std::vector<double> y_values;
  double dt = 0.0;
};

/// Y_k = Y_{k-1} + (W_k - W_{k-1}) + 2 sqrt(gamma) <n>_{k-1} dt. Both inputs are
/// sampled on the same grid (W_0 = 0).
MeasurementRecord reconstruct_record(std::span<const double> w_path, std::span<const double> mean_n_path, double dt,
                                     double gamma);

/// Exact normalised solution of the linear (record-driven) filter at grid step k:
/// rho_{mn}(t) ~ rho_{mn}(0) exp(-(gamma/2)(m-n)^2 t + sqrt(gamma)(m+n) Y_t - (gamma/2)(m+n)^2 t).
DensityMatrix closed_form_linear_solution(const DensityMatrix& rho0, const MeasurementRecord& record,
                                          std::size_t step, double gamma);

double trace(const DensityMatrix& rho);
double mean_number(const DensityMatrix& rho);
double variance_number(const DensityMatrix& rho);
double purity(const DensityMatrix& rho);
/// max |rho_{mn} - conj(rho_{nm})|, including the imaginary part of the diagonal.
double hermiticity_error(const DensityMatrix& rho);
double min_population(const DensityMatrix& rho);

}  // namespace npwsim
