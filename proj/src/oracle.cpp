#include "npwsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "npwsim/config.hpp"
#include "npwsim/errors.hpp"

namespace npwsim {

namespace {

using cplx = std::complex<double>;

/// Apply body(m, n, entry) to every stored entry; rows in parallel.
template <class Body>
void for_each_entry(DensityMatrix& rho, Exec exec, Body&& body) {
  auto data = rho.raw();
  const std::size_t dim = rho.dim();
  if (rho.diagonal_only()) {
    for_each_index(dim, exec, [&](std::size_t n) { body(n, n, data[n]); });
    return;
  }
  for_each_index(dim, exec, [&](std::size_t m) {
    cplx* row = data.data() + m * dim;
    for (std::size_t n = 0; n < dim; ++n) body(m, n, row[n]);
  });
}

struct Moments {
  double s0 = 0.0;  // sum rho_nn
  double s1 = 0.0;  // sum n rho_nn
  double s2 = 0.0;  // sum n^2 rho_nn
};

Moments diagonal_moments(const DensityMatrix& rho) {
  Moments mo;
  for (std::size_t n = 0; n < rho.dim(); ++n) {
    const double p = rho.population(n);
    const double x = static_cast<double>(n);
    mo.s0 += p;
    mo.s1 += x * p;
    mo.s2 += x * x * p;
  }
  return mo;
}

void hermitize(DensityMatrix& rho, Exec exec) {
  auto data = rho.raw();
  const std::size_t dim = rho.dim();
  if (rho.diagonal_only()) {
    for (auto& z : data) z = cplx(z.real(), 0.0);
    return;
  }
  for_each_index(dim, exec, [&](std::size_t m) {
    data[m * dim + m] = cplx(data[m * dim + m].real(), 0.0);
    for (std::size_t n = m + 1; n < dim; ++n) {
      const cplx avg = 0.5 * (data[m * dim + n] + std::conj(data[n * dim + m]));
      data[m * dim + n] = avg;
      data[n * dim + m] = std::conj(avg);
    }
  });
}

/// Hermitise, then divide by the trace. Returns the trace before division.
double finish_step(DensityMatrix& rho, Exec exec, std::int64_t step_index) {
  hermitize(rho, exec);
  const double tr = trace(rho);
  if (!std::isfinite(tr) || !(tr > 0.0)) throw IntegratorBlowup(step_index, "trace is " + std::to_string(tr));
  auto data = rho.raw();
  const auto bad = reduce_sum<std::size_t>(data.size(), exec, [&](std::size_t i) -> std::size_t {
    data[i] /= tr;
    return std::isfinite(data[i].real()) && std::isfinite(data[i].imag()) ? 0 : 1;
  });
  if (bad != 0) throw IntegratorBlowup(step_index, std::to_string(bad) + " non-finite entries");
  return tr;
}

}  // namespace

DensityMatrix::DensityMatrix(std::size_t cutoff, MatrixStorage storage)
    : dim_(cutoff + 1),
      storage_(storage),
      entries_(storage == MatrixStorage::full ? dim_ * dim_ : dim_, cplx(0.0, 0.0)) {}

DensityMatrix DensityMatrix::number_state(std::size_t k, std::size_t cutoff, MatrixStorage storage) {
  if (k > cutoff) throw UsageError("number_state: k exceeds cutoff");
  DensityMatrix rho(cutoff, storage);
  rho.at(k, k) = 1.0;
  return rho;
}

DensityMatrix DensityMatrix::from_populations(std::span<const double> p, MatrixStorage storage) {
  if (p.empty()) throw UsageError("from_populations: empty population vector");
  DensityMatrix rho(p.size() - 1, storage);
  for (std::size_t n = 0; n < p.size(); ++n) rho.at(n, n) = p[n];
  return rho;
}

cplx DensityMatrix::operator()(std::size_t m, std::size_t n) const noexcept {
  if (storage_ == MatrixStorage::diagonal && m != n) return {};
  return entries_[index(m, n)];
}

double DensityMatrix::population(std::size_t n) const noexcept { return entries_[index(n, n)].real(); }

std::vector<double> DensityMatrix::populations() const {
  std::vector<double> p(dim_);
  for (std::size_t n = 0; n < dim_; ++n) p[n] = population(n);
  return p;
}

cplx& DensityMatrix::at(std::size_t m, std::size_t n) {
  if (m >= dim_ || n >= dim_) throw UsageError("DensityMatrix::at: index out of range");
  if (storage_ == MatrixStorage::diagonal && m != n)
    throw UsageError("DensityMatrix::at: coherence of a diagonal-only matrix");
  return entries_[index(m, n)];
}

std::string to_string(OracleScheme s) {
  switch (s) {
    case OracleScheme::exponential: return "exponential";
    case OracleScheme::ito: return "ito";
    case OracleScheme::stratonovich: return "stratonovich";
  }
  return "unknown";
}

OracleScheme parse_oracle_scheme(const std::string& s) {
  if (s == "exponential") return OracleScheme::exponential;
  if (s == "ito") return OracleScheme::ito;
  if (s == "stratonovich") return OracleScheme::stratonovich;
  throw ConfigError("unknown oracle scheme '" + s + "' (expected exponential, ito or stratonovich)");
}

DensityMatrix init_coherent_density(double amplitude, double phase, std::size_t cutoff, MatrixStorage storage) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw ConfigError("config field 'alpha_amplitude': must be finite and >= 0");
  if (static_cast<double>(cutoff) < amplitude * amplitude + 8.0 * amplitude)
    throw ConfigError("config field 'fock_cutoff': " + std::to_string(cutoff) + " < alpha_amplitude^2 + " +
                      "8*alpha_amplitude = " + std::to_string(minimum_fock_cutoff(amplitude)) +
                      " (Poisson tail containment)");

  const std::size_t dim = cutoff + 1;
  std::vector<cplx> c(dim, cplx(0.0, 0.0));
  if (amplitude == 0.0) {
    c[0] = 1.0;
  } else {
    const double log_a = std::log(amplitude);
    for (std::size_t n = 0; n < dim; ++n) {
      const double x = static_cast<double>(n);
      const double log_mag = -0.5 * amplitude * amplitude + x * log_a - 0.5 * std::lgamma(x + 1.0);
      c[n] = std::polar(std::exp(log_mag), x * phase);
    }
  }
  double norm = 0.0;
  for (const cplx& z : c) norm += std::norm(z);

  DensityMatrix rho(cutoff, storage);
  for (std::size_t m = 0; m < dim; ++m) {
    if (storage == MatrixStorage::diagonal) {
      rho.at(m, m) = std::norm(c[m]) / norm;
      continue;
    }
    for (std::size_t n = 0; n < dim; ++n) rho.at(m, n) = c[m] * std::conj(c[n]) / norm;
  }
  for (std::size_t n = 0; n < dim; ++n) rho.at(n, n) = rho.population(n);  // drop rounding in Im(rho_nn)
  return rho;
}

StepInfo step_master_ito(DensityMatrix& rho, double dW, double dt, double gamma, Exec exec,
                         std::int64_t step_index) {
  if (!(dt > 0.0)) throw UsageError("step_master_ito: dt must be > 0");
  const Moments mo = diagonal_moments(rho);
  const double mean = mo.s1;
  const double sg = std::sqrt(gamma);
  for_each_entry(rho, exec, [&](std::size_t m, std::size_t n, cplx& z) {
    const double d = static_cast<double>(m) - static_cast<double>(n);
    const double s = static_cast<double>(m + n);
    z *= 1.0 + (-0.5 * gamma * d * d * dt + sg * (s - 2.0 * mean) * dW);
  });
  StepInfo info;
  info.record_increment = dW + 2.0 * sg * mean * dt;
  info.trace_before_normalization = finish_step(rho, exec, step_index);
  return info;
}

StepInfo step_master_stratonovich(DensityMatrix& rho, double dW, double dt, double gamma, int iterations,
                                  Exec exec, std::int64_t step_index) {
  if (!(dt > 0.0)) throw UsageError("step_master_stratonovich: dt must be > 0");
  if (iterations < 1) throw UsageError("step_master_stratonovich: iterations must be >= 1");
  const DensityMatrix start = rho;
  const Moments m0 = diagonal_moments(start);
  const double sg = std::sqrt(gamma);
  auto start_data = start.raw();
  const std::size_t dim = rho.dim();
  const bool diag = rho.diagonal_only();

  for (int it = 0; it < iterations; ++it) {
    // Moments of the midpoint (start + current)/2, by linearity.
    const Moments mc = diagonal_moments(rho);
    const double s1 = 0.5 * (m0.s1 + mc.s1);
    const double s2 = 0.5 * (m0.s2 + mc.s2);
    for_each_entry(rho, exec, [&](std::size_t m, std::size_t n, cplx& z) {
      const double d = static_cast<double>(m) - static_cast<double>(n);
      const double s = static_cast<double>(m + n);
      // gamma*D + gamma*C (drift) and sqrt(gamma)*H (noise), componentwise.
      const double drift = gamma * (-0.5 * d * d - 0.5 * s * s + 2.0 * s2 + 2.0 * s1 * s - 4.0 * s1 * s1);
      const double noise = sg * (s - 2.0 * s1);
      const cplx z0 = start_data[diag ? n : m * dim + n];
      const cplx mid = 0.5 * (z0 + z);
      z = z0 + (drift * dt + noise * dW) * mid;
    });
  }
  StepInfo info;
  info.record_increment = dW + 2.0 * sg * m0.s1 * dt;
  info.trace_before_normalization = finish_step(rho, exec, step_index);
  return info;
}

StepInfo step_master_exponential(DensityMatrix& rho, double dW, double dt, double gamma, Exec exec,
                                 std::int64_t step_index) {
  if (!(dt > 0.0)) throw UsageError("step_master_exponential: dt must be > 0");
  const Moments mo = diagonal_moments(rho);
  const double sg = std::sqrt(gamma);
  const double dY = dW + 2.0 * sg * mo.s1 * dt;

  const std::size_t dim = rho.dim();
  std::vector<double> log_u(dim);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < dim; ++n) {
    const double x = static_cast<double>(n);
    log_u[n] = -gamma * x * x * dt + sg * x * dY;
    top = std::max(top, log_u[n]);
  }
  std::vector<double> u(dim);
  for (std::size_t n = 0; n < dim; ++n) u[n] = std::exp(log_u[n] - top);

  for_each_entry(rho, exec, [&](std::size_t m, std::size_t n, cplx& z) { z *= u[m] * u[n]; });
  StepInfo info;
  info.record_increment = dY;
  info.trace_before_normalization = finish_step(rho, exec, step_index);
  return info;
}

StepInfo step_master(OracleScheme scheme, DensityMatrix& rho, double dW, double dt, double gamma, int iterations,
                     Exec exec, std::int64_t step_index) {
  switch (scheme) {
    case OracleScheme::ito: return step_master_ito(rho, dW, dt, gamma, exec, step_index);
    case OracleScheme::stratonovich:
      return step_master_stratonovich(rho, dW, dt, gamma, iterations, exec, step_index);
    case OracleScheme::exponential: break;
  }
  return step_master_exponential(rho, dW, dt, gamma, exec, step_index);
}

MeasurementRecord reconstruct_record(std::span<const double> w_path, std::span<const double> mean_n_path, double dt,
                                     double gamma) {
  if (w_path.size() != mean_n_path.size())
    throw UsageError("reconstruct_record: W path and mean path differ in length");
  if (w_path.empty()) throw UsageError("reconstruct_record: empty path");
  MeasurementRecord rec;
  rec.dt = dt;
  rec.y_values.resize(w_path.size());
  rec.y_values[0] = 0.0;
  const double sg = std::sqrt(gamma);
  for (std::size_t k = 1; k < w_path.size(); ++k)
    rec.y_values[k] = rec.y_values[k - 1] + (w_path[k] - w_path[k - 1]) + 2.0 * sg * mean_n_path[k - 1] * dt;
  return rec;
}

DensityMatrix closed_form_linear_solution(const DensityMatrix& rho0, const MeasurementRecord& record,
                                          std::size_t step, double gamma) {
  if (step >= record.y_values.size()) throw UsageError("closed_form_linear_solution: step beyond the record");
  if (step == 0) return rho0;

  const double t = static_cast<double>(step) * record.dt;
  const double y = record.y_values[step];
  const double sg = std::sqrt(gamma);
  const std::size_t dim = rho0.dim();

  // Separable exponent: -(g/2)(m-n)^2 t - (g/2)(m+n)^2 t = L_m + L_n with
  // L_n = -g n^2 t + sqrt(g) n Y.
  std::vector<double> log_l(dim);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < dim; ++n) {
    const double x = static_cast<double>(n);
    log_l[n] = -gamma * x * x * t + sg * x * y;
    if (rho0.population(n) > 0.0) top = std::max(top, log_l[n]);
  }
  if (!std::isfinite(top)) throw UsageError("closed_form_linear_solution: initial state has no population");

  DensityMatrix out = rho0;
  for_each_entry(out, Exec::serial, [&](std::size_t m, std::size_t n, cplx& z) {
    if (z != cplx(0.0, 0.0)) z *= std::exp(log_l[m] - top + log_l[n] - top);
  });
  const double tr = trace(out);
  for (auto& z : out.raw()) z /= tr;
  return out;
}

double trace(const DensityMatrix& rho) {
  double tr = 0.0;
  for (std::size_t n = 0; n < rho.dim(); ++n) tr += rho.population(n);
  return tr;
}

double mean_number(const DensityMatrix& rho) { return diagonal_moments(rho).s1; }

double variance_number(const DensityMatrix& rho) {
  const Moments mo = diagonal_moments(rho);
  return mo.s2 - mo.s1 * mo.s1;
}

double purity(const DensityMatrix& rho) {
  double p = 0.0;
  for (const cplx& z : rho.raw()) p += std::norm(z);
  return p;
}

double hermiticity_error(const DensityMatrix& rho) {
  double worst = 0.0;
  const std::size_t dim = rho.dim();
  for (std::size_t m = 0; m < dim; ++m) {
    worst = std::max(worst, std::abs(rho(m, m).imag()) * 2.0);
    if (rho.diagonal_only()) continue;
    for (std::size_t n = m + 1; n < dim; ++n) worst = std::max(worst, std::abs(rho(m, n) - std::conj(rho(n, m))));
  }
  return worst;
}

double min_population(const DensityMatrix& rho) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < rho.dim(); ++n) lo = std::min(lo, rho.population(n));
  return lo;
}

}  // namespace npwsim
