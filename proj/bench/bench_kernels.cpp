// Per-step kernels, serial reference vs OpenMP. Arg 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include <vector>

#include "npwsim/npw.hpp"
#include "npwsim/oracle.hpp"
#include "npwsim/pplus.hpp"

using namespace npwsim;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

void BM_npw_step(benchmark::State& st) {
  const auto exec = exec_of(st);
  const std::size_t n = static_cast<std::size_t>(st.range(1));
  NoiseStreams s(1);
  auto ens = init_npw_coherent(10.0, 0.0, n, s, exec, 10);
  std::vector<double> dv(n);
  std::int64_t k = 0;
  for (auto _ : st) {
    draw_fictitious(s, StreamTag::fictitious_v1, k, 1e-4, dv, exec);
    step_npw(ens, s.measurement(k, 1e-4), dv, 1e-4, 1.0, NpwNoiseCoefficient::derived_two, exec);
    ++k;
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}

void BM_pplus_step(benchmark::State& st) {
  const auto exec = exec_of(st);
  const std::size_t n = static_cast<std::size_t>(st.range(1));
  NoiseStreams s(1);
  auto ens = init_pplus(10.0, 0.0, n, 10);
  std::vector<double> v1(n), v2(n);
  std::int64_t k = 0;
  for (auto _ : st) {
    // stay well before the blow-up region
    if (k == 200) {
      ens = init_pplus(10.0, 0.0, n, 10);
      k = 0;
    }
    draw_fictitious(s, StreamTag::fictitious_v1, k, 1e-4, v1, exec);
    draw_fictitious(s, StreamTag::fictitious_v2, k, 1e-4, v2, exec);
    step_pplus(ens, s.measurement(k, 1e-4), v1, v2, 1e-4, 1.0, 3, exec);
    ++k;
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}

void BM_oracle_step(benchmark::State& st) {
  const auto exec = exec_of(st);
  const auto scheme = static_cast<OracleScheme>(st.range(1));
  auto rho = init_coherent_density(10.0, 0.0, 200);
  NoiseStreams s(1);
  std::int64_t k = 0;
  for (auto _ : st) {
    if (k == 500) {
      rho = init_coherent_density(10.0, 0.0, 200);
      k = 0;
    }
    step_master(scheme, rho, s.measurement(k, 1e-5), 1e-5, 1.0, 3, exec, k);
    ++k;
  }
}

}  // namespace

BENCHMARK(BM_npw_step)->ArgsProduct({{0, 1}, {10000, 100000}});
BENCHMARK(BM_pplus_step)->ArgsProduct({{0, 1}, {10000}});
BENCHMARK(BM_oracle_step)->ArgsProduct({{0, 1}, {0, 1, 2}});

BENCHMARK_MAIN();
