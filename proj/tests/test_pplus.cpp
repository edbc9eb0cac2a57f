#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "npwsim/errors.hpp"
#include "npwsim/pplus.hpp"
#include "npwsim/simulation.hpp"

using namespace npwsim;
using cplx = std::complex<double>;

TEST_CASE("coherent state is a delta") {
  const auto e = init_pplus(10.0, 0.0, 50);
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(e.alpha[i] == cplx(10, 0));
    CHECK(e.beta[i] == cplx(10, 0));
    CHECK(e.log_weight[i] == cplx(0, 0));
  }
  CHECK(pplus_mean_number(e) == cplx(100, 0));
  const auto w = pplus_scaled_weights(e);
  for (const auto& x : w) CHECK((x.imag() == 0.0 && x.real() > 0.0));

  const auto vac = init_pplus(0.0, 1.0, 10);
  CHECK(pplus_mean_number(vac) == cplx(0, 0));

  const auto rot = init_pplus(2.0, 0.5, 4);
  CHECK(rot.beta[0] == std::conj(rot.alpha[0]));
  CHECK(std::abs(pplus_mean_number(rot) - cplx(4, 0)) <= 1e-14);
}

TEST_CASE("mean of 99 and 101 with equal weights") {
  auto e = init_pplus(1.0, 0.0, 2);
  e.alpha = {99.0, 101.0};
  e.beta = {1.0, 1.0};
  CHECK(pplus_mean_number(e) == cplx(100, 0));
}

TEST_CASE("gamma = 0 is the identity") {
  auto e = init_pplus(3.0, 0.2, 8);
  const auto e0 = e;
  std::vector<double> v1(8, 0.1), v2(8, -0.2);
  step_pplus(e, 0.3, v1, v2, 1e-3, 0.0, 3, Exec::serial);
  CHECK(e.alpha == e0.alpha);
  CHECK(e.beta == e0.beta);
  CHECK(e.log_weight == e0.log_weight);
}

TEST_CASE("single trajectory: mean-field drift cancels") {
  SUBCASE("no noise: nothing moves") {
    auto e = init_pplus(1.0, 0.0, 1);
    std::vector<double> v(1, 0.0);
    step_pplus(e, 0.0, v, v, 1e-2, 1.0, 3, Exec::serial);
    CHECK(e.alpha[0] == cplx(1, 0));
    CHECK(e.beta[0] == cplx(1, 0));
    CHECK(e.log_weight[0] == cplx(0, 0));
  }
  SUBCASE("with noise only the multiplicative noise acts") {
    const double g = 1.3, dt = 1e-3, dW = 0.02, dv1 = -0.01, dv2 = 0.03;
    auto e = init_pplus(2.0, 0.4, 1);
    const cplx a0 = e.alpha[0], b0 = e.beta[0];
    std::vector<double> v1(1, dv1), v2(1, dv2);
    step_pplus(e, dW, v1, v2, dt, g, 3, Exec::serial);
    const cplx i1(0, 1);
    const cplx sa = std::sqrt(g) * (i1 * dv1 + i1 * dv2 + dW);
    const cplx sb = std::sqrt(g) * (-i1 * dv1 + i1 * dv2 + dW);
    cplx a = a0, b = b0;
    for (int it = 0; it < 3; ++it) {
      const cplx am = 0.5 * (a0 + a), bm = 0.5 * (b0 + b);
      a = a0 + am * sa;
      b = b0 + bm * sb;
    }
    CHECK(std::abs(e.alpha[0] - a) <= 1e-14);
    CHECK(std::abs(e.beta[0] - b) <= 1e-14);
  }
}

TEST_CASE("weight drift vanishes when x equals the mean field") {
  // x = 1 for every trajectory: x + x^2 - 2 x E = 0
  auto e = init_pplus(1.0, 0.0, 4);
  std::vector<double> v(4, 0.0);
  step_pplus(e, 0.0, v, v, 1e-2, 2.0, 3, Exec::serial);
  for (const auto& l : e.log_weight) CHECK(l == cplx(0, 0));
}

TEST_CASE("renormalisation and groups") {
  auto e = init_pplus(1.0, 0.0, 4, 2);
  e.log_weight = {cplx(1.0, 0.3), cplx(2.0, -0.1), cplx(-5.0, 0.0), cplx(-5.0, 0.0)};
  e.alpha = {1.0, 3.0, 10.0, 10.0};
  const cplx before = pplus_mean_number(e);
  renormalize_pplus(e);
  CHECK(std::abs(pplus_mean_number(e) - before) <= 1e-13);
  for (const auto& ln : pplus_group_log_norms(e)) CHECK(std::abs(ln) <= 1e-13);
  // pooled mean averages the two group means
  const cplx w0 = std::exp(cplx(1.0, 0.3)), w1 = std::exp(cplx(2.0, -0.1));
  const cplx g0 = (w0 * 1.0 + w1 * 3.0) / (w0 + w1);
  CHECK(std::abs(before - 0.5 * (g0 + 10.0)) <= 1e-12);
  CHECK_THROWS_AS(init_pplus(1.0, 0.0, 5, 2), UsageError);
}

TEST_CASE("vanishing weight sum is a divergence") {
  auto e = init_pplus(1.0, 0.0, 2);
  e.log_weight = {cplx(-INFINITY, 0), cplx(-INFINITY, 0)};
  CHECK_THROWS_AS(pplus_mean_number(e), DivergenceError);
  CHECK(detect_divergence(pplus_health(e), 0.01, 0.1).diverged);

  e.log_weight = {cplx(-1000, 0.5), cplx(-1000, 0)};
  CHECK(std::isfinite(std::abs(pplus_mean_number(e))));
  const auto st = detect_divergence(pplus_health(e), 0.01, 0.1);
  CHECK(st.diverged);
  CHECK(*st.cause == DivergenceCause::weight_sum_underflow);
}

TEST_CASE("non-finite state is reported, not thrown") {
  auto e = init_pplus(1.0, 0.0, 3);
  e.alpha[1] = cplx(NAN, 0);
  const auto h = pplus_health(e);
  CHECK_FALSE(h.all_finite);
  CHECK(*detect_divergence(h, 0.01, 0.1).cause == DivergenceCause::non_finite);
}

TEST_CASE("short times: agrees with the oracle and stays real") {
  SimulationConfig cfg;
  cfg.t_final = 0.05;
  cfg.seed = 3;
  cfg = validate_config(cfg);
  RunOptions opts;
  opts.continue_after_divergence = true;
  opts.oracle_storage = MatrixStorage::diagonal;
  const auto oracle = run_oracle(cfg, opts);
  const auto pp = run_pplus(cfg, opts);
  const auto grid = make_time_grid(cfg);
  for (std::size_t r = 0; r < grid.times.size(); ++r) {
    INFO("t=" << grid.times[r] << " pplus=" << pp.mean_n[r] << " oracle=" << oracle.mean_n[r]
              << " precision=" << pp.precision[r]);
    REQUIRE(std::isfinite(pp.mean_n[r]));
    CHECK(std::abs(pp.mean_n[r] - oracle.mean_n[r]) <= 3.0 * pp.precision[r] + 1e-9);
  }
}

TEST_CASE("imaginary part of the mean stays within 5 batch errors before divergence") {
  const double dt = 1e-4, gamma = 1.0;
  const std::size_t n = 10000, batches = 10;
  NoiseStreams s(5);
  auto e = init_pplus(10.0, 0.0, n, batches);
  std::vector<double> v1(n), v2(n);
  for (int k = 0; k < 3000; ++k) {
    draw_fictitious(s, StreamTag::fictitious_v1, k, dt, v1, Exec::serial);
    draw_fictitious(s, StreamTag::fictitious_v2, k, dt, v2, Exec::serial);
    step_pplus(e, s.measurement(k, dt), v1, v2, dt, gamma, 3, Exec::serial);
    const auto h = pplus_health(e);
    if (detect_divergence(h, 0.01, (k + 1) * dt).diverged) break;
    if ((k + 1) % 100) continue;
    // rotate by -i so the real batch means are the imaginary parts
    auto x = pplus_products(e);
    for (auto& z : x) z *= cplx(0, -1);
    const auto est = batch_estimate(x, pplus_scaled_weights(e), batches);
    INFO("t=" << (k + 1) * dt << " imag=" << est.value << " se=" << est.precision);
    CHECK(std::abs(est.value) <= 5.0 * est.precision);
  }
}
