#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace npwsim {

/// Execution policy for per-step kernels. `serial` is the plain reference loop
/// kept for testing; `parallel` is the OpenMP kernel.
enum class Exec { serial, parallel };

/// Reduction block size. Fixed so that parallel results do not depend on the
/// number of threads.
inline constexpr std::size_t kReduceBlock = 1024;

/// Deterministic blocked reduction of `term(i)` over [0, n).
///
/// Serial: one left-to-right accumulation (reference order).
/// Parallel: each block of kReduceBlock indices is summed left-to-right, then the
/// block partials are summed left-to-right. Bit-identical for any thread count.
template <class T, class Term>
T reduce_sum(std::size_t n, Exec exec, Term&& term) {
  if (exec == Exec::serial) {
    T acc{};
    for (std::size_t i = 0; i < n; ++i) acc += term(i);
    return acc;
  }
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<T> partial(blocks, T{});
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = std::min(n, lo + kReduceBlock);
    T acc{};
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  T acc{};
  for (const T& p : partial) acc += p;
  return acc;
}

/// Per-group version of reduce_sum over `groups` equal contiguous ranges of
/// [0, n). Blocks never straddle a group, so each group's result is the same
/// as reduce_sum over that range alone.
template <class T, class Term>
std::vector<T> grouped_reduce_sum(std::size_t n, std::size_t groups, Exec exec, Term&& term) {
  const std::size_t len = n / groups;
  std::vector<T> out(groups, T{});
  if (exec == Exec::serial) {
    for (std::size_t g = 0; g < groups; ++g)
      for (std::size_t i = g * len; i < (g + 1) * len; ++i) out[g] += term(i);
    return out;
  }
  const std::size_t per_group = (len + kReduceBlock - 1) / kReduceBlock;
  std::vector<T> partial(groups * per_group, T{});
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(partial.size()); ++b) {
    const std::size_t g = static_cast<std::size_t>(b) / per_group;
    const std::size_t lo = g * len + (static_cast<std::size_t>(b) % per_group) * kReduceBlock;
    const std::size_t hi = std::min((g + 1) * len, lo + kReduceBlock);
    T acc{};
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t j = 0; j < per_group; ++j) out[g] += partial[g * per_group + j];
  return out;
}

/// Per-group maximum of `term(i)`.
template <class Term>
std::vector<double> grouped_reduce_max(std::size_t n, std::size_t groups, Exec exec, Term&& term) {
  const std::size_t len = n / groups;
  std::vector<double> out(groups, -std::numeric_limits<double>::infinity());
  if (exec == Exec::serial) {
    for (std::size_t g = 0; g < groups; ++g)
      for (std::size_t i = g * len; i < (g + 1) * len; ++i) out[g] = std::max(out[g], term(i));
    return out;
  }
  for (std::size_t g = 0; g < groups; ++g) {
    double best = -std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(max : best) schedule(static)
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(g * len); i < static_cast<std::ptrdiff_t>((g + 1) * len); ++i)
      best = std::max(best, term(static_cast<std::size_t>(i)));
    out[g] = best;
  }
  return out;
}

/// Maximum of `term(i)` over [0, n); order-independent so no blocking is needed.
template <class Term>
double reduce_max(std::size_t n, Exec exec, Term&& term) {
  double best = -std::numeric_limits<double>::infinity();
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) best = std::max(best, term(i));
    return best;
  }
#pragma omp parallel for reduction(max : best) schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    best = std::max(best, term(static_cast<std::size_t>(i)));
  return best;
}

/// Apply `body(i)` for i in [0, n).
template <class Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) body(static_cast<std::size_t>(i));
}

/// Set the OpenMP thread count (no-op without OpenMP). Returns the count in effect.
int set_thread_count(int threads);
int thread_count();

}  // namespace npwsim
