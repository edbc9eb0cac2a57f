#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "npwsim/noise.hpp"
#include "npwsim/parallel.hpp"

namespace npwsim {

/// Weights are renormalised (divided by sum/n_traj) every this many steps.
inline constexpr std::int64_t kRenormalizeEvery = 100;

/// Fill `out` with the per-trajectory fictitious increments of one step.
void draw_fictitious(const NoiseStreams& streams, StreamTag tag, std::int64_t step_index, double dt,
                     std::span<double> out, Exec exec = Exec::parallel);

/// Pair accumulator for blocked reductions of (numerator, denominator).
template <class T>
struct SumPair {
  T num{};
  T den{};
  SumPair& operator+=(const SumPair& o) {
    num += o.num;
    den += o.den;
    return *this;
  }
};

}  // namespace npwsim
