#include "npwsim/ensemble.hpp"

#include <cmath>

#include "npwsim/errors.hpp"

namespace npwsim {

void draw_fictitious(const NoiseStreams& streams, StreamTag tag, std::int64_t step_index, double dt,
                     std::span<double> out, Exec exec) {
  if (!(dt > 0.0)) throw UsageError("draw_fictitious: dt must be > 0");
  for_each_index(out.size(), exec, [&](std::size_t i) { out[i] = streams.fictitious(tag, i, step_index, dt); });
}

}  // namespace npwsim
