#include "npwsim/noise.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "npwsim/errors.hpp"

namespace npwsim {

std::uint64_t StreamKey::digest() const noexcept {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(tag) ^ 0x6e70772d73696d00ULL);
  h = mix64(h ^ mix64(index));
  return seed ^ h;
}

std::uint64_t stream_word(std::uint64_t digest, std::uint64_t counter) noexcept {
  return mix64(mix64(digest) ^ mix64(counter ^ 0xd1b54a32d192ed03ULL));
}

double stream_uniform(std::uint64_t digest, std::uint64_t counter) noexcept {
  constexpr double scale = 0x1.0p-53;
  return (static_cast<double>(stream_word(digest, counter) >> 11) + 0.5) * scale;
}

double standard_normal(std::uint64_t digest, std::uint64_t index) noexcept {
  // Box-Muller on words 2*index and 2*index+1.
  const double u1 = stream_uniform(digest, 2 * index);
  const double u2 = stream_uniform(digest, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double wiener_increment(const StreamKey& key, std::int64_t step_index, double dt) {
  if (!(dt > 0.0)) throw UsageError("wiener_increment: dt must be > 0");
  return std::sqrt(dt) * standard_normal(key.digest(), static_cast<std::uint64_t>(step_index));
}

std::uint32_t sample_poisson(double lambda, const StreamKey& key, std::uint64_t draw_index) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw UsageError("sample_poisson: lambda must be finite and >= 0");
  if (lambda == 0.0) return 0;
  // Each draw gets its own sub-stream so rejection loops never shift later draws.
  KeyedEngine engine(mix64(key.digest() ^ mix64(draw_index)), 0);
  std::poisson_distribution<std::uint32_t> dist(lambda);
  return dist(engine);
}

NoiseStreams::NoiseStreams(std::uint64_t seed) noexcept
    : seed_(seed), measurement_digest_(StreamKey{seed, StreamTag::measurement, 0}.digest()) {}

double NoiseStreams::measurement(std::int64_t step_index, double dt) const {
  if (!(dt > 0.0)) throw UsageError("wiener_increment: dt must be > 0");
  return std::sqrt(dt) * standard_normal(measurement_digest_, static_cast<std::uint64_t>(step_index));
}

double NoiseStreams::fictitious(StreamTag tag, std::uint64_t trajectory, std::int64_t step_index, double dt) const {
  return wiener_increment(StreamKey{seed_, tag, trajectory}, step_index, dt);
}

}  // namespace npwsim
