#pragma once

#include <cstdint>
#include <limits>

namespace npwsim {

/// Stream tags. Each tag names an independent family of increments.
enum class StreamTag : std::uint64_t {
  measurement = 0x57,        // "W": shared measurement innovation
  fictitious_v1 = 0x5631,    // "V1"
  fictitious_v2 = 0x5632,    // "V2"
  initial_number = 0x4e30,   // "N0": NPW initial number draws
};

/// Key of one counter-based stream: (seed, tag, trajectory index). The measurement
/// stream uses index 0 and never depends on the ensemble size.
struct StreamKey {
  std::uint64_t seed = 0;
  StreamTag tag = StreamTag::measurement;
  std::uint64_t index = 0;

  /// 64-bit digest of the key; the draw for (key, counter) is a pure function of
  /// (digest, counter).
  std::uint64_t digest() const noexcept;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Raw 64-bit word number `counter` of the stream with the given digest.
std::uint64_t stream_word(std::uint64_t digest, std::uint64_t counter) noexcept;

/// Uniform double in the open interval (0, 1).
double stream_uniform(std::uint64_t digest, std::uint64_t counter) noexcept;

/// Standard normal draw number `index` of the stream (stateless).
double standard_normal(std::uint64_t digest, std::uint64_t index) noexcept;

/// Normal(0, dt) increment for step `step_index`. Throws UsageError if dt <= 0.
double wiener_increment(const StreamKey& key, std::int64_t step_index, double dt);

/// Poisson(lambda) draw number `draw_index` of the stream. Throws UsageError if
/// lambda < 0 or is not finite.
std::uint32_t sample_poisson(double lambda, const StreamKey& key, std::uint64_t draw_index);

/// Convenience bundle: all streams of one run, derived from a single seed.
class NoiseStreams {
 public:
  explicit NoiseStreams(std::uint64_t seed) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  /// Shared innovation dW for step `step_index` (steps are 0-based: increment k
  /// drives the state from t_k to t_{k+1}).
  double measurement(std::int64_t step_index, double dt) const;

  /// Per-trajectory fictitious increment.
  double fictitious(StreamTag tag, std::uint64_t trajectory, std::int64_t step_index, double dt) const;

  StreamKey key(StreamTag tag, std::uint64_t index = 0) const noexcept { return {seed_, tag, index}; }

 private:
  std::uint64_t seed_;
  std::uint64_t measurement_digest_;
};

/// Uniform random bit generator over one keyed stream, for use with
/// <random> distributions. Deterministic given (key digest, start counter).
class KeyedEngine {
 public:
  using result_type = std::uint64_t;

  KeyedEngine(std::uint64_t digest, std::uint64_t start) noexcept : digest_(digest), counter_(start) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept { return stream_word(digest_, counter_++); }

 private:
  std::uint64_t digest_;
  std::uint64_t counter_;
};

}  // namespace npwsim
