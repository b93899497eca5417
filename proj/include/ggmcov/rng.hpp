#pragma once

#include <cmath>
#include <cstdint>

namespace ggmcov::rng {

/// Identifier of the pinned random number generator. Bump on any change to
/// the algorithms below; tests/golden_rng.csv freezes its output for seed 0.
inline constexpr const char* kGeneratorId = "splitmix64-polar/v1";

/// splitmix64 finalizer (Stafford mix13), used both as the engine output
/// function and to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives the seed of substream `index` of a parent stream. Substreams are
/// the unit of parallelism: results never depend on which worker consumes
/// which index.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed + 0x9E3779B97F4A7C15ull) ^
               (index + 0xD1B54A32D192ED03ull));
}

/// Fixed substream tags so every consumer of randomness has its own lane
/// under one top-level seed.
namespace stream {
inline constexpr std::uint64_t kScenario = 1;
inline constexpr std::uint64_t kRuns = 2;
inline constexpr std::uint64_t kBoundH1 = 3;
inline constexpr std::uint64_t kBoundH0 = 4;
inline constexpr std::uint64_t kObservation = 5;
inline constexpr std::uint64_t kSweep = 6;
}  // namespace stream

/// splitmix64 engine with uniform and standard-normal output. Normals come
/// from the Marsaglia polar transform; the spare value is cached, so draws
/// must be consumed from a single thread per engine.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    return mix64(z);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ggmcov::rng
