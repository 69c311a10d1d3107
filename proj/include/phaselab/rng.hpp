#pragma once

#include <cstdint>
#include <cmath>

namespace phaselab {

/// Deterministic random stream based on splitmix64 (Steele/Lea/Flood
/// SplittableRandom finalizer). One 64-bit counter advanced by a Weyl
/// constant, output a bijective hash of the counter, so streams are
/// reproducible across platforms and cheap to fork.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. Consumes exactly two draws per call so
  /// the stream position is input-independent.
  double gaussian() {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Seed for an independent child stream; distinct tags give distinct streams.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    RngStream s(seed ^ (0xA0761D6478BD642Full * (tag + 1)));
    return s.next_u64();
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::uint64_t state_;
};

}  // namespace phaselab
