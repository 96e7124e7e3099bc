#ifndef CIDPRED_RNG_HPP_
#define CIDPRED_RNG_HPP_

#include <cstdint>
#include <random>

namespace cidpred {

/// splitmix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of trajectory `index` under `master`:
///   mix64(mix64(master) ^ (index * 0xD1B54A32D192ED03)).
/// Every worker derives its own stream this way; streams are never shared.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ (index * 0xD1B54A32D192ED03ULL));
}

/*
 * Random stream. The engine is std::mt19937_64, whose output sequence is
 * fixed by the standard; the variate transforms below are written out by hand
 * (the <random> distributions are implementation-defined) so that identical
 * seeds give identical doubles on every toolchain.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (Box-Muller, one variate per call).
  double normal();

  /// Unit-rate exponential.
  double exponential();

  /// Uniform index in [0, n).
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cidpred

#endif  // CIDPRED_RNG_HPP_
