#pragma once

#include <cstdint>
#include <random>

namespace rankspec {

/// SplitMix64 finalizer; a bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded 64-bit Mersenne Twister with platform-independent uniform doubles.
/// child(master, i) gives independent streams keyed only by (master, i), so
/// work can be split across threads without changing results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed + 0x9e3779b97f4a7c15ULL)) {}

  static Rng child(std::uint64_t master, std::uint64_t index) {
    return Rng(mix64(master) ^ mix64(index * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rankspec
