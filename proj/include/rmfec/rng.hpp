#pragma once

#include <cmath>
#include <cstdint>

namespace rmfec {

// splitmix64 (Steele/Lea/Vigna). One 64-bit word of state, period 2^64,
// cheap enough to construct one stream per Monte-Carlo trial.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform on (0,1]; never 0, so log() is safe
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  bool next_bit() { return (next_u64() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

// Substream seed for one trial. The map (master_seed, trial) -> seed is a
// fixed hash, so sampling is reproducible bit-for-bit no matter how trials
// are distributed over workers.
inline std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t trial) {
  std::uint64_t z = master_seed ^ (0x9e3779b97f4a7c15ull + trial * 0xd1342543de82ef95ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Standard normal variates via Box-Muller on a SplitMix64 stream. We own the
// whole path (no std::normal_distribution) so that sampled noise is identical
// across standard-library implementations.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double u1 = rng_.next_unit();
    const double u2 = rng_.next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(two_pi * u2);
    have_spare_ = true;
    return radius * std::cos(two_pi * u2);
  }

  SplitMix64& uniform() { return rng_; }

 private:
  SplitMix64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rmfec
