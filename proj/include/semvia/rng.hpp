#pragma once

// Counter-based uniform generator.
//
// Draw k (k = 0, 1, ...) of a stream with 64-bit seed s is
//
//   z  = s + (k + 1) * 0x9E3779B97F4A7C15          (mod 2^64)
//   z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z  =  z ^ (z >> 31)
//   u  = (z >> 11) * 2^-53                          in [0, 1)
//
// which is exactly the k-th output of SplitMix64 started from state s, so the
// stream can be consumed sequentially or addressed by index. Slot t (t >= 2)
// consumes draws 3(t-2), 3(t-2)+1, 3(t-2)+2 in the order source, sample,
// channel. Replication r of a multi-run experiment uses seed s ^ mix64(r);
// mix64(0) == 0, so replication 0 reuses the base seed.

#include <cstdint>

namespace semvia::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double uniform_at(std::uint64_t seed, std::uint64_t index) noexcept {
  return to_unit(mix64(seed + (index + 1) * kGolden));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replication) noexcept {
  return seed ^ mix64(replication);
}

class CounterStream {
 public:
  explicit constexpr CounterStream(std::uint64_t seed, std::uint64_t start = 0) noexcept
      : seed_(seed), counter_(start) {}

  constexpr double next() noexcept { return uniform_at(seed_, counter_++); }
  constexpr std::uint64_t counter() const noexcept { return counter_; }
  constexpr std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace semvia::rng
