#pragma once

#include <cstdint>
#include <limits>

namespace spca {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the k-th output is mix64(key + (k+1)·φ), where
/// φ is the 64-bit golden ratio. Any (key, counter) pair is reproducible
/// without replaying earlier draws. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(mix64(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + (++counter_) * kGolden); }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream-split rule: substream `stream` of `base` uses seed base ⊕ stream.
constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream) { return base ^ stream; }

/// Seed for replicate r at grid point g: base ⊕ mix64(g·2³² + r).
constexpr std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t grid_index, std::uint64_t replicate) {
  return base ^ mix64((grid_index << 32) + replicate);
}

}  // namespace spca
