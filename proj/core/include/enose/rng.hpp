#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace enose {

// splitmix64 finalizer (Steele, Lea, Flood 2014). Used both as the core
// generator step and to derive independent streams, so every random decision
// in the pipeline is reproducible from (seed, tag, index) alone.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stream derivation: state = mix64(seed ^ mix64(tag ^ mix64(index))).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return mix64(seed ^ mix64(tag ^ mix64(index)));
}

// Purpose tags; distinct tags give unrelated streams from the same run seed.
namespace rng_tag {
inline constexpr std::uint64_t kSample = 1;   // simgen, per sample index
inline constexpr std::uint64_t kSplit = 2;    // stratified split, per class
inline constexpr std::uint64_t kFolds = 3;    // fold assignment, per class
inline constexpr std::uint64_t kInit = 4;     // parameter init
inline constexpr std::uint64_t kShuffle = 5;  // epoch shuffles
inline constexpr std::uint64_t kDropout = 6;  // per-sample dropout masks
inline constexpr std::uint64_t kTree = 7;     // random forest, per tree
inline constexpr std::uint64_t kFold = 8;     // per-fold training seed
}  // namespace rng_tag

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // 53-bit uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller, cosine branch only; u1 in (0,1] so the log is finite.
  double normal(double mean, double sigma) {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_double();
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * std::numbers::pi * u2);
  }

  // Unbiased bounded draw in [0, n) (Lemire 2019).
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Fisher-Yates; fixed algorithm, stable across platforms.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

inline Rng derive_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return Rng(derive_seed(seed, tag, index));
}

}  // namespace enose
