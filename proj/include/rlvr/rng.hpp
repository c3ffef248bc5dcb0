#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>

#include "rlvr/types.hpp"

namespace rlvr {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a + 0x9e3779b97f4a7c15ull + b);
}

// Stable seed stream for (run, step, prompt, response) hierarchies.
inline std::uint64_t derive_seed(std::uint64_t run, std::uint64_t step,
                                 std::uint64_t item = 0,
                                 std::uint64_t lane = 0) {
  return hash_combine(hash_combine(hash_combine(run, step), item), lane);
}

inline std::uint64_t fnv1a64(std::span<const TokenId> tokens) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (TokenId t : tokens) {
    h ^= static_cast<std::uint32_t>(t);
    h *= 0x100000001b3ull;
  }
  return h;
}

// mt19937_64 with hand-rolled uniform/normal draws, so sequences depend only
// on the seed and not on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // [0, n), unbiased
  std::int64_t uniform_below(std::int64_t n) {
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % un;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return static_cast<std::int64_t>(x % un);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rlvr
