#pragma once

#include <array>
#include <cstdint>
#include <cstddef>

namespace qoct {

// Self-contained PRNG (xoshiro256++ seeded through splitmix64). The standard
// library distributions are implementation-defined, so they cannot back the
// bit-reproducibility contract; these generators are identical everywhere.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased uniform index in [0, n).
  std::size_t index(std::size_t n) {
    const auto range = static_cast<std::uint64_t>(n);
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
      const std::uint64_t threshold = (0 - range) % range;
      while (low < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * range;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::size_t>(m >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_{};
};

enum class StreamTag : std::uint64_t {
  population_init = 1,
  pairing = 2,
  mutation = 3,
};

/// Independent stream addressed by (seed, tag, generation, slot). Streams do
/// not depend on consumption order elsewhere, which makes parallel evaluation
/// schedules irrelevant to the results.
inline Xoshiro256pp make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t generation,
                                std::uint64_t slot) {
  std::uint64_t x = seed;
  x = splitmix64_next(x) ^ (static_cast<std::uint64_t>(tag) * 0xA24BAED4963EE407ull);
  x = splitmix64_next(x) ^ (generation * 0x9FB21C651E98DF25ull);
  x = splitmix64_next(x) ^ (slot * 0xD6E8FEB86659FD93ull);
  return Xoshiro256pp(splitmix64_next(x));
}

}  // namespace qoct
