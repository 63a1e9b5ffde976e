#pragma once

#include <cstdint>

namespace okm {

// splitmix64. Self-contained so random streams do not depend on standard
// library distribution internals; identical seeds give identical streams
// on every platform.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1), 53 random bits
  double next_double() { return double(next() >> 11) * 0x1.0p-53; }
};

// derives an independent stream for (seed, lane); used to give every
// guess/trial pair its own private generator
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t lane) {
  SplitMix64 g(seed + 0x9e3779b97f4a7c15ull * (lane + 1));
  g.next();
  return g.next();
}

}  // namespace okm
