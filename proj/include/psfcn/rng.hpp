#pragma once

#include <cstdint>

namespace psfcn {

// Splitmix64 counter generator. Deterministic across platforms and
// compilers, which the reproducibility contract relies on; std::mt19937
// engines are portable but the standard distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 24 bits of mantissa.
  float uniform() { return float(next_u64() >> 40) * 0x1p-24f; }

  // Uniform in [0, 1), 53 bits.
  double uniform_double() { return double(next_u64() >> 11) * 0x1p-53; }

  float uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n), n >= 1.
  int uniform_int(int n) {
    const std::uint64_t bound = std::uint64_t(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return int(v % bound);
  }

  // Independent child stream; deterministic in (seed, stream).
  Rng fork(std::uint64_t stream) const {
    Rng mixer(seed_ ^ (0x6a09e667f3bcc909ull + stream * 0x9e3779b97f4a7c15ull));
    return Rng(mixer.next_u64());
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace psfcn
