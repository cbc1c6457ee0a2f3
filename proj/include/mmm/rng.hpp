// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_RNG_HPP
#define MMM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "mmm/normal.hpp"

// Counter-derived random streams. Every sampling task (iteration, unit,
// cluster, purpose) owns a stream keyed by those ids, so results do not
// depend on thread scheduling and a root seed reproduces a run bit for bit.

namespace mmm {

namespace stream {
// Purpose ids for stream derivation.
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kGibbs = 2;
inline constexpr std::uint64_t kOrthant = 3;
inline constexpr std::uint64_t kCount = 4;
inline constexpr std::uint64_t kLabel = 5;
inline constexpr std::uint64_t kLatent = 6;
inline constexpr std::uint64_t kNoise = 7;
inline constexpr std::uint64_t kEmit = 8;
inline constexpr std::uint64_t kRestart = 9;
}  // namespace stream

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// xoshiro256++ seeded through splitmix64 from a (root seed, key...) tuple.
class RngStream {
 public:
  explicit RngStream(std::uint64_t root, std::initializer_list<std::uint64_t> key = {}) {
    std::uint64_t h = root;
    (void)splitmix64(h);
    for (std::uint64_t w : key) {
      h ^= w + 0x9E3779B97F4A7C15ull;
      (void)splitmix64(h);
    }
    for (auto& s : s_) s = splitmix64(h);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in (0,1): 53 mantissa bits, zero excluded.
  double uniform() {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double normal() { return norm_quantile(uniform()); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection to kill modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  // Poisson draw by exponential inter-arrival counting; exact for the
  // moderate rates produced by the generator (lambda up to a few hundred).
  long poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    long count = -1;
    double sum = 0.0;
    while (sum <= lambda) {
      sum += -std::log(uniform());
      ++count;
    }
    return count;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Deterministic sub-seed for an independent component run.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> key) {
  return RngStream(root, key).next();
}

}  // namespace mmm

#endif  // MMM_RNG_HPP
