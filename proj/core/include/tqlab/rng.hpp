#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace tq {

// Hand-rolled generator (splitmix64 seeding + xoshiro256++) so that streams
// are bit-reproducible across standard libraries and platforms. The standard
// <random> distributions are implementation-defined and must not be used
// anywhere results are persisted or asserted on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : s_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
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

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  /// Standard normal via Box-Muller (no state caching, one draw per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t s_[4];
};

/// Mixes a base seed with arbitrary tags into a fresh stream seed, so that
/// sub-tasks (per batch, per (t,i) cell, per purpose string) get independent
/// deterministic streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::initializer_list<std::int64_t> parts = {}) {
  std::uint64_t h = base ^ 0x6a09e667f3bcc908ULL;
  for (char c : tag) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h = Rng::splitmix64(h);
  }
  for (std::int64_t p : parts) {
    h ^= static_cast<std::uint64_t>(p) + 0x9e3779b97f4a7c15ULL;
    h = Rng::splitmix64(h);
  }
  return h;
}

}  // namespace tq
