#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "assg/errors.hpp"

namespace assg {

/// Seedable, splittable 64-bit generator used by every stochastic component.
///
/// Algorithm: xoshiro256++ state, initialized from a 64-bit seed through
/// splitmix64. Bounded integers use the multiply-shift rejection method,
/// reals use the top 53 bits, normals use Box-Muller (two draws per call,
/// no cached spare). All outputs are pure functions of the state, so a run
/// is reproducible from (algorithm id, seed) alone.
class Rng64 {
 public:
  static constexpr const char* kAlgorithmId = "xoshiro256++/splitmix64/box-muller";

  explicit Rng64(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
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

  /// Unbiased draw from {0, ..., n-1}.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw InvalidInput("uniform_index: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1).
  double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

  /// Standard normal draw.
  double gaussian() {
    const double u1 = 1.0 - uniform_real();  // (0, 1], keeps log finite
    const double u2 = uniform_real();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  /// Derives an independent child stream; advances this generator by one draw.
  Rng64 split() { return Rng64(next_u64()); }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace assg
