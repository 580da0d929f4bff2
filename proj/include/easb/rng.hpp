#pragma once

// Platform-independent pseudorandom generation for synthetic scenarios.
//
// Seeding: the 256-bit xoshiro256** state is filled with four consecutive
// SplitMix64 outputs of the 64-bit user seed. Both algorithms follow the
// public-domain reference implementations by Blackman and Vigna
// (https://prng.di.unimi.it/). Derived draws:
//   uniform01()       = (next() >> 11) * 2^-53, in [0,1)
//   uniform_int(l, h) = l + next() % (h - l + 1), rejecting draws at or above
//                       the largest multiple of the range to avoid modulo bias
// Any implementation reproducing these steps reproduces every scenario.

#include <array>
#include <cstdint>

#include "easb/error.hpp"

namespace easb {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

class Xoshiro256StarStar {
 public:
  explicit Xoshiro256StarStar(std::array<std::uint64_t, 4> state) : s_(state) {}

  static Xoshiro256StarStar from_seed(std::uint64_t seed) {
    SplitMix64 sm(seed);
    return Xoshiro256StarStar({sm.next(), sm.next(), sm.next(), sm.next()});
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) throw ValidationError("uniform_int: empty range");
    const std::uint64_t range = hi - lo + 1;
    if (range == 0) return next();  // full 64-bit span
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return lo + x % range;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_;
};

}  // namespace easb
