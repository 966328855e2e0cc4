#pragma once

// Deterministic, splittable random streams.
//
// Stream-splitting rule: substream(seed, i) yields an independent generator
// for logical stream i (e.g. one stream per rounding trial).  The stream
// seed is derived as mix64(seed + GOLDEN * (i + 1)) and expanded into
// xoshiro256++ state by a splitmix64 chain, so creating a substream is O(1)
// and the sequence never depends on how many other streams were consumed.
// Normals come from an explicit Box-Muller transform; nothing here depends
// on implementation-defined <random> distribution internals.

#include <cmath>
#include <cstdint>

namespace demqubo::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (Vigna / Steele et al.)
inline std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed + kGolden * (stream + 1));
}

class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) {
    // splitmix64 expansion of the seed into full state
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += kGolden;
      w = mix64(x);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = kGolden;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
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

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

inline Xoshiro256pp substream(std::uint64_t seed, std::uint64_t stream) {
  return Xoshiro256pp(derive_seed(seed, stream));
}

// uniform double in [0, 1), 53 mantissa bits
inline double uniform01(Xoshiro256pp& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// uniform integer in [0, n), n >= 1; Lemire-style multiply-shift (biased by
// < 2^-64, irrelevant here and bit-reproducible everywhere)
inline std::uint64_t bounded(Xoshiro256pp& g, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(g()) * n) >> 64);
}

// standard normal via Box-Muller; caches the second deviate
class NormalSampler {
 public:
  explicit NormalSampler(Xoshiro256pp g) : g_(g) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1): offset by half an ulp so log() never sees zero
    const double u1 = (static_cast<double>(g_() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(g_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Xoshiro256pp& generator() { return g_; }

 private:
  Xoshiro256pp g_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace demqubo::rng
