#pragma once

#include <cstddef>
#include <cstdint>
#include <cmath>
#include <random>

namespace proxsgd {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform integer in [0, n). Rejection sampling keeps the sequence identical
/// across standard library implementations.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = Rng::max() - Rng::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % bound);
}

/// Standard normal via Box-Muller on 53-bit uniforms, portable across
/// standard libraries unlike std::normal_distribution.
class NormalSampler {
 public:
  double operator()(Rng& rng);

 private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline double uniform_unit(Rng& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

inline double NormalSampler::operator()(Rng& rng) {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform_unit(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform_unit(rng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

}  // namespace proxsgd
