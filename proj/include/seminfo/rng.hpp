#ifndef SEMINFO_RNG_HPP
#define SEMINFO_RNG_HPP

#include <cmath>
#include <numbers>
#include <random>

namespace seminfo {

// 53-bit uniform in [0,1). Sampling goes through these helpers instead of
// std distributions so that sampled artifacts depend only on the engine
// stream, not on the standard library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller (one draw per call, two engine steps).
inline double gaussian01(std::mt19937_64& rng) {
  double u = uniform01(rng);
  double v = uniform01(rng);
  if (u <= 0.0) u = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u)) *
         std::cos(2.0 * std::numbers::pi * v);
}

}  // namespace seminfo

#endif  // SEMINFO_RNG_HPP
