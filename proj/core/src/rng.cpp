#include "geosched/rng.hpp"

#include <cmath>
#include <numbers>

namespace geosched {

double SplitMix64::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is never returned.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double SplitMix64::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(seed);
  std::uint64_t h = g();
  SplitMix64 ga(h ^ (a * 0xd1b54a32d192ed03ULL));
  h = ga();
  SplitMix64 gb(h ^ (b * 0x8cb92ba72f3d8dd7ULL + 0x632be59bd9b4e019ULL));
  return gb();
}

}  // namespace geosched
