#pragma once

#include <cstdint>
#include <limits>

namespace geosched {

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator, carries 8 bytes
/// of state, so one engine per chain/sample is affordable.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in the open interval (0, 1).
  double uniform();
  /// Standard normal draw (Box-Muller, no cached second value).
  double normal();

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and up to two stream
/// indices. Used wherever results must not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace geosched
