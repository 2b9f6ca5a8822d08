#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace tcgen {

/// Seeded random stream with explicit child-stream derivation.
///
/// All stochastic stages derive their own stream from (root seed, stage tag,
/// indices), so stages and ensemble members can run in any order or in
/// parallel and still produce identical draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix(seed)) {}

  /// Child stream keyed by a stage tag and up to two indices.
  static Rng derive(std::uint64_t root, std::string_view tag,
                    std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = root;
    for (char c : tag) h = mix(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    h = mix(h ^ mix(a + 0x9e3779b97f4a7c15ULL));
    h = mix(h ^ mix(b + 0x7f4a7c159e3779b9ULL));
    return Rng(h);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    const std::uint64_t x = eng_();
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (pair cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

 private:
  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tcgen
