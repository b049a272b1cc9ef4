// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>

namespace gdlm {

// SplitMix64 (Steele/Lea/Flood; the JDK SplittableRandom generator). The
// state is a counter advanced by a fixed odd constant and the output is a
// bijective mix of it, so independent streams can be spawned by hashing a
// (seed, purpose, index) triple through the same mix. All randomness in
// this library flows through this generator: every test vector is pinned
// to it.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  std::uint64_t operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1) with 53-bit resolution.
  double next_double() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); rejects exact zeros so logs and powers stay finite.
  double next_open() {
    double u;
    do {
      u = next_double();
    } while (u == 0.0);
    return u;
  }

  // Uniform integer in [0, bound) via 128-bit multiply-shift.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// Stream seed for (seed, purpose, index); distinct purposes give
// independent sequences under the same user seed.
std::uint64_t derive_stream(std::uint64_t seed, std::string_view purpose,
                            std::uint64_t index = 0);

double sample_standard_normal(SplitMix64& rng);

// Marsaglia-Tsang squeeze method; shapes below one use the boost
// gamma(shape) = gamma(shape+1) * U^(1/shape).
double sample_gamma(SplitMix64& rng, double shape);

Eigen::VectorXd sample_dirichlet(SplitMix64& rng, const Eigen::VectorXd& alpha);

// Index draw proportional to nonnegative weights (need not be normalized).
int sample_categorical(SplitMix64& rng, const Eigen::VectorXd& weights);

}  // namespace gdlm
