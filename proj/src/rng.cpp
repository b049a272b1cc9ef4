// SPDX-License-Identifier: MIT
#include "gdlm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace gdlm {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t SplitMix64::next_below(std::uint64_t bound) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>((*this)()) * bound) >> 64);
}

std::uint64_t derive_stream(std::uint64_t seed, std::string_view purpose,
                            std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the purpose tag
  for (char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = mix64(seed ^ mix64(h));
  return mix64(s + index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
}

double sample_standard_normal(SplitMix64& rng) {
  // Box-Muller; the sine branch is discarded so each call consumes exactly
  // two uniforms.
  double u1 = rng.next_open();
  double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double sample_gamma(SplitMix64& rng, double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("sample_gamma: shape must be positive");
  if (shape < 1.0) {
    double g = sample_gamma(rng, shape + 1.0);
    return g * std::pow(rng.next_open(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = sample_standard_normal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = rng.next_open();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Eigen::VectorXd sample_dirichlet(SplitMix64& rng, const Eigen::VectorXd& alpha) {
  const int k = static_cast<int>(alpha.size());
  if (k < 1) throw std::invalid_argument("sample_dirichlet: empty alpha");
  Eigen::VectorXd x(k);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    x[i] = sample_gamma(rng, alpha[i]);
    total += x[i];
  }
  if (total <= 0.0) {
    // All gammas underflowed; fall back to the uniform barycenter.
    x.setConstant(1.0 / k);
    return x;
  }
  return x / total;
}

int sample_categorical(SplitMix64& rng, const Eigen::VectorXd& weights) {
  const int k = static_cast<int>(weights.size());
  if (k < 1) throw std::invalid_argument("sample_categorical: empty weights");
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("sample_categorical: negative weight");
    total += weights[i];
  }
  if (total <= 0.0) throw std::invalid_argument("sample_categorical: zero total weight");
  double u = rng.next_double() * total;
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return k - 1;
}

}  // namespace gdlm
