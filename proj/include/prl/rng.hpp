#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace prl {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stream seeds are pure functions of their coordinates, so any schedule that
// visits the same (seed, stream, step) triples draws the same numbers.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                           std::uint64_t step = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) + step);
}

// FNV-1a, used to turn subsystem labels into stream ids.
inline constexpr std::uint64_t label_hash(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return derive_seed(seed, label_hash(label));
}

// Small counter-seeded generator; cheap to construct, so one can be created
// per (block, sweep) without measurable cost.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Uniform on [0, 1) with 53 random bits.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng>
std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

template <class Rng>
std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t h = 0; h < alpha.size(); ++h) {
    std::gamma_distribution<double> gamma(alpha[h], 1.0);
    out[h] = gamma(rng);
    total += out[h];
  }
  if (total <= 0.0) {
    // All draws underflowed (tiny concentrations); fall back to the mean.
    double a = 0.0;
    for (double x : alpha) a += x;
    for (std::size_t h = 0; h < alpha.size(); ++h) out[h] = alpha[h] / a;
    return out;
  }
  for (double& x : out) x /= total;
  return out;
}

}  // namespace prl
