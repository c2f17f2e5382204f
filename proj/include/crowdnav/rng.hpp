#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace crowdnav {

// Seeded 64-bit Mersenne Twister with a fixed mapping to doubles, so that
// streams are reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  // Derives an independent sub-seed from a seed and a stream label.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t label);

 private:
  std::mt19937_64 engine_;
};

}  // namespace crowdnav
