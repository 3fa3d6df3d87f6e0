#ifndef MPSROS_RNG_HPP
#define MPSROS_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace mpsros {

/// SplitMix64 finalizer; used to turn (seed, stream) pairs into well-mixed
/// engine seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seedable, splittable random source. Variate transforms are written out
/// here rather than taken from <random> distributions so that streams are
/// bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent child stream `index` of a master seed. Distinct indices give
  /// distinct engine seeds; the mapping is fixed and platform-independent.
  static Rng stream(std::uint64_t master_seed, std::uint64_t index);
  static std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

  /// Splits off a child generator; advances this one by a single draw.
  Rng split();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Exponential with the given rate; strictly positive.
  double exponential(double rate);
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);
  /// Index i drawn with probability weights[i] / sum(weights).
  std::size_t categorical(std::span<const double> weights);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace mpsros

#endif  // MPSROS_RNG_HPP
