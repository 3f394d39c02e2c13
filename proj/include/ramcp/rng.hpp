#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace ramcp {

/// Seeded random stream. Child streams are derived from the seed alone, so a
/// run is reproducible from one integer regardless of call order elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform draw in [0, 1).
  double uniform();
  double normal(double mean, double stddev);
  std::size_t uniform_index(std::size_t n);

  /// Index drawn with probability proportional to `weights` (nonnegative,
  /// positive sum).
  std::size_t categorical(std::span<const double> weights);

  /// Independent stream keyed by `stream`.
  Rng split(std::uint64_t stream) const;

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ramcp
