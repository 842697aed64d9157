#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace openmix {

/// Counter-based random stream. Output i is a fixed SplitMix64 hash of
/// (seed, i), so a stream is reproducible bit-for-bit on every platform.
/// All samplers below are implemented here rather than through <random>,
/// whose distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n) noexcept;
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
  /// Gamma(shape, 1), Marsaglia–Tsang.
  double gamma(double shape) noexcept;
  /// Beta(a, b) through two gamma draws.
  double beta(double a, double b) noexcept;

  /// Independent stream keyed by `stream`; does not advance this one.
  Rng fork(std::uint64_t stream) const noexcept;

  void shuffle(std::span<std::size_t> values) noexcept;
  std::vector<std::size_t> permutation(std::size_t n) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace openmix
