#pragma once

#include <cstdint>
#include <limits>

namespace flats {

/// SplitMix64 step (Steele, Lea & Flood). Used to expand seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/**
 * xoshiro256** 1.0 (Blackman & Vigna), seeded by four SplitMix64 outputs.
 *
 * The algorithm is fully specified, so streams reproduce bit-for-bit on any
 * platform or language that follows it. Uniform doubles take the top 53
 * bits; normal draws use the Box-Muller transform on two uniforms and
 * return both variates in turn.
 */
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  /// Independent stream `stream` of `seed`, for seed-partitioned parallel
  /// generation.
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next() noexcept;
  std::uint64_t operator()() noexcept { return next(); }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return std::numeric_limits<std::uint64_t>::max(); }

  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n), n > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal.
  double normal() noexcept;

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace flats
