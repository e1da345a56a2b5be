#pragma once

#include <cstdint>
#include <limits>

namespace gridt {

__extension__ using uint128_t = unsigned __int128;

/// Counter-based SplitMix64 generator.
///
/// The whole generator state is (seed, draws), so a stream can be
/// repositioned in O(1). Event replay relies on this: events record the
/// draw counter and a replayed network resumes the exact same stream.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t draws = 0) noexcept
      : seed_(seed), draws_(draws) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++draws_;
    return mix(seed_ + draws_ * kGolden);
  }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    // Lemire's multiply-shift with rejection; exact and portable.
    auto product = static_cast<uint128_t>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<uint128_t>((*this)()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return draws_; }
  void reposition(std::uint64_t draws) noexcept { draws_ = draws; }

  /// Seed for an independent child stream (per run, per network).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix(mix(seed ^ 0x5851f42d4c957f2dULL) + (index + 1) * kGolden);
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t draws_;
};

}  // namespace gridt
