#pragma once

#include <cstdint>
#include <random>

namespace blogc::rt {

/// Seedable 64-bit generator with an explicit stream id. Every logical draw
/// (one sampled value, one MH uniform, one variable pick) bumps `calls` once.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1, std::uint64_t stream = 0) { reseed(seed, stream); }

  void reseed(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::mt19937_64& engine() { return engine_; }

  /// Uniform on the open interval (0, 1).
  double uniform01() {
    ++calls;
    return open01();
  }

  /// Uniform index in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n) {
    ++calls;
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  double open01() {
    // 53-bit mantissa, shifted off zero.
    return (static_cast<double>(engine_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  std::uint64_t calls = 0;

 private:
  std::mt19937_64 engine_;
};

}  // namespace blogc::rt
