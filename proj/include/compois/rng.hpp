#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace compois {

/// Seedable, splittable pseudo-random stream (xoshiro256++ seeded through
/// splitmix64). Streams derived with `derive` from distinct (key, index)
/// pairs are statistically independent, which is what the parallel kernels
/// rely on: worker i always gets `derive(key, i)` regardless of scheduling.
///
/// Satisfies UniformRandomBitGenerator so standard distributions accept it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) noexcept;

  static RngStream derive(std::uint64_t key, std::uint64_t index) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next(); }

  result_type next() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on (0, 1]; never returns 0 so log() is always finite.
  double uniform_pos() noexcept {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method (no cached spare, so the
  /// stream position depends only on the number of calls).
  double normal() noexcept;

  /// Child stream keyed on this stream's current state; advances this stream.
  RngStream split() noexcept { return RngStream::derive(next(), next()); }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace compois
