#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace sae {

__extension__ using uint128 = unsigned __int128;

/// Labels for the top level of the stream hierarchy. Each purpose gets its
/// own subtree so adding a consumer never perturbs the draws of another.
enum class StreamPurpose : std::uint64_t {
  Covariates = 1,
  ReferencePopulation = 2,
  Replicate = 3,
  Population = 4,
  Sample = 5,
  Census = 6,
  Beta = 7,
  AreaEffect = 8,
  SubareaEffect = 9,
  UnitError = 10,
  User = 100,
};

/**
 * Deterministic random stream identified by a master seed and a path of
 * integer labels.
 *
 * The identity (seed, path) is folded into a 64-bit key with splitmix64
 * finalizers; the key seeds a xoshiro256++ state. Children are derived from
 * the key, never from the current generator state, so `substream()` gives
 * the same result no matter how many values the parent has produced. All
 * transforms to uniform, normal and bounded-integer variates are implemented
 * here so results do not depend on the standard library's distributions.
 */
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed);

  /// Child stream keyed by one more path label.
  [[nodiscard]] RngStream substream(std::uint64_t label) const;
  [[nodiscard]] RngStream substream(StreamPurpose purpose) const {
    return substream(static_cast<std::uint64_t>(purpose));
  }
  [[nodiscard]] RngStream substream(std::initializer_list<std::uint64_t> labels) const;

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  result_type operator()() noexcept { return next_u64(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Unbiased integer in [0, n) by Lemire's multiply-and-reject. n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) noexcept {
    uint128 m = static_cast<uint128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<uint128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal via Box-Muller (one variate per call, no cached state).
  double normal() noexcept;

 private:
  RngStream(std::uint64_t key, bool /*from_key*/);

  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace sae
