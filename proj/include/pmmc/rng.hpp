#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace pmmc {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit key and the 64-bit stream id fix a sequence; the block counter is
/// the position inside it. Constructing a generator is free, so every
/// (step, level, role) triple of a run gets its own stream and results never
/// depend on the order in which streams are consumed.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using block_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  Philox4x32(std::uint64_t key, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        stream_(stream) {}

  result_type operator()() noexcept {
    if (cursor_ == buffer_.size()) refill();
    return buffer_[cursor_++];
  }

  void discard(unsigned long long n) noexcept {
    while (n-- > 0) (*this)();
  }

  /// Ten Philox rounds applied to one counter block.
  static block_type block(block_type ctr, key_type key) noexcept {
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += w0;
        key[1] += w1;
      }
      const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  void refill() noexcept {
    const block_type out =
        block({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
               static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
              key_);
    ++counter_;
    buffer_[0] = std::uint64_t{out[0]} | (std::uint64_t{out[1]} << 32);
    buffer_[1] = std::uint64_t{out[2]} | (std::uint64_t{out[3]} << 32);
    cursor_ = 0;
  }

  key_type key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  std::size_t cursor_ = 2;
};

/// Uniform draw on the open interval (0, 1) from the top 53 bits.
template <class Rng>
double open_unit(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard Gumbel variate, -log(-log U).
template <class Rng>
double gumbel(Rng& rng) {
  return -std::log(-std::log(open_unit(rng)));
}

enum class StreamRole : std::uint8_t {
  init = 1,
  schedule = 2,
  swap = 3,
  sweep = 4,
  baseline = 5,
  auxiliary = 6,
};

/// Derives the substream for a (role, level, step) triple from one root seed.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t seed) noexcept : seed_(seed) {}

  [[nodiscard]] Philox4x32 stream(StreamRole role, int level, std::uint64_t step) const noexcept {
    const std::uint64_t id = (step << 16) | (static_cast<std::uint64_t>(level & 0xff) << 8) |
                             static_cast<std::uint64_t>(role);
    return Philox4x32(seed_, id);
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace pmmc
