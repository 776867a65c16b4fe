#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace splitplot {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (seed, tag, index). Two streams with different
/// identifiers never overlap, so per-group and per-replication substreams can
/// be created in any order on any thread and still produce identical draws.
class Philox {
 public:
  using result_type = std::uint32_t;

  Philox(std::uint64_t seed, std::uint32_t tag, std::uint64_t index) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0, tag, static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (pos_ == 4) {
      block_ = bijection(ctr_, key_);
      ++ctr_[0];
      pos_ = 0;
    }
    return block_[pos_++];
  }

  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  /// The keyed 10-round bijection on one counter block.
  static Block bijection(Block c, Key k) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += kW0;
      k[1] += kW1;
    }
    return c;
  }

  /// 64 random bits from two consecutive outputs.
  std::uint64_t next_u64() noexcept {
    const std::uint64_t lo = (*this)();
    const std::uint64_t hi = (*this)();
    return lo | (hi << 32);
  }

 private:
  Key key_;
  Block ctr_;
  Block block_{};
  int pos_ = 4;
};
/// SplitMix64 finalizer; derives child seeds from (parent, index).
constexpr std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  std::uint64_t z = parent + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Stream tags, so distinct consumers of one seed never share a substream.
namespace stream_tag {
inline constexpr std::uint32_t kSubsample = 0x53554253u;  // "SUBS"
inline constexpr std::uint32_t kData = 0x44415441u;       // "DATA"
inline constexpr std::uint32_t kMixture = 0x4D495854u;    // "MIXT"
inline constexpr std::uint32_t kBootstrap = 0x424F4F54u;  // "BOOT"
}  // namespace stream_tag

}  // namespace splitplot
