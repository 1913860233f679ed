#pragma once

// Counter-based Gaussian streams.
//
// Every normal draw is a pure function of (master_seed, stream_index, draw
// index): the 128-bit Philox4x32-10 counter holds (draw block, stream) and
// the 64-bit key holds the master seed. Worker scheduling therefore cannot
// change any draw.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace roughsde {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  // Raw 128-bit block number `block` of this stream.
  Philox4x32::Counter raw_block(std::uint64_t block) const {
    const Philox4x32::Counter ctr = {
        static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32)};
    const Philox4x32::Key key = {static_cast<std::uint32_t>(master_seed),
                                 static_cast<std::uint32_t>(master_seed >> 32)};
    return Philox4x32::block(ctr, key);
  }

  // Pair of uniforms in the open interval (0,1) with 53-bit resolution.
  std::array<double, 2> uniform_pair(std::uint64_t block) const {
    const auto r = raw_block(block);
    const std::uint64_t w0 = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
    const std::uint64_t w1 = (static_cast<std::uint64_t>(r[3]) << 32) | r[2];
    constexpr double kScale = 0x1.0p-53;
    return {(static_cast<double>(w0 >> 11) + 0.5) * kScale,
            (static_cast<double>(w1 >> 11) + 0.5) * kScale};
  }

  // Standard normals with indices [offset, offset + out.size()). Draw 2b and
  // 2b+1 are the Box-Muller pair of block b.
  void fill_normals(std::uint64_t offset, std::span<double> out) const {
    std::uint64_t idx = offset;
    std::size_t pos = 0;
    while (pos < out.size()) {
      const std::uint64_t blk = idx / 2;
      const auto [u1, u2] = uniform_pair(blk);
      const double radius = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      if (idx % 2 == 0) {
        out[pos++] = radius * std::cos(angle);
        ++idx;
        if (pos == out.size()) break;
      }
      out[pos++] = radius * std::sin(angle);
      ++idx;
    }
  }

  double normal(std::uint64_t index) const {
    double z = 0.0;
    fill_normals(index, std::span<double>(&z, 1));
    return z;
  }
};

}  // namespace roughsde
