#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "core/util.hpp"

namespace ays {

// one block of the Philox 4x32 cipher with 10 rounds
inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> x,
                                          std::array<uint32_t, 2> k) {
  for (int round = 0; round < 10; round++) {
    uint64_t p0 = 0xD2511F53ull * x[0];
    uint64_t p1 = 0xCD9E8D57ull * x[2];
    x = {static_cast<uint32_t>(p1 >> 32) ^ x[1] ^ k[0],
         static_cast<uint32_t>(p1),
         static_cast<uint32_t>(p0 >> 32) ^ x[3] ^ k[1],
         static_cast<uint32_t>(p0)};
    k[0] += 0x9E3779B9u;
    k[1] += 0xBB67AE85u;
  }
  return x;
}

// Philox 4x32-10 counter-based generator. Output depends only on
// (seed, stream, draw position), so the draws for sample i / step k can be
// produced independently on any thread in any order.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream) : stream_(stream) {
    key_[0] = static_cast<uint32_t>(seed);
    key_[1] = static_cast<uint32_t>(seed >> 32);
  }

  // uniform in [0, 1)
  double uniform() {
    uint64_t bits = next_u64();
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller: fixed consumption of two uniforms per pair
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  void fill_normal(std::span<double> out) {
    for (double& x : out) x = normal();
  }

 private:
  uint64_t next_u64() {
    uint32_t lo = next_u32();
    uint32_t hi = next_u32();
    return (static_cast<uint64_t>(hi) << 32) | lo;
  }

  uint32_t next_u32() {
    if (pos_ == 4) {
      buf_ = block(block_++);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  std::array<uint32_t, 4> block(uint64_t ctr) const {
    return philox4x32({static_cast<uint32_t>(ctr),
                       static_cast<uint32_t>(ctr >> 32),
                       static_cast<uint32_t>(stream_),
                       static_cast<uint32_t>(stream_ >> 32)},
                      key_);
  }

  std::array<uint32_t, 2> key_;
  uint64_t stream_;
  uint64_t block_ = 0;
  std::array<uint32_t, 4> buf_{};
  int pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0;
};

}  // namespace ays
