#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "vcm/errors.hpp"

namespace vcm::rng {

/// Philox 4x32-10 counter-based block cipher used as a random generator.
/// The integer stream is fully determined by (key, counter) and is portable
/// across platforms, which makes draws addressable by (seed, stream, index).
struct Philox4x32 {
  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(std::array<uint32_t, 2> key,
                                       std::array<uint32_t, 4> ctr) {
    for (int round = 0;; ++round) {
      const uint64_t p0 = uint64_t(kMul0) * ctr[0];
      const uint64_t p1 = uint64_t(kMul1) * ctr[2];
      ctr = {uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], uint32_t(p1),
             uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], uint32_t(p0)};
      if (round == 9) break;
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// Purpose tags keep logically distinct substreams from ever colliding.
enum class StreamTag : uint16_t {
  Generic = 0,
  Time = 1,
  Design = 2,
  Noise = 3,
  Rademacher = 4,
  Coefficients = 5,
  ReplicateSeed = 6,
  Init = 7,
};

/// One independent substream addressed by (seed, tag, index).
/// Draws within the substream are sequential; a substream is a cheap value
/// type, so callers create one per observation/trial and draw a few values.
class Substream {
 public:
  Substream(uint64_t seed, StreamTag tag, uint64_t index = 0)
      : key_{uint32_t(seed), uint32_t(seed >> 32)},
        c2_(uint32_t(index)),
        c3_(uint32_t((index >> 32) & 0xFFFFu) | (uint32_t(tag) << 16)) {
    if (index >= (uint64_t(1) << 48))
      throw ValidationError("rng: substream index exceeds 2^48");
  }

  uint64_t next_u64() {
    if (have_ == 0) {
      const auto b = Philox4x32::block(key_, {uint32_t(draw_), uint32_t(draw_ >> 32), c2_, c3_});
      ++draw_;
      buf_[0] = uint64_t(b[0]) | (uint64_t(b[1]) << 32);
      buf_[1] = uint64_t(b[2]) | (uint64_t(b[3]) << 32);
      have_ = 2;
    }
    return buf_[2 - have_--];
  }

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Unit-variance Laplace (scale 1/sqrt(2)).
  double laplace_unit() {
    constexpr double b = 0.70710678118654752440;
    const double u = uniform();
    return u < 0.5 ? b * std::log(2.0 * u) : -b * std::log(2.0 * (1.0 - u));
  }

  /// +1 or -1 with equal probability.
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  /// Uniform integer in [0, bound), rejection sampled to avoid modulo bias.
  uint64_t uniform_below(uint64_t bound) {
    if (bound == 0) throw ValidationError("rng: uniform_below(0)");
    const uint64_t limit = (UINT64_MAX / bound) * bound;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::array<uint32_t, 2> key_;
  uint32_t c2_, c3_;
  uint64_t draw_ = 0;
  std::array<uint64_t, 2> buf_{};
  int have_ = 0;
};

/// Derives a fresh 64-bit seed for a replicate so that repeated experiments
/// draw independent data while sharing the same ground truth.
inline uint64_t derive_seed(uint64_t seed, uint64_t replicate) {
  const auto b = Philox4x32::block({uint32_t(seed), uint32_t(seed >> 32)},
                                   {uint32_t(replicate), uint32_t(replicate >> 32), 0,
                                    uint32_t(StreamTag::ReplicateSeed) << 16});
  return uint64_t(b[0]) | (uint64_t(b[1]) << 32);
}

}  // namespace vcm::rng
