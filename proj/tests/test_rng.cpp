#include <doctest.h>

#include <cmath>

#include "vcm/rng.hpp"

using namespace vcm;

TEST_CASE("philox 4x32-10 known-answer vectors") {
  // Reference vectors from the Random123 distribution.
  auto out = rng::Philox4x32::block({0, 0}, {0, 0, 0, 0});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  out = rng::Philox4x32::block({0xffffffffu, 0xffffffffu},
                               {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);

  out = rng::Philox4x32::block({0xa4093822u, 0x299f31d0u},
                               {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
  CHECK(out[0] == 0xd16cfe09u);
  CHECK(out[1] == 0x94fdccebu);
  CHECK(out[2] == 0x5001e420u);
  CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("substreams are deterministic and independent of draw interleaving") {
  rng::Substream a(42, rng::StreamTag::Noise, 7);
  rng::Substream b(42, rng::StreamTag::Noise, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // Different tags or indices give different streams.
  rng::Substream c(42, rng::StreamTag::Noise, 8);
  rng::Substream d(42, rng::StreamTag::Design, 7);
  rng::Substream e(42, rng::StreamTag::Noise, 7);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) {
    const auto v = e.next_u64();
    all_equal = all_equal && (v == c.next_u64());
  }
  CHECK_FALSE(all_equal);
  CHECK(rng::Substream(42, rng::StreamTag::Noise, 7).next_u64() != d.next_u64());
}

TEST_CASE("uniform stays in (0,1) and has the right first two moments") {
  rng::Substream st(7, rng::StreamTag::Generic, 0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = st.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
  CHECK(std::abs(sumsq / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("gaussian and laplace draws are standardized") {
  for (int kind = 0; kind < 2; ++kind) {
    rng::Substream st(123, rng::StreamTag::Generic, uint64_t(kind));
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = kind == 0 ? st.gaussian() : st.laplace_unit();
      sum += x;
      sumsq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sumsq / n - 1.0) < 0.05);
  }
}

TEST_CASE("uniform_below is unbiased over small ranges") {
  rng::Substream st(5, rng::StreamTag::Design, 0);
  const int n = 100000;
  int counts[4] = {0, 0, 0, 0};
  for (int i = 0; i < n; ++i) ++counts[st.uniform_below(4)];
  for (int k = 0; k < 4; ++k) CHECK(std::abs(counts[k] / double(n) - 0.25) < 0.01);
}

TEST_CASE("derive_seed separates replicates") {
  CHECK(rng::derive_seed(1, 0) != rng::derive_seed(1, 1));
  CHECK(rng::derive_seed(1, 0) == rng::derive_seed(1, 0));
  CHECK(rng::derive_seed(1, 5) != rng::derive_seed(2, 5));
}
