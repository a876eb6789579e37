#include <gtest/gtest.h>

#include <set>

#include "pmmc/rng.hpp"

namespace {

using pmmc::Philox4x32;

// Published known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::block_type{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::block_type{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPiDigits) {
  const auto out =
      Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::block_type{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, SameKeyAndStreamRepeat) {
  Philox4x32 a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Philox, DiscardSkipsDraws) {
  Philox4x32 a(3, 1), b(3, 1);
  for (int i = 0; i < 5; ++i) a();
  b.discard(5);
  EXPECT_EQ(a(), b());
}

TEST(StreamFactory, RolesLevelsAndStepsGiveDistinctStreams) {
  const pmmc::StreamFactory f(11);
  std::set<std::uint64_t> first;
  for (auto role : {pmmc::StreamRole::init, pmmc::StreamRole::schedule, pmmc::StreamRole::swap,
                    pmmc::StreamRole::sweep, pmmc::StreamRole::baseline}) {
    for (int level = 0; level < 4; ++level) {
      for (std::uint64_t step = 0; step < 4; ++step) first.insert(f.stream(role, level, step)());
    }
  }
  EXPECT_EQ(first.size(), 5u * 4u * 4u);
}

TEST(StreamFactory, SeedChangesStreams) {
  EXPECT_NE(pmmc::StreamFactory(1).stream(pmmc::StreamRole::sweep, 0, 0)(),
            pmmc::StreamFactory(2).stream(pmmc::StreamRole::sweep, 0, 0)());
}

TEST(OpenUnit, StaysInsideAndHasUniformMoments) {
  Philox4x32 rng(5, 5);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = pmmc::open_unit(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum_sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 2e-3);
}

TEST(Gumbel, MeanIsEulerGamma) {
  Philox4x32 rng(9, 0);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += pmmc::gumbel(rng);
  // Variance of the standard Gumbel is pi^2 / 6.
  EXPECT_NEAR(sum / n, 0.5772156649015329, 5.0 * std::sqrt(1.6449340668 / n));
}

}  // namespace
