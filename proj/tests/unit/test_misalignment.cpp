#include <gtest/gtest.h>

#include <cmath>

#include "probfuse/errors.hpp"
#include "probfuse/misalignment.hpp"
#include "test_support.hpp"

using namespace probfuse;
namespace pt = probfuse::testing;

TEST(ApplyShift, ZeroIsIdentity) {
  std::mt19937_64 gen(1);
  const BinaryMask m = pt::random_mask(gen, 9, 6, 0.3);
  EXPECT_EQ(apply_shift(m, {0, 0}), m);
}

TEST(ApplyShift, MovesSingleCell) {
  BinaryMask m(4, 4);
  m.set(1, 1);
  const BinaryMask s = apply_shift(m, {2, 0});
  EXPECT_EQ(s.count(), 1u);
  EXPECT_TRUE(s.at(3, 1));
}

TEST(ApplyShift, ContentLeavesFrame) {
  BinaryMask m(4, 4);
  m.set(3, 3);
  EXPECT_TRUE(apply_shift(m, {2, 2}).empty());
}

TEST(ApplyShift, FullFrameShiftAllowedBeyondRejected) {
  BinaryMask m(4, 3);
  m.set(0, 0);
  EXPECT_TRUE(apply_shift(m, {4, 0}).empty());
  EXPECT_TRUE(apply_shift(m, {0, -3}).empty());
  EXPECT_THROW(apply_shift(m, {5, 0}), ParameterError);
  EXPECT_THROW(apply_shift(m, {0, -4}), ParameterError);
}

TEST(ApplyShift, PopulationAndComposition) {
  std::mt19937_64 gen(44);
  for (int t = 0; t < 100; ++t) {
    const int w = 1 + int(gen() % 20), h = 1 + int(gen() % 20);
    const BinaryMask m = pt::random_mask(gen, w, h, 0.3);
    const int dx = int(gen() % unsigned(2 * w + 1)) - w;
    const int dy = int(gen() % unsigned(2 * h + 1)) - h;
    const BinaryMask s = apply_shift(m, {dx, dy});

    std::size_t staying = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (m.at(x, y) && m.contains(x + dx, y + dy)) ++staying;
    ASSERT_EQ(s.count(), staying);

    const BinaryMask back = apply_shift(s, {-dx, -dy});
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (m.contains(x + dx, y + dy)) ASSERT_EQ(back.at(x, y), m.at(x, y));
        else ASSERT_FALSE(back.at(x, y));
      }
  }
}

TEST(SampleShift, Deterministic) {
  const ShiftPolicy policy{0.05, 0.10, 1234};
  EXPECT_EQ(sample_shift(policy, "P0001", 800, 600), sample_shift(policy, "P0001", 800, 600));
  // keyed by id, not call order
  const auto a = sample_shift(policy, "P0002", 800, 600);
  sample_shift(policy, "P0003", 800, 600);
  EXPECT_EQ(sample_shift(policy, "P0002", 800, 600), a);
}

TEST(SampleShift, DifferentIdsOrSeedsDiffer) {
  const ShiftPolicy p1{0.05, 0.10, 1}, p2{0.05, 0.10, 2};
  int differ = 0;
  for (int i = 0; i < 20; ++i) {
    const std::string id = "img" + std::to_string(i);
    if (!(sample_shift(p1, id, 1000, 1000) == sample_shift(p2, id, 1000, 1000))) ++differ;
  }
  EXPECT_GE(differ, 18);
}

TEST(SampleShift, ZeroFractionIsZeroShift) {
  const ShiftPolicy policy{0.0, 0.0, 9};
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(sample_shift(policy, std::to_string(i), 640, 480), (ShiftSpec{0, 0}));
  }
}

TEST(SampleShift, MagnitudeBounds) {
  const ShiftPolicy policy{0.05, 0.10, 2024};
  for (int i = 0; i < 10000; ++i) {
    const ShiftSpec s = sample_shift(policy, "img_" + std::to_string(i), 1000, 1000);
    const double mag = std::hypot(s.dx, s.dy);
    ASSERT_GE(mag, 49.5);
    ASSERT_LE(mag, 100.5);
  }
}

TEST(SampleShift, InvalidPolicy) {
  EXPECT_THROW(sample_shift({0.2, 0.1, 0}, "x", 100, 100), ParameterError);
  EXPECT_THROW(sample_shift({-0.1, 0.1, 0}, "x", 100, 100), ParameterError);
  EXPECT_THROW(sample_shift({0.1, 1.5, 0}, "x", 100, 100), ParameterError);
  EXPECT_THROW(sample_shift({0.05, 0.1, 0}, "x", 0, 100), ParameterError);
}

TEST(SampleShift, StaysWithinFrameBounds) {
  const ShiftPolicy policy{1.0, 1.0, 5};
  for (int i = 0; i < 200; ++i) {
    const ShiftSpec s = sample_shift(policy, std::to_string(i), 50, 10);
    ASSERT_LE(std::abs(s.dx), 50);
    ASSERT_LE(std::abs(s.dy), 10);
  }
}
