#include <gtest/gtest.h>

#include "collab/core.hpp"
#include "oracles.hpp"

namespace collab {
namespace {

TEST(HumanContains, DiscreteMembership) {
  const HumanSet h = LabelSet{0, 2};
  EXPECT_TRUE(human_contains(h, Target{Label{2}}));
  EXPECT_FALSE(human_contains(h, Target{Label{1}}));
}

TEST(HumanContains, IntervalIsClosed) {
  const HumanSet h = HumanInterval(0.0, 1.0);
  EXPECT_TRUE(human_contains(h, Target{1.0}));
  EXPECT_TRUE(human_contains(h, Target{0.0}));
  EXPECT_FALSE(human_contains(h, Target{1.5}));
}

TEST(HumanContains, EmptyIntervalContainsNothing) {
  const HumanSet h = HumanInterval::none();
  EXPECT_FALSE(human_contains(h, Target{0.0}));
}

TEST(HumanContains, TypeMismatchThrows) {
  EXPECT_THROW(human_contains(LabelSet{0}, Target{0.5}), std::invalid_argument);
  EXPECT_THROW(human_contains(HumanInterval(0, 1), Target{Label{0}}), std::invalid_argument);
}

TEST(HumanInterval, RejectsInvertedBounds) {
  EXPECT_THROW(HumanInterval(1.0, 0.0), std::invalid_argument);
}

TEST(NormalizeIntervalUnion, MergesOverlap) {
  const auto u = normalize_interval_union({{0, 1}, {0.5, 2}});
  ASSERT_EQ(u.intervals().size(), 1u);
  EXPECT_DOUBLE_EQ(u.intervals()[0].lo, 0.0);
  EXPECT_DOUBLE_EQ(u.intervals()[0].hi, 2.0);
}

TEST(NormalizeIntervalUnion, MergesTouchingOutOfOrder) {
  const auto u = normalize_interval_union({{1, 2}, {0, 1}});
  ASSERT_EQ(u.intervals().size(), 1u);
  EXPECT_DOUBLE_EQ(u.intervals()[0].lo, 0.0);
  EXPECT_DOUBLE_EQ(u.intervals()[0].hi, 2.0);
}

TEST(NormalizeIntervalUnion, EmptyInput) {
  const auto u = normalize_interval_union({});
  EXPECT_TRUE(u.empty());
  EXPECT_EQ(set_size(u), 0.0);
}

TEST(NormalizeIntervalUnion, DropsInvertedPieces) {
  const auto u = normalize_interval_union({{2, 1}, {3, 4}});
  ASSERT_EQ(u.intervals().size(), 1u);
  EXPECT_DOUBLE_EQ(set_size(u), 1.0);
}

TEST(SetSize, DiscreteAndIntervals) {
  EXPECT_EQ(set_size(LabelSet{1, 3, 5}), 3.0);
  EXPECT_NEAR(set_size(normalize_interval_union({{0, 0.4}, {1, 1.6}})), 1.0, 1e-15);
  EXPECT_EQ(set_size(LabelSet{}), 0.0);
}

TEST(ProbVector, RenormalizesSmallDrift) {
  const ProbVector p({0.5, 0.5004});
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(ProbVector, RejectsLargeDrift) {
  EXPECT_THROW(ProbVector({0.5, 0.3}), std::invalid_argument);
  EXPECT_THROW(ProbVector({1.2, -0.2}), std::invalid_argument);
}

TEST(TargetRates, RejectsOutOfRange) {
  EXPECT_THROW(TargetRates(0.0, 0.3), std::invalid_argument);
  EXPECT_THROW(TargetRates(0.1, 1.0), std::invalid_argument);
  EXPECT_NO_THROW(TargetRates(0.1, 0.3));
}

// Measure of the normalized union matches a grid estimate, and membership
// of interior points matches the raw intervals.
TEST(NormalizeIntervalUnion, PropertyMeasureAndMembership) {
  testing::TestRng rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Interval> raw;
    std::vector<std::pair<double, double>> pairs;
    const std::size_t n = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng.uniform(-9, 8);
      const double b = a + rng.uniform(0, 2);
      raw.push_back({a, b});
      pairs.emplace_back(a, b);
    }
    const auto u = normalize_interval_union(raw);
    EXPECT_NEAR(set_size(u), testing::grid_measure(pairs, 200000), 1e-3) << "trial " << trial;
    EXPECT_GE(set_size(u), 0.0);

    for (std::size_t i = 1; i < u.intervals().size(); ++i) {
      EXPECT_LT(u.intervals()[i - 1].hi, u.intervals()[i].lo);
    }
    for (int probe = 0; probe < 200; ++probe) {
      const double x = rng.uniform(-10, 10);
      const bool in_raw = std::any_of(raw.begin(), raw.end(), [&](const Interval& iv) {
        return iv.lo < x && x < iv.hi;
      });
      if (in_raw) {
        EXPECT_TRUE(u.contains(x));
      }
    }
  }
}

}  // namespace
}  // namespace collab
