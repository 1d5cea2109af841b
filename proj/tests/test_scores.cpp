#include <gtest/gtest.h>

#include "collab/scores.hpp"
#include "oracles.hpp"

namespace collab {
namespace {

TEST(ScoreClassification, OneMinusProbability) {
  const ProbVector p({0.7, 0.2, 0.1});
  EXPECT_NEAR(score_classification(p, 0), 0.3, 1e-15);
  EXPECT_NEAR(score_classification(p, 2), 0.9, 1e-15);
  const ProbVector uniform({0.25, 0.25, 0.25, 0.25});
  for (Label y = 0; y < 4; ++y) EXPECT_DOUBLE_EQ(score_classification(uniform, y), 0.75);
}

TEST(ScoreClassification, OutOfRangeLabelThrows) {
  EXPECT_THROW(score_classification(ProbVector({0.5, 0.5}), 2), std::out_of_range);
}

TEST(ScoreClassification, ComplementsProbabilityExactly) {
  testing::TestRng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform();
    const ProbVector p({a, 1.0 - a});
    EXPECT_EQ(score_classification(p, 0) + p[0], 1.0);
  }
}

TEST(ScoreRegression, SelectsBandByMembership) {
  const QuantileBandPair band{0.0, 1.0, 0.2, 0.8};
  EXPECT_DOUBLE_EQ(score_regression(band, true, 0.5), -0.5);
  EXPECT_DOUBLE_EQ(score_regression(band, true, 1.5), 0.5);
  EXPECT_DOUBLE_EQ(score_regression(band, false, -0.3), 0.5);
}

TEST(ScoreRegression, SignMatchesBandMembership) {
  const QuantileBandPair band{-1.0, 2.0, 0.0, 0.5};
  testing::TestRng rng(9);
  for (int i = 0; i < 500; ++i) {
    const double y = rng.uniform(-4, 4);
    const bool in_h = rng.below(2) == 0;
    const double lo = in_h ? band.q_eps_lo : band.q_del_lo;
    const double hi = in_h ? band.q_eps_hi : band.q_del_hi;
    EXPECT_EQ(score_regression(band, in_h, y) <= 0.0, lo <= y && y <= hi);
  }
  EXPECT_EQ(score_regression(band, true, -1.0), 0.0);
  EXPECT_EQ(score_regression(band, true, 2.0), 0.0);
  EXPECT_EQ(score_regression(band, false, 0.5), 0.0);
}

TEST(BoundScore, ClampsAndRescales) {
  const ScoreBounds b(-1.0, 3.0);
  EXPECT_EQ(bound_score(-2.0, b), 0.0);
  EXPECT_DOUBLE_EQ(bound_score(1.0, b), 0.5);
  EXPECT_EQ(bound_score(3.0, b), 1.0);
}

TEST(BoundScore, MonotoneAndPreservesSublevelSets) {
  const ScoreBounds b(-2.0, 5.0);
  testing::TestRng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double s1 = rng.uniform(-10, 10), s2 = rng.uniform(-10, 10);
    const double lo = std::min(s1, s2), hi = std::max(s1, s2);
    EXPECT_LE(bound_score(lo, b), bound_score(hi, b));
    const double v = bound_score(s1, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    // threshold inside the range: {s <= t} == {bound(s) <= bound(t)}
    const double t = rng.uniform(-2, 5);
    EXPECT_EQ(s1 <= t, bound_score(s1, b) <= bound_score(t, b)) << s1 << " " << t;
  }
}

TEST(BoundScore, InvalidBoundsThrow) {
  EXPECT_THROW(ScoreBounds(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ScoreBounds::from_label_scale(0.0), std::invalid_argument);
  const auto b = ScoreBounds::from_label_scale(2.0);
  EXPECT_EQ(b.lo, -10.0);
  EXPECT_EQ(b.hi, 10.0);
}

TEST(UnboundThreshold, InvertsBoundScore) {
  const ScoreBounds b(-1.0, 3.0);
  EXPECT_EQ(unbound_threshold(1.0, b), kInf);
  EXPECT_DOUBLE_EQ(unbound_threshold(0.5, b), 1.0);
  EXPECT_DOUBLE_EQ(unbound_threshold(0.0, b), -1.0);
}

TEST(Nonconformity, DispatchesOnTaskKind) {
  Record c;
  c.evidence = ProbVector({0.6, 0.4});
  c.human_set = LabelSet{0};
  EXPECT_DOUBLE_EQ(nonconformity(c, Target{Label{1}}), 0.6);
  EXPECT_THROW(nonconformity(c, Target{0.5}), std::invalid_argument);

  Record r;
  r.evidence = QuantileBandPair{0.0, 1.0, 0.2, 0.8};
  r.human_set = HumanInterval(0.0, 0.5);
  EXPECT_DOUBLE_EQ(nonconformity(r, Target{0.25}), -0.25);  // in H: eps band
  EXPECT_DOUBLE_EQ(nonconformity(r, Target{0.9}), 0.1);     // outside H: delta band
  EXPECT_DOUBLE_EQ(ai_alone_nonconformity(r, Target{0.9}), -0.1);
}

}  // namespace
}  // namespace collab
