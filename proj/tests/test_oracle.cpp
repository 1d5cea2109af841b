#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "collab/oracle.hpp"

namespace collab {
namespace {

FiniteInstance one_context(std::vector<double> p, LabelSet h, double eps, double del) {
  FiniteInstance inst;
  inst.rates = TargetRates(eps, del);
  inst.contexts.push_back({1.0, ProbVector(std::move(p)), std::move(h)});
  return inst;
}

// Recursive enumeration written independently of the library search.
double reference_optimum(const FiniteInstance& inst) {
  const std::size_t k = inst.n_labels();
  double best = kInf;
  std::vector<std::uint32_t> masks(inst.contexts.size());
  std::function<void(std::size_t)> rec = [&](std::size_t x) {
    if (x == masks.size()) {
      double p_in = 0, miss = 0, p_out = 0, hit = 0, size = 0;
      for (std::size_t c = 0; c < masks.size(); ++c) {
        const auto& ctx = inst.contexts[c];
        for (Label y = 0; y < k; ++y) {
          const double w = ctx.px * ctx.py[y];
          const bool in_c = (masks[c] >> y) & 1u;
          if (ctx.h.contains(y)) {
            p_in += w;
            if (!in_c) miss += w;
          } else {
            p_out += w;
            if (in_c) hit += w;
          }
          if (in_c) size += ctx.px;
        }
      }
      const bool ok_in = p_in <= 0 || miss <= inst.rates.epsilon * p_in + 1e-15;
      const bool ok_out = p_out <= 0 || hit >= (1 - inst.rates.delta) * p_out - 1e-15;
      if (ok_in && ok_out) best = std::min(best, size);
      return;
    }
    for (std::uint32_t m = 0; m < (1u << k); ++m) {
      masks[x] = m;
      rec(x + 1);
    }
  };
  rec(0);
  return best;
}

TEST(BruteForce, SingleContextNeedsBothLabels) {
  const auto inst = one_context({0.8, 0.2}, LabelSet{0}, 0.05, 0.5);
  const auto r = brute_force_optimum(inst);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.size, 2.0, 1e-12);
  EXPECT_EQ(r.family, SetFamily{0b11});
}

TEST(Sweep, SingleContextNeedsBothLabels) {
  const auto inst = one_context({0.8, 0.2}, LabelSet{0}, 0.05, 0.5);
  const auto s = two_threshold_sweep(inst);
  ASSERT_TRUE(s.feasible);
  EXPECT_NEAR(s.size, 2.0, 1e-12);
  EXPECT_GE(s.best.b, 0.2 - 1e-12);
  EXPECT_GE(s.best.a, 0.8 - 1e-12);
  const auto rep = verify_theorem1(inst);
  EXPECT_TRUE(rep.matched);
}

TEST(Oracle, VacuousConstraintsGiveEmptyFamily) {
  auto inst = one_context({0.5, 0.3, 0.2}, LabelSet{0, 2}, 0.5, 0.5);
  // limit of eps, delta -> 1; the constructor only admits open-interval rates
  inst.rates.epsilon = 1.0;
  inst.rates.delta = 1.0;
  const auto r = brute_force_optimum(inst);
  EXPECT_EQ(r.size, 0.0);
  const auto s = two_threshold_sweep(inst);
  EXPECT_EQ(s.size, 0.0);
  EXPECT_EQ(s.best.a, -kInf);
  EXPECT_EQ(s.best.b, -kInf);
  const auto rep = verify_theorem1(inst);
  EXPECT_TRUE(rep.matched);
  EXPECT_EQ(rep.brute_size, 0.0);
}

TEST(Oracle, ZeroProbabilityGroupIsVacuous) {
  // H empty: the harm constraint conditions on an impossible event
  const auto inst = one_context({0.6, 0.4}, LabelSet{}, 0.01, 0.45);
  const auto stats = evaluate_family(inst, {0b01});
  EXPECT_EQ(stats.p_in, 0.0);
  EXPECT_TRUE(stats.feasible(inst.rates));
  EXPECT_NEAR(brute_force_optimum(inst).size, 1.0, 1e-12);
}

TEST(Oracle, EvaluateFamilyByHand) {
  FiniteInstance inst;
  inst.rates = TargetRates(0.1, 0.3);
  inst.contexts.push_back({0.25, ProbVector({0.5, 0.5}), LabelSet{0}});
  inst.contexts.push_back({0.75, ProbVector({0.2, 0.8}), LabelSet{1}});
  const auto st = evaluate_family(inst, {0b01, 0b11});
  EXPECT_NEAR(st.p_in, 0.25 * 0.5 + 0.75 * 0.8, 1e-15);
  EXPECT_NEAR(st.miss_in, 0.0, 1e-15);
  EXPECT_NEAR(st.p_out, 0.25 * 0.5 + 0.75 * 0.2, 1e-15);
  EXPECT_NEAR(st.hit_out, 0.75 * 0.2, 1e-15);
  EXPECT_NEAR(st.expected_size, 0.25 + 1.5, 1e-15);
}

TEST(Oracle, ValidationRejectsBadInstances) {
  FiniteInstance inst;
  inst.contexts.push_back({0.5, ProbVector({0.5, 0.5}), LabelSet{0}});
  EXPECT_THROW(inst.validate(), std::invalid_argument);
  inst.contexts.push_back({0.5, ProbVector({0.2, 0.3, 0.5}), LabelSet{0}});
  EXPECT_THROW(inst.validate(), std::invalid_argument);
  FiniteInstance big;
  for (int i = 0; i < 7; ++i) big.contexts.push_back({1.0 / 7, ProbVector({1.0}), LabelSet{}});
  EXPECT_THROW(big.validate(), std::invalid_argument);
}

TEST(Oracle, BruteForceMatchesReferenceEnumeration) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = suite_instance(100, seed, TargetRates(0.1, 0.3), 3, 3);
    const auto r = brute_force_optimum(inst);
    ASSERT_TRUE(r.feasible);
    EXPECT_NEAR(r.size, reference_optimum(inst), 1e-9) << seed;
  }
}

TEST(Oracle, SweepNeverBeatsBruteForce) {
  for (std::uint64_t i = 0; i < 60; ++i) {
    const auto inst = suite_instance(7, i, TargetRates(0.2, 0.4));
    const auto rep = verify_theorem1(inst);
    ASSERT_TRUE(rep.brute_feasible);
    EXPECT_GE(rep.sweep_size, rep.brute_size - 1e-9);
    // the sweep's witness reproduces its size
    const auto st = evaluate_family(inst, threshold_family(inst, rep.best_pair));
    EXPECT_TRUE(st.feasible(inst.rates));
    EXPECT_NEAR(st.expected_size, rep.sweep_size, 1e-12);
  }
}

// Single-threshold conformal optimum for a full human set.
double single_threshold_optimum(const FiniteInstance& inst) {
  std::vector<double> cands = {-kInf, kInf};
  for (const auto& c : inst.contexts) {
    for (double p : c.py.values()) cands.push_back(1.0 - p);
  }
  double best = kInf;
  for (double b : cands) {
    double miss = 0, p_in = 0, size = 0;
    for (const auto& c : inst.contexts) {
      for (Label y = 0; y < c.py.size(); ++y) {
        const bool in_c = 1.0 - c.py[y] <= b;
        p_in += c.px * c.py[y];
        if (!in_c) miss += c.px * c.py[y];
        if (in_c) size += c.px;
      }
    }
    if (miss <= inst.rates.epsilon * p_in) best = std::min(best, size);
  }
  return best;
}

TEST(Oracle, FullHumanSetReducesToSingleThreshold) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = random_instance(seed, 3, 4, TargetRates(0.15, 0.3));
    for (auto& c : inst.contexts) c.h = LabelSet{0, 1, 2, 3};
    const auto s = two_threshold_sweep(inst);
    EXPECT_NEAR(s.size, single_threshold_optimum(inst), 1e-12) << seed;
    EXPECT_GE(s.size, brute_force_optimum(inst).size - 1e-9);
  }
}

TEST(Oracle, EmptyHumanSetReducesToSingleThreshold) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = random_instance(seed, 3, 4, TargetRates(0.15, 0.3));
    for (auto& c : inst.contexts) c.h = LabelSet{};
    // out-group constraint with delta mirrors the in-group one with eps = delta
    FiniteInstance mirror = inst;
    mirror.rates = TargetRates(inst.rates.delta, 0.5);
    for (auto& c : mirror.contexts) c.h = LabelSet{0, 1, 2, 3};
    EXPECT_NEAR(two_threshold_sweep(inst).size, single_threshold_optimum(mirror), 1e-12) << seed;
  }
}

TEST(Oracle, TiesAreFlagged) {
  FiniteInstance inst;
  inst.rates = TargetRates(0.1, 0.3);
  inst.contexts.push_back({0.5, ProbVector({0.6, 0.4}), LabelSet{0}});
  inst.contexts.push_back({0.5, ProbVector({0.4, 0.6}), LabelSet{0}});
  EXPECT_TRUE(verify_theorem1(inst).has_ties);
  EXPECT_FALSE(verify_theorem1(random_instance(3, 3, 3, inst.rates)).has_ties);
}

TEST(Oracle, SuiteIsDeterministicAndSized) {
  for (std::size_t i = 0; i < 30; ++i) {
    const auto a = suite_instance(42, i, TargetRates(0.1, 0.3));
    const auto b = suite_instance(42, i, TargetRates(0.1, 0.3));
    ASSERT_EQ(a.contexts.size(), b.contexts.size());
    EXPECT_GE(a.contexts.size(), 1u);
    EXPECT_LE(a.contexts.size(), 4u);
    EXPECT_GE(a.n_labels(), 2u);
    EXPECT_LE(a.n_labels(), 4u);
    for (std::size_t x = 0; x < a.contexts.size(); ++x) {
      EXPECT_EQ(a.contexts[x].py.values(), b.contexts[x].py.values());
      EXPECT_EQ(a.contexts[x].h, b.contexts[x].h);
    }
  }
}

TEST(Oracle, ReportJson) {
  const auto rep = verify_theorem1(one_context({0.8, 0.2}, LabelSet{0}, 0.05, 0.5));
  const nlohmann::json j = rep;
  EXPECT_EQ(j.at("matched"), true);
  EXPECT_TRUE(j.contains("ties"));
  EXPECT_NEAR(j.at("brute_size").get<double>(), 2.0, 1e-12);
}

}  // namespace
}  // namespace collab
