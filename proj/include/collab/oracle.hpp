#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "collab/core.hpp"
#include "json.hpp"

namespace collab {

// Explicit joint distribution over a handful of contexts and labels.
struct FiniteContext {
  double px = 0.0;
  ProbVector py;
  LabelSet h;
};

struct FiniteInstance {
  std::vector<FiniteContext> contexts;
  TargetRates rates;

  std::size_t n_labels() const { return contexts.empty() ? 0 : contexts.front().py.size(); }
  // Throws std::invalid_argument when weights do not sum to 1, label
  // spaces differ, or the instance exceeds 6 contexts / 6 labels.
  void validate() const;
};

// One label subset per context, encoded as a bit mask over labels.
using SetFamily = std::vector<std::uint32_t>;

struct FamilyStats {
  double p_in = 0.0;        // P(Y in H)
  double miss_in = 0.0;     // P(Y not in C, Y in H)
  double p_out = 0.0;       // P(Y not in H)
  double hit_out = 0.0;     // P(Y in C, Y not in H)
  double expected_size = 0.0;

  // Constraints conditioned on a zero-probability event count as met.
  bool feasible(const TargetRates& rates) const;
};

FamilyStats evaluate_family(const FiniteInstance& inst, const SetFamily& family);

struct BruteForceResult {
  bool feasible = false;
  double size = 0.0;
  SetFamily family;
};

// Exhaustive search over every deterministic family. Ties in expected size
// go to the lexicographically smallest family. Throws std::invalid_argument
// when (2^|Y|)^|X| exceeds 1e7.
BruteForceResult brute_force_optimum(const FiniteInstance& inst);

struct SweepResult {
  bool feasible = false;
  double size = 0.0;
  ThresholdPair best{kInf, kInf};
  SetFamily family;
};

// Family induced by the two-threshold rule on scores 1 - p(y|x).
SetFamily threshold_family(const FiniteInstance& inst, ThresholdPair t);

// Best feasible two-threshold rule, thresholds drawn from the attained
// scores plus -inf and +inf.
SweepResult two_threshold_sweep(const FiniteInstance& inst);

struct OracleReport {
  double brute_size = 0.0;
  double sweep_size = 0.0;
  bool brute_feasible = false;
  bool matched = false;
  bool has_ties = false;  // two scores within 1e-12 of each other
  ThresholdPair best_pair;
};

OracleReport verify_theorem1(const FiniteInstance& inst);

// Random instance: context weights and label probabilities from flat
// Dirichlet draws, each label in H independently with probability 1/2.
FiniteInstance random_instance(std::uint64_t seed, std::size_t n_contexts, std::size_t n_labels,
                               const TargetRates& rates);

// Instance i of a suite: c in [1, max_contexts], k in [2, max_labels] and
// the random_instance seed are all drawn from a generator seeded seed + i.
FiniteInstance suite_instance(std::uint64_t seed, std::size_t i, const TargetRates& rates,
                              std::size_t max_contexts = 4, std::size_t max_labels = 4);

void to_json(nlohmann::json& j, const OracleReport& r);

}  // namespace collab
