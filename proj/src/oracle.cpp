#include "collab/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "collab/rng.hpp"

namespace collab {

void FiniteInstance::validate() const {
  if (contexts.empty()) throw std::invalid_argument("instance has no contexts");
  if (contexts.size() > 6) throw std::invalid_argument("instance has more than 6 contexts");
  const std::size_t k = n_labels();
  if (k > 6) throw std::invalid_argument("instance has more than 6 labels");
  double total = 0.0;
  for (const auto& c : contexts) {
    if (c.py.size() != k) throw std::invalid_argument("contexts disagree on the label space");
    if (!(c.px >= 0.0)) throw std::invalid_argument("negative context weight");
    for (Label y : c.h) {
      if (y >= k) throw std::invalid_argument("human set label outside label space");
    }
    total += c.px;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("context weights must sum to 1");
}

bool FamilyStats::feasible(const TargetRates& rates) const {
  const bool harm_ok = p_in <= 0.0 || miss_in <= rates.epsilon * p_in;
  const bool comp_ok = p_out <= 0.0 || hit_out >= (1.0 - rates.delta) * p_out;
  return harm_ok && comp_ok;
}

FamilyStats evaluate_family(const FiniteInstance& inst, const SetFamily& family) {
  FamilyStats st;
  const std::size_t k = inst.n_labels();
  for (std::size_t x = 0; x < inst.contexts.size(); ++x) {
    const auto& ctx = inst.contexts[x];
    const std::uint32_t mask = family[x];
    for (Label y = 0; y < k; ++y) {
      const double mass = ctx.px * ctx.py[y];
      const bool in_c = (mask >> y) & 1U;
      if (ctx.h.contains(y)) {
        st.p_in += mass;
        if (!in_c) st.miss_in += mass;
      } else {
        st.p_out += mass;
        if (in_c) st.hit_out += mass;
      }
    }
    st.expected_size += ctx.px * std::popcount(mask);
  }
  return st;
}

namespace {

constexpr double kSizeTol = 1e-12;

}  // namespace

BruteForceResult brute_force_optimum(const FiniteInstance& inst) {
  inst.validate();
  const std::size_t k = inst.n_labels();
  const std::size_t n_ctx = inst.contexts.size();
  const std::uint64_t per_context = std::uint64_t{1} << k;
  double total = 1.0;
  for (std::size_t i = 0; i < n_ctx; ++i) total *= static_cast<double>(per_context);
  if (total > 1e7) throw std::invalid_argument("instance too large for exhaustive search");

  BruteForceResult best;
  // context 0 is the most significant digit, so counting order is
  // lexicographic order
  SetFamily family(n_ctx, 0);
  for (;;) {
    const FamilyStats st = evaluate_family(inst, family);
    if (st.feasible(inst.rates) && (!best.feasible || st.expected_size < best.size - kSizeTol)) {
      best.feasible = true;
      best.size = st.expected_size;
      best.family = family;
    }
    std::size_t pos = n_ctx;
    while (pos > 0) {
      --pos;
      if (++family[pos] < per_context) break;
      family[pos] = 0;
      if (pos == 0) return best;
    }
  }
}

SetFamily threshold_family(const FiniteInstance& inst, ThresholdPair t) {
  SetFamily family;
  family.reserve(inst.contexts.size());
  for (const auto& ctx : inst.contexts) {
    std::uint32_t mask = 0;
    for (Label y = 0; y < ctx.py.size(); ++y) {
      const double limit = ctx.h.contains(y) ? t.b : t.a;
      if (1.0 - ctx.py[y] <= limit) mask |= 1U << y;
    }
    family.push_back(mask);
  }
  return family;
}

namespace {

std::vector<double> attained_scores(const FiniteInstance& inst) {
  std::vector<double> scores;
  for (const auto& ctx : inst.contexts) {
    for (double p : ctx.py.values()) scores.push_back(1.0 - p);
  }
  std::sort(scores.begin(), scores.end());
  return scores;
}

}  // namespace

SweepResult two_threshold_sweep(const FiniteInstance& inst) {
  inst.validate();
  std::vector<double> candidates = attained_scores(inst);
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  candidates.insert(candidates.begin(), -kInf);
  candidates.push_back(kInf);

  SweepResult best;
  for (double a : candidates) {
    for (double b : candidates) {
      const SetFamily family = threshold_family(inst, {a, b});
      const FamilyStats st = evaluate_family(inst, family);
      if (!st.feasible(inst.rates)) continue;
      if (!best.feasible || st.expected_size < best.size - kSizeTol) {
        best.feasible = true;
        best.size = st.expected_size;
        best.best = {a, b};
        best.family = family;
      }
    }
  }
  return best;
}

OracleReport verify_theorem1(const FiniteInstance& inst) {
  const auto brute = brute_force_optimum(inst);
  const auto sweep = two_threshold_sweep(inst);
  OracleReport report;
  report.brute_feasible = brute.feasible;
  report.brute_size = brute.size;
  report.sweep_size = sweep.size;
  report.best_pair = sweep.best;
  report.matched = brute.feasible == sweep.feasible && std::abs(sweep.size - brute.size) <= 1e-9;
  const auto scores = attained_scores(inst);
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] - scores[i - 1] <= 1e-12) report.has_ties = true;
  }
  return report;
}

FiniteInstance random_instance(std::uint64_t seed, std::size_t n_contexts, std::size_t n_labels,
                               const TargetRates& rates) {
  Rng rng(seed);
  FiniteInstance inst;
  inst.rates = rates;
  const auto weights = rng.dirichlet(n_contexts, 1.0);
  for (std::size_t x = 0; x < n_contexts; ++x) {
    FiniteContext ctx;
    ctx.px = weights[x];
    ctx.py = ProbVector(rng.dirichlet(n_labels, 1.0));
    for (Label y = 0; y < n_labels; ++y) {
      if (rng.bernoulli(0.5)) ctx.h.insert(y);
    }
    inst.contexts.push_back(std::move(ctx));
  }
  return inst;
}

FiniteInstance suite_instance(std::uint64_t seed, std::size_t i, const TargetRates& rates,
                              std::size_t max_contexts, std::size_t max_labels) {
  Rng shape(seed + i);
  const auto n_contexts = 1 + static_cast<std::size_t>(shape.below(max_contexts));
  const auto n_labels = 2 + static_cast<std::size_t>(shape.below(max_labels - 1));
  return random_instance(shape.raw(), n_contexts, n_labels, rates);
}

namespace {

nlohmann::json extended(double t) {
  if (t == kInf) return "inf";
  if (t == -kInf) return "-inf";
  return t;
}

}  // namespace

void to_json(nlohmann::json& j, const OracleReport& r) {
  j = nlohmann::json{{"brute_size", r.brute_size},
                     {"sweep_size", r.sweep_size},
                     {"brute_feasible", r.brute_feasible},
                     {"matched", r.matched},
                     {"ties", r.has_ties},
                     {"best_pair", {{"a", extended(r.best_pair.a)}, {"b", extended(r.best_pair.b)}}}};
}

}  // namespace collab
