#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <variant>
#include <vector>

#include "collab/core.hpp"
#include "collab/online.hpp"
#include "collab/rng.hpp"

namespace collab {

// Synthetic classification task. The noise level of a real perception task
// is modeled by ai_temperature / ai_noise for the model and human_noise for
// the expert: larger values blur each agent's view of p(y|x).
struct ClassificationSim {
  std::size_t n_labels = 10;
  double dirichlet_alpha = 1.0;
  double ai_temperature = 1.0;
  double ai_noise = 0.0;     // sd of Gaussian logit noise on the AI evidence
  double human_noise = 0.0;  // sd of Gaussian logit noise on the human's view
  std::size_t human_k = 2;
  // Labels that may carry mass; empty means all labels.
  std::vector<Label> label_support;
};

struct RegressionSim {
  std::size_t feature_dim = 5;
  double noise_sd = 1.0;
  double human_label_noise_sd = 1.0;
  double base_width = 2.0;
  double width_noise_sd = 0.5;
};

struct SimConfig {
  std::variant<ClassificationSim, RegressionSim> task = ClassificationSim{};
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-segment changes to a classification task.
struct SimOverrides {
  std::optional<double> dirichlet_alpha;
  std::optional<double> ai_temperature;
  std::optional<double> ai_noise;
  std::optional<double> human_noise;
  std::optional<std::size_t> human_k;
  std::optional<std::vector<Label>> label_support;

  void apply(ClassificationSim& task) const;
};

// Synthetic human-to-AI adaptation: every `window` rounds the human widens
// (k + 1) or narrows (k - 1) their top-k proposals based on how often the
// truth was missed by both the human set and the announced set.
struct AdaptationPolicy {
  std::size_t window = 200;
  double raise_threshold = 0.05;
  double lower_threshold = 0.01;
  std::size_t k_min = 1;
  std::size_t k_max = 5;

  void validate() const;
};

struct ShiftSchedule {
  struct Segment {
    std::size_t start_round = 0;
    SimOverrides overrides;
  };
  std::vector<Segment> segments;
  std::optional<AdaptationPolicy> adaptation;

  void validate() const;

  // Human strategy switches from top-k_before to top-k_after at `at`.
  static ShiftSchedule strategy_shift(std::size_t at, std::size_t k_before, std::size_t k_after);
  // Equal-length segments walking through the given (ai_temperature,
  // human_noise) levels, e.g. from high to low noise.
  static ShiftSchedule noise_shift(std::size_t n, const std::vector<std::pair<double, double>>& levels);
  // Mass restricted to `support` before `at`, all labels afterwards.
  static ShiftSchedule label_shift(std::size_t at, std::vector<Label> support);
};

// k most probable labels, ties broken toward the lower label id.
LabelSet human_topk(const ProbVector& human_probs, std::size_t k);

// New k after one adaptation window given the missed-by-both rate.
std::size_t adapt_human(const AdaptationPolicy& policy, double missed_by_both_rate,
                        std::size_t current_k);

// Round-by-round classification generator. observe() feeds the announced
// set back for the adaptation policy.
class ClassificationStream final : public StreamSource {
 public:
  ClassificationStream(SimConfig cfg, ShiftSchedule schedule);

  std::optional<Record> next() override;
  void observe(const Record& record, const PredictionSet& set) override;

  std::size_t current_k() const { return k_; }
  std::size_t round() const { return round_; }

 private:
  SimConfig cfg_;
  ClassificationSim task_;
  ShiftSchedule schedule_;
  Rng rng_;
  std::size_t round_ = 0;
  std::size_t next_segment_ = 0;
  std::size_t k_;
  std::deque<bool> missed_;
  std::size_t since_adapt_ = 0;
};

std::vector<Record> gen_classification_stream(const SimConfig& cfg,
                                              const ShiftSchedule& schedule = {});

// Linear-Gaussian regression data with noisy human intervals. Evidence is
// left empty; fit quantile models and annotate bands afterwards.
std::vector<Record> gen_regression_dataset(const SimConfig& cfg);

// Stable sort by one feature, e.g. to order patients by age.
void order_by_feature(std::vector<Record>& records, std::size_t feature, bool descending = false);

}  // namespace collab
