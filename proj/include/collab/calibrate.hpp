#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "collab/core.hpp"
#include "collab/scores.hpp"
#include "json.hpp"

namespace collab {

// Finite window that stands in for the real line when a threshold is +inf.
struct SupportWindow {
  double lo = -1e6;
  double hi = 1e6;

  // Label range of the records widened by three times its width on each side.
  static SupportWindow from_labels(std::span<const Record> records);
};

struct OfflineCalibration {
  ThresholdPair thresholds;
  std::size_t n_in = 0;   // calibration points with Y in H
  std::size_t n_out = 0;  // calibration points with Y outside H
  TargetRates rates;
  std::optional<SupportWindow> support;  // regression only
};

struct CalibrationOptions {
  // Adds a deterministic offset in [0, 1e-12) keyed by record id to each
  // calibration score, breaking ties between duplicate scores.
  bool jitter = false;
};

// k-th smallest score with k = ceil(level * (m + 1)); +inf when k > m.
// Throws std::invalid_argument on non-finite scores or level outside (0,1).
double conformal_quantile(std::span<const double> scores, double level);

// Deterministic jitter in [0, 1e-12) derived from a record id (FNV-1a).
double id_jitter(const std::string& id);

// Splits labeled records by whether Y lies in H and takes the conformal
// (1 - eps) quantile of the in-group scores (b) and the (1 - delta)
// quantile of the out-group scores (a).
OfflineCalibration calibrate_offline(std::span<const Record> cal, const TargetRates& rates,
                                     const ScoreFunction& score = default_score(),
                                     CalibrationOptions opts = {});

// Label y is kept iff 1 - p(y) <= (y in H ? b : a). Ties are included.
LabelSet predict_set_classification(const ProbVector& p, const LabelSet& h, ThresholdPair t);

// (eps band widened by b) intersected with H, joined with (delta band
// widened by a) minus H. Infinite thresholds are truncated to `window`.
IntervalUnion predict_set_regression(const QuantileBandPair& band, const HumanInterval& h,
                                     ThresholdPair t, SupportWindow window = {});

// Dispatches on the record's task kind.
PredictionSet predict_set(const Record& r, ThresholdPair t, SupportWindow window = {});

// Standard split conformal threshold from all scores, ignoring H.
double calibrate_ai_alone(std::span<const Record> cal, double alpha,
                          const ScoreFunction& score = ai_alone_score());

// {y : s(x, y) <= threshold} with the H-agnostic score.
PredictionSet predict_set_ai_alone(const Record& r, double threshold, SupportWindow window = {});

// Empirical coverage and size over a labeled test set.
struct CoverageSummary {
  std::size_t n = 0;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  double coverage = 0.0;
  double mean_size = 0.0;
  std::optional<double> coverage_in;   // P(Y in C | Y in H)
  std::optional<double> coverage_out;  // P(Y in C | Y not in H)
  double human_coverage = 0.0;         // P(Y in H)
};

CoverageSummary summarize(std::span<const Record> test, std::span<const PredictionSet> sets);

void to_json(nlohmann::json& j, const OfflineCalibration& c);
void from_json(const nlohmann::json& j, OfflineCalibration& c);

}  // namespace collab
