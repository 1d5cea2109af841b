#pragma once

#include <functional>

#include "collab/core.hpp"

namespace collab {

// Affine clipping range that maps raw regression scores into [0, 1].
struct ScoreBounds {
  double lo = -1.0;
  double hi = 1.0;

  ScoreBounds() = default;
  ScoreBounds(double lo_, double hi_);

  // Default range [-5 sigma, +5 sigma] for a label scale sigma.
  static ScoreBounds from_label_scale(double sigma);
};

// 1 - p(y|x). Throws std::out_of_range for a label outside p.
double score_classification(const ProbVector& p, Label y);

// Signed distance of y outside the band selected by in_h: the eps pair when
// y lies in H, the delta pair otherwise. Non-positive inside the band.
double score_regression(const QuantileBandPair& band, bool in_h, double y);

// clamp((s - lo) / (hi - lo), 0, 1); monotone non-decreasing in s.
double bound_score(double s, ScoreBounds bounds);

// Inverse of bound_score on [0, 1): the raw threshold whose sublevel set
// matches {s : bound_score(s) <= t}. Returns +inf for t >= 1 and -inf for
// t < 0.
double unbound_threshold(double t, ScoreBounds bounds);

// Score of a candidate target for a record, dispatched on task kind.
using ScoreFunction = std::function<double(const Record&, const Target&)>;

// 1 - p(y|x) for classification records; the two-band score for regression
// records (band chosen by human_contains).
double nonconformity(const Record& r, const Target& y);

ScoreFunction default_score();

// H-agnostic score for the AI-alone baseline: 1 - p(y|x) for classification,
// the CQR score on the eps band for regression.
double ai_alone_nonconformity(const Record& r, const Target& y);

ScoreFunction ai_alone_score();

// default_score() passed through bound_score for regression records;
// classification scores are already in [0, 1] and are returned unchanged.
ScoreFunction bounded_score(ScoreBounds bounds);

}  // namespace collab
