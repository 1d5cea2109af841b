#include "collab/scores.hpp"

#include <algorithm>
#include <cmath>

namespace collab {

ScoreBounds::ScoreBounds(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo < hi)) throw std::invalid_argument("score bounds require lo < hi");
}

ScoreBounds ScoreBounds::from_label_scale(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("label scale must be positive");
  return ScoreBounds(-5.0 * sigma, 5.0 * sigma);
}

double score_classification(const ProbVector& p, Label y) { return 1.0 - p.at(y); }

double score_regression(const QuantileBandPair& band, bool in_h, double y) {
  const double lo = in_h ? band.q_eps_lo : band.q_del_lo;
  const double hi = in_h ? band.q_eps_hi : band.q_del_hi;
  return std::max(lo - y, y - hi);
}

double bound_score(double s, ScoreBounds bounds) {
  return std::clamp((s - bounds.lo) / (bounds.hi - bounds.lo), 0.0, 1.0);
}

double unbound_threshold(double t, ScoreBounds bounds) {
  if (t >= 1.0) return kInf;
  if (t < 0.0) return -kInf;
  return bounds.lo + t * (bounds.hi - bounds.lo);
}

double nonconformity(const Record& r, const Target& y) {
  if (r.kind() == TaskKind::classification) {
    const auto* label = std::get_if<Label>(&y);
    if (!label) throw std::invalid_argument("classification record scored at a real value");
    return score_classification(r.probs(), *label);
  }
  const auto* v = std::get_if<double>(&y);
  if (!v) throw std::invalid_argument("regression record scored at a label");
  return score_regression(r.band(), human_contains(r.human_set, y), *v);
}

ScoreFunction default_score() { return nonconformity; }

double ai_alone_nonconformity(const Record& r, const Target& y) {
  if (r.kind() == TaskKind::classification) return nonconformity(r, y);
  const auto* v = std::get_if<double>(&y);
  if (!v) throw std::invalid_argument("regression record scored at a label");
  return score_regression(r.band(), true, *v);
}

ScoreFunction ai_alone_score() { return ai_alone_nonconformity; }

ScoreFunction bounded_score(ScoreBounds bounds) {
  return [bounds](const Record& r, const Target& y) {
    const double s = nonconformity(r, y);
    return r.kind() == TaskKind::regression ? bound_score(s, bounds) : s;
  };
}

}  // namespace collab
