#include "collab/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace collab {

SupportWindow SupportWindow::from_labels(std::span<const Record> records) {
  double lo = kInf, hi = -kInf;
  for (const auto& r : records) {
    if (!r.label) continue;
    if (const auto* v = std::get_if<double>(&*r.label)) {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  if (!(lo <= hi)) return SupportWindow{};
  const double width = std::max(hi - lo, 1.0);
  return SupportWindow{lo - 3.0 * width, hi + 3.0 * width};
}

double conformal_quantile(std::span<const double> scores, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite calibration score");
  }
  const std::size_t m = scores.size();
  const auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(m + 1)));
  if (k > m || k == 0) return k == 0 ? -kInf : kInf;
  std::vector<double> sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  return sorted[k - 1];
}

double id_jitter(const std::string& id) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 1e-12;
}

OfflineCalibration calibrate_offline(std::span<const Record> cal, const TargetRates& rates,
                                     const ScoreFunction& score, CalibrationOptions opts) {
  std::vector<double> in_scores, out_scores;
  for (const auto& r : cal) {
    const Target& y = r.truth();
    double s = score(r, y);
    if (opts.jitter) s += id_jitter(r.id);
    (human_contains(r.human_set, y) ? in_scores : out_scores).push_back(s);
  }
  OfflineCalibration out;
  out.rates = rates;
  out.n_in = in_scores.size();
  out.n_out = out_scores.size();
  out.thresholds.b = conformal_quantile(in_scores, 1.0 - rates.epsilon);
  out.thresholds.a = conformal_quantile(out_scores, 1.0 - rates.delta);
  if (!cal.empty() && cal.front().kind() == TaskKind::regression) {
    out.support = SupportWindow::from_labels(cal);
  }
  return out;
}

LabelSet predict_set_classification(const ProbVector& p, const LabelSet& h, ThresholdPair t) {
  std::vector<Label> kept;
  for (Label y = 0; y < p.size(); ++y) {
    const double limit = h.contains(y) ? t.b : t.a;
    if (score_classification(p, y) <= limit) kept.push_back(y);
  }
  return LabelSet(std::move(kept));
}

namespace {

// Band [lo - t, hi + t]; an infinite threshold yields the whole window.
Interval widen(double lo, double hi, double t, const SupportWindow& window) {
  if (t == kInf) return {window.lo, window.hi};
  if (t == -kInf) return {1.0, 0.0};
  return {lo - t, hi + t};
}

}  // namespace

IntervalUnion predict_set_regression(const QuantileBandPair& band, const HumanInterval& h,
                                     ThresholdPair t, SupportWindow window) {
  std::vector<Interval> parts;
  const Interval in_band = widen(band.q_eps_lo, band.q_eps_hi, t.b, window);
  const Interval out_band = widen(band.q_del_lo, band.q_del_hi, t.a, window);
  if (h.empty) {
    parts.push_back(out_band);
  } else {
    parts.push_back({std::max(in_band.lo, h.lo), std::min(in_band.hi, h.hi)});
    parts.push_back({out_band.lo, std::min(out_band.hi, h.lo)});
    parts.push_back({std::max(out_band.lo, h.hi), out_band.hi});
  }
  return normalize_interval_union(std::move(parts));
}

PredictionSet predict_set(const Record& r, ThresholdPair t, SupportWindow window) {
  if (r.kind() == TaskKind::classification) {
    return predict_set_classification(r.probs(), std::get<LabelSet>(r.human_set), t);
  }
  return predict_set_regression(r.band(), std::get<HumanInterval>(r.human_set), t, window);
}

double calibrate_ai_alone(std::span<const Record> cal, double alpha, const ScoreFunction& score) {
  std::vector<double> scores;
  scores.reserve(cal.size());
  for (const auto& r : cal) scores.push_back(score(r, r.truth()));
  return conformal_quantile(scores, 1.0 - alpha);
}

PredictionSet predict_set_ai_alone(const Record& r, double threshold, SupportWindow window) {
  if (r.kind() == TaskKind::classification) {
    const auto& p = r.probs();
    std::vector<Label> kept;
    for (Label y = 0; y < p.size(); ++y) {
      if (score_classification(p, y) <= threshold) kept.push_back(y);
    }
    return LabelSet(std::move(kept));
  }
  const auto& band = r.band();
  return normalize_interval_union({widen(band.q_eps_lo, band.q_eps_hi, threshold, window)});
}

CoverageSummary summarize(std::span<const Record> test, std::span<const PredictionSet> sets) {
  if (test.size() != sets.size()) throw std::invalid_argument("records and sets differ in length");
  CoverageSummary out;
  out.n = test.size();
  std::size_t hits = 0, hits_in = 0, hits_out = 0;
  double size_total = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Target& y = test[i].truth();
    const bool in_h = human_contains(test[i].human_set, y);
    const bool hit = set_contains(sets[i], y);
    hits += hit;
    size_total += set_size(sets[i]);
    if (in_h) {
      ++out.n_in;
      hits_in += hit;
    } else {
      ++out.n_out;
      hits_out += hit;
    }
  }
  if (out.n > 0) {
    const auto n = static_cast<double>(out.n);
    out.coverage = static_cast<double>(hits) / n;
    out.mean_size = size_total / n;
    out.human_coverage = static_cast<double>(out.n_in) / n;
  }
  if (out.n_in > 0) out.coverage_in = static_cast<double>(hits_in) / static_cast<double>(out.n_in);
  if (out.n_out > 0) out.coverage_out = static_cast<double>(hits_out) / static_cast<double>(out.n_out);
  return out;
}

namespace {

nlohmann::json threshold_to_json(double t) {
  if (t == kInf) return nullptr;
  return t;
}

double threshold_from_json(const nlohmann::json& j) {
  return j.is_null() ? kInf : j.get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const OfflineCalibration& c) {
  j = nlohmann::json{{"a", threshold_to_json(c.thresholds.a)},
                     {"b", threshold_to_json(c.thresholds.b)},
                     {"n_in", c.n_in},
                     {"n_out", c.n_out},
                     {"epsilon", c.rates.epsilon},
                     {"delta", c.rates.delta}};
  if (c.support) j["support"] = {c.support->lo, c.support->hi};
}

void from_json(const nlohmann::json& j, OfflineCalibration& c) {
  static const std::vector<std::string> known = {"a", "b", "n_in", "n_out", "epsilon", "delta", "support"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("unknown calibration field '" + key + "'");
    }
  }
  c.thresholds.a = threshold_from_json(j.at("a"));
  c.thresholds.b = threshold_from_json(j.at("b"));
  j.at("n_in").get_to(c.n_in);
  j.at("n_out").get_to(c.n_out);
  c.rates = TargetRates(j.at("epsilon").get<double>(), j.at("delta").get<double>());
  if (j.contains("support")) {
    const auto& s = j.at("support");
    c.support = SupportWindow{s.at(0).get<double>(), s.at(1).get<double>()};
  } else {
    c.support.reset();
  }
}

}  // namespace collab
