#include "collab/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace collab {

TargetRates::TargetRates(double eps, double del) : epsilon(eps), delta(del) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0,1), got " + std::to_string(eps));
  }
  if (!(del > 0.0 && del < 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1), got " + std::to_string(del));
  }
}

LabelSet::LabelSet(std::initializer_list<Label> labels)
    : LabelSet(std::vector<Label>(labels)) {}

LabelSet::LabelSet(std::vector<Label> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

bool LabelSet::contains(Label y) const {
  return std::binary_search(labels_.begin(), labels_.end(), y);
}

void LabelSet::insert(Label y) {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), y);
  if (it == labels_.end() || *it != y) labels_.insert(it, y);
}

HumanInterval::HumanInterval(double lo_, double hi_, bool empty_)
    : lo(lo_), hi(hi_), empty(empty_) {
  if (!empty && !(lo <= hi)) {
    throw std::invalid_argument("human interval requires lo <= hi");
  }
}

double IntervalUnion::measure() const {
  double total = 0.0;
  for (const auto& iv : parts_) total += iv.length();
  return total;
}

bool IntervalUnion::contains(double y) const {
  // first interval with lo > y; the candidate is the one before it
  auto it = std::upper_bound(parts_.begin(), parts_.end(), y,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == parts_.begin()) return false;
  return std::prev(it)->contains(y);
}

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("probs must be non-empty");
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0 + 1e-9) {
      std::ostringstream os;
      os << "probs entry " << p << " outside [0,1]";
      throw std::invalid_argument(os.str());
    }
  }
  const double sum = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-3) {
    std::ostringstream os;
    os << "probs sum " << sum;
    throw std::invalid_argument(os.str());
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    for (double& p : probs_) p /= sum;
  }
  for (double& p : probs_) p = std::min(p, 1.0);
}

double ProbVector::at(Label y) const {
  if (y >= probs_.size()) {
    throw std::out_of_range("label " + std::to_string(y) + " outside probability vector of size " +
                            std::to_string(probs_.size()));
  }
  return probs_[y];
}

const ProbVector& Record::probs() const {
  if (const auto* p = std::get_if<ProbVector>(&evidence)) return *p;
  throw std::logic_error("record " + id + " carries no probability vector");
}

const QuantileBandPair& Record::band() const {
  if (const auto* b = std::get_if<QuantileBandPair>(&evidence)) return *b;
  throw std::logic_error("record " + id + " carries no quantile band");
}

const Target& Record::truth() const {
  if (!label) throw std::logic_error("record " + id + " is unlabeled");
  return *label;
}

bool human_contains(const HumanSet& h, const Target& y) {
  if (const auto* labels = std::get_if<LabelSet>(&h)) {
    const auto* l = std::get_if<Label>(&y);
    if (!l) throw std::invalid_argument("real-valued target tested against a discrete human set");
    return labels->contains(*l);
  }
  const auto& iv = std::get<HumanInterval>(h);
  const auto* v = std::get_if<double>(&y);
  if (!v) throw std::invalid_argument("label target tested against an interval human set");
  return !iv.empty && iv.lo <= *v && *v <= iv.hi;
}

IntervalUnion normalize_interval_union(std::vector<Interval> raw) {
  std::erase_if(raw, [](const Interval& iv) { return !(iv.lo <= iv.hi); });
  std::sort(raw.begin(), raw.end(),
            [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  IntervalUnion out;
  for (const auto& iv : raw) {
    if (!out.parts_.empty() && iv.lo <= out.parts_.back().hi) {
      out.parts_.back().hi = std::max(out.parts_.back().hi, iv.hi);
    } else {
      out.parts_.push_back(iv);
    }
  }
  return out;
}

double set_size(const PredictionSet& c) {
  if (const auto* labels = std::get_if<LabelSet>(&c)) return static_cast<double>(labels->size());
  return std::get<IntervalUnion>(c).measure();
}

bool set_contains(const PredictionSet& c, const Target& y) {
  if (const auto* labels = std::get_if<LabelSet>(&c)) {
    const auto* l = std::get_if<Label>(&y);
    if (!l) throw std::invalid_argument("real-valued target tested against a label set");
    return labels->contains(*l);
  }
  const auto* v = std::get_if<double>(&y);
  if (!v) throw std::invalid_argument("label target tested against an interval union");
  return std::get<IntervalUnion>(c).contains(*v);
}

}  // namespace collab
