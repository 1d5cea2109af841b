#pragma once

// Domain types shared by every module: labels, human sets, prediction sets,
// threshold pairs and dataset records.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace collab {

using Label = std::uint32_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class TaskKind { classification, regression };

// Counterfactual-harm budget (epsilon) and complementarity miscoverage
// budget (delta). Both strictly inside (0, 1).
struct TargetRates {
  double epsilon = 0.1;
  double delta = 0.3;

  TargetRates() = default;
  TargetRates(double eps, double del);
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi > lo ? hi - lo : 0.0; }
  bool contains(double y) const { return lo <= y && y <= hi; }
};

// Sorted, duplicate-free list of label ids.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<Label> labels);
  explicit LabelSet(std::vector<Label> labels);

  bool contains(Label y) const;
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::vector<Label>& labels() const { return labels_; }
  void insert(Label y);

  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<Label> labels_;
};

// Closed human interval [lo, hi]. `empty` marks a proposal that contains
// nothing; lo/hi are then ignored.
struct HumanInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = false;

  HumanInterval() = default;
  HumanInterval(double lo_, double hi_, bool empty_ = false);
  static HumanInterval none() { return HumanInterval(0.0, 0.0, true); }
};

using HumanSet = std::variant<LabelSet, HumanInterval>;

// Disjoint closed intervals sorted by lo with positive gaps between them.
// Only normalize_interval_union() builds these.
class IntervalUnion {
 public:
  IntervalUnion() = default;

  const std::vector<Interval>& intervals() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  double measure() const;
  bool contains(double y) const;

  friend IntervalUnion normalize_interval_union(std::vector<Interval> raw);

 private:
  std::vector<Interval> parts_;
};

using PredictionSet = std::variant<LabelSet, IntervalUnion>;

// Two-threshold rule: a applies to labels outside H, b to labels inside H.
struct ThresholdPair {
  double a = kInf;
  double b = kInf;
};

// Probabilities over labels 0..K-1.
class ProbVector {
 public:
  ProbVector() = default;

  // Validates entries in [0,1] summing to 1 within 1e-6. Sums within 1e-3
  // are renormalized; anything further off throws std::invalid_argument.
  explicit ProbVector(std::vector<double> probs);

  double operator[](Label y) const { return probs_[y]; }
  double at(Label y) const;
  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& values() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// Conditional quantile estimates: the eps pair is used for labels inside
// H, the delta pair for labels outside H.
struct QuantileBandPair {
  double q_eps_lo = 0.0;
  double q_eps_hi = 0.0;
  double q_del_lo = 0.0;
  double q_del_hi = 0.0;
};

using Target = std::variant<Label, double>;

using Evidence = std::variant<std::monostate, ProbVector, QuantileBandPair>;

struct Record {
  std::string id;
  Evidence evidence;
  HumanSet human_set;
  std::optional<Target> label;
  std::vector<double> features;  // regression inputs, empty otherwise

  TaskKind kind() const {
    return std::holds_alternative<LabelSet>(human_set) ? TaskKind::classification
                                                       : TaskKind::regression;
  }
  const ProbVector& probs() const;
  const QuantileBandPair& band() const;
  const Target& truth() const;
};

// y in H(x). Throws std::invalid_argument when y's kind does not match h.
bool human_contains(const HumanSet& h, const Target& y);

// Sorts and merges overlapping or touching intervals. Intervals with
// lo > hi are treated as empty and dropped.
IntervalUnion normalize_interval_union(std::vector<Interval> raw);

double set_size(const PredictionSet& c);

bool set_contains(const PredictionSet& c, const Target& y);

}  // namespace collab
