#include "collab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace collab {

void SimConfig::validate() const {
  if (const auto* c = std::get_if<ClassificationSim>(&task)) {
    if (c->n_labels < 2) throw std::invalid_argument("n_labels must be at least 2");
    if (!(c->dirichlet_alpha > 0.0)) throw std::invalid_argument("dirichlet_alpha must be positive");
    if (!(c->ai_temperature > 0.0)) throw std::invalid_argument("ai_temperature must be positive");
    if (!(c->ai_noise >= 0.0)) throw std::invalid_argument("ai_noise must be non-negative");
    if (!(c->human_noise >= 0.0)) throw std::invalid_argument("human_noise must be non-negative");
    if (c->human_k < 1 || c->human_k > c->n_labels) {
      throw std::invalid_argument("human_k must lie in [1, n_labels]");
    }
    for (Label y : c->label_support) {
      if (y >= c->n_labels) throw std::invalid_argument("label_support entry outside label space");
    }
  } else {
    const auto& r = std::get<RegressionSim>(task);
    if (r.feature_dim < 1) throw std::invalid_argument("feature_dim must be at least 1");
    if (!(r.noise_sd > 0.0)) throw std::invalid_argument("noise_sd must be positive");
    if (!(r.human_label_noise_sd >= 0.0)) throw std::invalid_argument("human_label_noise_sd must be non-negative");
    if (!(r.base_width >= 0.0)) throw std::invalid_argument("base_width must be non-negative");
    if (!(r.width_noise_sd >= 0.0)) throw std::invalid_argument("width_noise_sd must be non-negative");
  }
}

void SimOverrides::apply(ClassificationSim& task) const {
  if (dirichlet_alpha) task.dirichlet_alpha = *dirichlet_alpha;
  if (ai_temperature) task.ai_temperature = *ai_temperature;
  if (ai_noise) task.ai_noise = *ai_noise;
  if (human_noise) task.human_noise = *human_noise;
  if (human_k) task.human_k = *human_k;
  if (label_support) task.label_support = *label_support;
}

void AdaptationPolicy::validate() const {
  if (window < 1) throw std::invalid_argument("adaptation window must be positive");
  if (!(lower_threshold > 0.0 && lower_threshold < 1.0 && raise_threshold > 0.0 &&
        raise_threshold < 1.0)) {
    throw std::invalid_argument("adaptation thresholds must lie in (0,1)");
  }
  if (!(lower_threshold < raise_threshold)) {
    throw std::invalid_argument("lower_threshold must be below raise_threshold");
  }
  if (k_min < 1 || k_min > k_max) throw std::invalid_argument("need 1 <= k_min <= k_max");
}

void ShiftSchedule::validate() const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i == 0 && segments[i].start_round != 0) {
      throw std::invalid_argument("first schedule segment must start at round 0");
    }
    if (i > 0 && segments[i].start_round <= segments[i - 1].start_round) {
      throw std::invalid_argument("schedule start rounds must be strictly increasing");
    }
  }
  if (adaptation) adaptation->validate();
}

ShiftSchedule ShiftSchedule::strategy_shift(std::size_t at, std::size_t k_before,
                                            std::size_t k_after) {
  ShiftSchedule s;
  SimOverrides before, after;
  before.human_k = k_before;
  after.human_k = k_after;
  s.segments.push_back({0, before});
  s.segments.push_back({at, after});
  return s;
}

ShiftSchedule ShiftSchedule::noise_shift(std::size_t n,
                                         const std::vector<std::pair<double, double>>& levels) {
  ShiftSchedule s;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    SimOverrides o;
    o.ai_temperature = levels[i].first;
    o.human_noise = levels[i].second;
    s.segments.push_back({i * n / levels.size(), o});
  }
  return s;
}

ShiftSchedule ShiftSchedule::label_shift(std::size_t at, std::vector<Label> support) {
  ShiftSchedule s;
  SimOverrides restricted, full;
  restricted.label_support = std::move(support);
  full.label_support = std::vector<Label>{};
  s.segments.push_back({0, restricted});
  s.segments.push_back({at, full});
  return s;
}

LabelSet human_topk(const ProbVector& human_probs, std::size_t k) {
  if (k < 1 || k > human_probs.size()) throw std::invalid_argument("k must lie in [1, n_labels]");
  std::vector<Label> order(human_probs.size());
  std::iota(order.begin(), order.end(), Label{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Label x, Label y) { return human_probs[x] > human_probs[y]; });
  order.resize(k);
  return LabelSet(std::move(order));
}

std::size_t adapt_human(const AdaptationPolicy& policy, double missed_by_both_rate,
                        std::size_t current_k) {
  std::size_t k = current_k;
  if (missed_by_both_rate > policy.raise_threshold) {
    ++k;
  } else if (missed_by_both_rate < policy.lower_threshold && k > 0) {
    --k;
  }
  return std::clamp(k, policy.k_min, policy.k_max);
}

namespace {

// softmax(log(p) / temperature + noise_sd * z); zero-mass labels stay zero.
std::vector<double> perturb(const std::vector<double>& p, double temperature, double noise_sd,
                            Rng& rng) {
  std::vector<double> logits(p.size());
  double max_logit = -kInf;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double z = rng.normal();
    logits[i] = p[i] > 0.0 ? std::log(p[i]) / temperature + noise_sd * z : -kInf;
    max_logit = std::max(max_logit, logits[i]);
  }
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - max_logit);
    total += l;
  }
  for (double& l : logits) l /= total;
  return logits;
}

Label sample_label(const std::vector<double>& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  Label last = 0;
  for (Label y = 0; y < p.size(); ++y) {
    if (p[y] <= 0.0) continue;
    acc += p[y];
    last = y;
    if (u < acc) return y;
  }
  return last;
}

}  // namespace

ClassificationStream::ClassificationStream(SimConfig cfg, ShiftSchedule schedule)
    : cfg_(std::move(cfg)), schedule_(std::move(schedule)), rng_(cfg_.seed) {
  cfg_.validate();
  schedule_.validate();
  task_ = std::get<ClassificationSim>(cfg_.task);
  k_ = task_.human_k;
}

std::optional<Record> ClassificationStream::next() {
  if (round_ >= cfg_.n) return std::nullopt;
  while (next_segment_ < schedule_.segments.size() &&
         schedule_.segments[next_segment_].start_round <= round_) {
    const auto& o = schedule_.segments[next_segment_].overrides;
    o.apply(task_);
    if (o.human_k) k_ = *o.human_k;
    ++next_segment_;
  }

  const std::size_t n_labels = task_.n_labels;
  std::vector<double> p(n_labels, 0.0);
  if (task_.label_support.empty()) {
    p = rng_.dirichlet(n_labels, task_.dirichlet_alpha);
  } else {
    const auto draw = rng_.dirichlet(task_.label_support.size(), task_.dirichlet_alpha);
    for (std::size_t i = 0; i < draw.size(); ++i) p[task_.label_support[i]] += draw[i];
  }
  const Label y = sample_label(p, rng_);
  ProbVector ai(perturb(p, task_.ai_temperature, task_.ai_noise, rng_));
  ProbVector human(perturb(p, 1.0, task_.human_noise, rng_));

  Record r;
  r.id = "r" + std::to_string(round_);
  r.evidence = std::move(ai);
  r.human_set = human_topk(human, std::min(k_, n_labels));
  r.label = Target{y};
  ++round_;
  return r;
}

void ClassificationStream::observe(const Record& record, const PredictionSet& set) {
  if (!schedule_.adaptation) return;
  const auto& policy = *schedule_.adaptation;
  const Target& y = record.truth();
  missed_.push_back(!human_contains(record.human_set, y) && !set_contains(set, y));
  if (missed_.size() > policy.window) missed_.pop_front();
  if (++since_adapt_ == policy.window) {
    since_adapt_ = 0;
    const double rate = static_cast<double>(std::count(missed_.begin(), missed_.end(), true)) /
                        static_cast<double>(missed_.size());
    k_ = std::min(adapt_human(policy, rate, k_), task_.n_labels);
  }
}

std::vector<Record> gen_classification_stream(const SimConfig& cfg, const ShiftSchedule& schedule) {
  ClassificationStream stream(cfg, schedule);
  std::vector<Record> out;
  out.reserve(cfg.n);
  while (auto r = stream.next()) out.push_back(std::move(*r));
  return out;
}

std::vector<Record> gen_regression_dataset(const SimConfig& cfg) {
  cfg.validate();
  const auto& task = std::get<RegressionSim>(cfg.task);
  Rng rng(cfg.seed);
  std::vector<double> w(task.feature_dim);
  for (double& v : w) v = rng.normal();

  std::vector<Record> out;
  out.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Record r;
    r.id = "r" + std::to_string(i);
    r.features.resize(task.feature_dim);
    double y = 0.0;
    for (std::size_t j = 0; j < task.feature_dim; ++j) {
      r.features[j] = rng.normal();
      y += w[j] * r.features[j];
    }
    y += task.noise_sd * rng.normal();
    const double centre = y + task.human_label_noise_sd * rng.normal();
    const double width = std::max(task.base_width + task.width_noise_sd * rng.normal(), 0.0);
    r.human_set = HumanInterval(centre - width / 2.0, centre + width / 2.0);
    r.label = Target{y};
    out.push_back(std::move(r));
  }
  return out;
}

void order_by_feature(std::vector<Record>& records, std::size_t feature, bool descending) {
  for (const auto& r : records) {
    if (feature >= r.features.size()) throw std::invalid_argument("feature index out of range");
  }
  std::stable_sort(records.begin(), records.end(), [&](const Record& x, const Record& y) {
    return descending ? x.features[feature] > y.features[feature]
                      : x.features[feature] < y.features[feature];
  });
}

}  // namespace collab
