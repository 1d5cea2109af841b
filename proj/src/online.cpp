#include "collab/online.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace collab {

void OnlineConfig::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(init_a >= 0.0 && init_a <= 1.0) || !(init_b >= 0.0 && init_b <= 1.0)) {
    throw std::invalid_argument("initial thresholds must lie in [0,1]");
  }
}

OnlineState OnlineState::initial(const OnlineConfig& cfg) {
  OnlineState s;
  s.a = cfg.init_a;
  s.b = cfg.init_b;
  return s;
}

void warm_start(OnlineConfig& cfg, ThresholdPair offline, TaskKind kind) {
  if (kind == TaskKind::regression && !cfg.bounds) {
    throw std::invalid_argument("regression warm start needs score bounds");
  }
  auto unit = [&](double t) {
    if (kind == TaskKind::regression) t = bound_score(t, *cfg.bounds);
    return std::clamp(t, 0.0, 1.0);
  };
  cfg.init_a = unit(offline.a);
  cfg.init_b = unit(offline.b);
}

namespace {

void check_score(double score) {
  if (!(score >= -1e-9 && score <= 1.0 + 1e-9)) {
    std::ostringstream os;
    os << "online score " << score << " outside [0,1]";
    throw std::invalid_argument(os.str());
  }
}

void count(OnlineState& state, bool y_in_h, bool err) {
  ++state.t;
  if (y_in_h) {
    ++state.n_in;
    state.err_in_total += err;
  } else {
    ++state.n_out;
    state.err_out_total += err;
  }
}

}  // namespace

bool online_step(OnlineState& state, double score, bool y_in_h, double eta,
                 const TargetRates& rates) {
  check_score(score);
  bool err;
  if (y_in_h) {
    err = score > state.b;
    state.b += eta * ((err ? 1.0 : 0.0) - rates.epsilon);
  } else {
    err = score > state.a;
    state.a += eta * ((err ? 1.0 : 0.0) - rates.delta);
  }
  count(state, y_in_h, err);
  return err;
}

bool fixed_baseline_step(OnlineState& state, double score, bool y_in_h) {
  const bool err = score > (y_in_h ? state.b : state.a);
  count(state, y_in_h, err);
  return err;
}

std::optional<Record> SpanSource::next() {
  if (pos_ >= records_.size()) return std::nullopt;
  return records_[pos_++];
}

namespace {

// Raw-score threshold for set construction from a [0, 1] online threshold.
double set_threshold(double t, const Record& r, const OnlineConfig& cfg) {
  const double clamped = std::clamp(t, 0.0, 1.0);
  if (r.kind() == TaskKind::classification) return clamped;
  return unbound_threshold(clamped, *cfg.bounds);
}

double to_unit_threshold(double raw, const Record& r, const OnlineConfig& cfg) {
  if (r.kind() == TaskKind::classification) return raw;
  if (raw == kInf) return 1.0;
  return bound_score(raw, *cfg.bounds);
}

}  // namespace

StreamTrace run_stream(StreamSource& source, const OnlineConfig& cfg, OnlineMode mode,
                       std::optional<ThresholdPair> fixed) {
  cfg.validate();
  if (mode == OnlineMode::fixed && !fixed) {
    throw std::invalid_argument("fixed mode needs calibrated thresholds");
  }
  StreamTrace trace;
  trace.eta = cfg.eta;
  trace.rates = cfg.rates;
  OnlineState state = OnlineState::initial(cfg);
  bool first = true;
  ScoreFunction score = default_score();

  while (auto rec = source.next()) {
    const Record& r = *rec;
    if (first) {
      if (r.kind() == TaskKind::regression) {
        if (!cfg.bounds) throw std::invalid_argument("regression streams need score bounds");
        score = bounded_score(*cfg.bounds);
      }
      if (mode == OnlineMode::fixed) {
        state.a = to_unit_threshold(fixed->a, r, cfg);
        state.b = to_unit_threshold(fixed->b, r, cfg);
      }
      first = false;
    }
    const Target& y = r.truth();
    const bool in_h = human_contains(r.human_set, y);

    const ThresholdPair in_use{set_threshold(state.a, r, cfg), set_threshold(state.b, r, cfg)};
    const PredictionSet set = predict_set(r, in_use, cfg.window);

    TraceRow row;
    row.in_group = in_h;
    row.a = state.a;
    row.b = state.b;
    row.hit = set_contains(set, y);
    row.set_size = set_size(set);

    const double s = score(r, y);
    row.err = mode == OnlineMode::adaptive ? online_step(state, s, in_h, cfg.eta, cfg.rates)
                                           : fixed_baseline_step(state, s, in_h);
    row.t = state.t;
    trace.rows.push_back(row);
    source.observe(r, set);
  }
  trace.final_state = state;
  return trace;
}

StreamTrace run_stream(std::span<const Record> stream, const OnlineConfig& cfg, OnlineMode mode,
                       std::optional<ThresholdPair> fixed) {
  SpanSource source(stream);
  return run_stream(source, cfg, mode, fixed);
}

MetricSeries running_metrics(const StreamTrace& trace) {
  if (trace.rows.empty()) throw std::invalid_argument("running metrics of an empty trace");
  MetricSeries m;
  const auto n = trace.rows.size();
  m.coverage.reserve(n);
  m.mean_size.reserve(n);
  m.coverage_in.reserve(n);
  m.coverage_out.reserve(n);
  std::size_t hits = 0, n_in = 0, n_out = 0, err_in = 0, err_out = 0;
  double size_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = trace.rows[i];
    hits += row.hit;
    size_total += row.set_size;
    if (row.in_group) {
      ++n_in;
      err_in += row.err;
    } else {
      ++n_out;
      err_out += row.err;
    }
    const auto t = static_cast<double>(i + 1);
    m.coverage.push_back(static_cast<double>(hits) / t);
    m.mean_size.push_back(size_total / t);
    m.coverage_in.push_back(n_in ? std::optional<double>(1.0 - static_cast<double>(err_in) /
                                                                   static_cast<double>(n_in))
                                 : std::nullopt);
    m.coverage_out.push_back(n_out ? std::optional<double>(1.0 - static_cast<double>(err_out) /
                                                                     static_cast<double>(n_out))
                                   : std::nullopt);
  }
  return m;
}

double online_error_bound(double eta, double target, std::size_t n) {
  return (1.0 + eta * std::max(target, 1.0 - target)) / (eta * static_cast<double>(n));
}

TraceEvaluation evaluate_trace(std::span<const TraceRow> rows, double eta,
                               const TargetRates& rates, std::size_t window) {
  if (rows.empty()) throw std::invalid_argument("cannot evaluate an empty trace");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  TraceEvaluation ev;
  ev.rounds = rows.size();
  for (const auto& row : rows) {
    if (row.in_group) {
      ++ev.n_in;
      ev.err_in += row.err;
      const double gap = std::abs(static_cast<double>(ev.err_in) / static_cast<double>(ev.n_in) -
                                  rates.epsilon);
      const double bound = online_error_bound(eta, rates.epsilon, ev.n_in);
      ev.bound_in_holds = ev.bound_in_holds && gap <= bound;
      ev.worst_ratio_in = std::max(ev.worst_ratio_in, gap / bound);
    } else {
      ++ev.n_out;
      ev.err_out += row.err;
      const double gap = std::abs(static_cast<double>(ev.err_out) / static_cast<double>(ev.n_out) -
                                  rates.delta);
      const double bound = online_error_bound(eta, rates.delta, ev.n_out);
      ev.bound_out_holds = ev.bound_out_holds && gap <= bound;
      ev.worst_ratio_out = std::max(ev.worst_ratio_out, gap / bound);
    }
  }

  ev.window = std::min(window == 0 ? rows.size() : window, rows.size());
  std::size_t hits = 0, n_in = 0, n_out = 0, err_in = 0, err_out = 0;
  double size_total = 0.0;
  for (const auto& row : rows.last(ev.window)) {
    hits += row.hit;
    size_total += row.set_size;
    if (row.in_group) {
      ++n_in;
      err_in += row.err;
    } else {
      ++n_out;
      err_out += row.err;
    }
  }
  const auto w = static_cast<double>(ev.window);
  ev.window_coverage = static_cast<double>(hits) / w;
  ev.window_mean_size = size_total / w;
  if (n_in) ev.window_coverage_in = 1.0 - static_cast<double>(err_in) / static_cast<double>(n_in);
  if (n_out) ev.window_coverage_out = 1.0 - static_cast<double>(err_out) / static_cast<double>(n_out);
  return ev;
}

}  // namespace collab
