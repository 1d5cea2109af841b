#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "collab/calibrate.hpp"
#include "collab/core.hpp"
#include "collab/scores.hpp"

namespace collab {

struct OnlineConfig {
  double eta = 0.05;
  TargetRates rates;
  double init_a = 1.0;
  double init_b = 1.0;
  // Required for regression streams: raw scores are mapped into [0, 1].
  std::optional<ScoreBounds> bounds;
  // Regression sets with an infinite threshold are cut to this window.
  SupportWindow window;

  void validate() const;
};

// Starts the online thresholds from offline ones: raw score units are mapped
// into [0, 1] (through cfg.bounds for regression) and clipped.
void warm_start(OnlineConfig& cfg, ThresholdPair offline, TaskKind kind);

// Thresholds and counters of the online calibrator. One writer, strict
// round order.
struct OnlineState {
  double a = 1.0;
  double b = 1.0;
  std::size_t t = 0;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  std::size_t err_in_total = 0;
  std::size_t err_out_total = 0;

  static OnlineState initial(const OnlineConfig& cfg);
};

// Advances one round. Only the threshold of the observed group moves:
//   y in H:  b += eta * (1{s > b} - eps)
//   else:    a += eta * (1{s > a} - delta)
// Returns the error flag 1{s > threshold in use}. Throws
// std::invalid_argument if s is outside [0, 1] by more than 1e-9.
bool online_step(OnlineState& state, double score, bool y_in_h, double eta,
                 const TargetRates& rates);

// Same bookkeeping as online_step with frozen thresholds.
bool fixed_baseline_step(OnlineState& state, double score, bool y_in_h);

struct TraceRow {
  std::size_t t = 0;  // 1-based round
  bool in_group = false;
  bool err = false;
  bool hit = false;
  double a = 0.0;  // thresholds in use for this round's set
  double b = 0.0;
  double set_size = 0.0;
};

struct StreamTrace {
  std::vector<TraceRow> rows;
  OnlineState final_state;  // thresholds after the last update
  double eta = 0.0;
  TargetRates rates;
};

// Supplies records one round at a time and learns what the calibrator
// announced. Simulated humans that adapt to the AI implement observe().
class StreamSource {
 public:
  virtual ~StreamSource() = default;
  virtual std::optional<Record> next() = 0;
  virtual void observe(const Record& /*record*/, const PredictionSet& /*set*/) {}
};

class SpanSource final : public StreamSource {
 public:
  explicit SpanSource(std::span<const Record> records) : records_(records) {}
  std::optional<Record> next() override;

 private:
  std::span<const Record> records_;
  std::size_t pos_ = 0;
};

enum class OnlineMode { adaptive, fixed };

// Runs the predict / reveal / update protocol. The set for round t uses
// (a_t, b_t) clamped to [0, 1] before the label is revealed; the unclamped
// thresholds drive the update. In fixed mode the thresholds start at
// `fixed` (raw score units, mapped through the score bounds for
// regression) and never move.
StreamTrace run_stream(StreamSource& source, const OnlineConfig& cfg,
                       OnlineMode mode = OnlineMode::adaptive,
                       std::optional<ThresholdPair> fixed = std::nullopt);

StreamTrace run_stream(std::span<const Record> stream, const OnlineConfig& cfg,
                       OnlineMode mode = OnlineMode::adaptive,
                       std::optional<ThresholdPair> fixed = std::nullopt);

// Running metrics per round. Group-conditional coverage is missing while
// the group has not been observed.
struct MetricSeries {
  std::vector<double> coverage;
  std::vector<double> mean_size;
  std::vector<std::optional<double>> coverage_in;
  std::vector<std::optional<double>> coverage_out;
};

// Throws std::invalid_argument on an empty trace.
MetricSeries running_metrics(const StreamTrace& trace);

// Right-hand side of the finite-sample online bound for a group of size n.
double online_error_bound(double eta, double target, std::size_t n);

// Checks |err/N - target| <= online_error_bound at every prefix of a trace
// and summarizes its final window.
struct TraceEvaluation {
  std::size_t rounds = 0;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  std::size_t err_in = 0;
  std::size_t err_out = 0;
  bool bound_in_holds = true;
  bool bound_out_holds = true;
  // Largest |err/N - target| / bound over all prefixes; <= 1 when the
  // bound holds.
  double worst_ratio_in = 0.0;
  double worst_ratio_out = 0.0;

  std::size_t window = 0;
  double window_coverage = 0.0;
  double window_mean_size = 0.0;
  std::optional<double> window_coverage_in;
  std::optional<double> window_coverage_out;
};

TraceEvaluation evaluate_trace(std::span<const TraceRow> rows, double eta,
                               const TargetRates& rates, std::size_t window);

}  // namespace collab
