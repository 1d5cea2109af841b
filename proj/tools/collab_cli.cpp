// Command-line pipeline: simulate -> fit-quantiles -> calibrate ->
// predict / online -> oracle-check -> evaluate.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "collab/calibrate.hpp"
#include "collab/io.hpp"
#include "collab/online.hpp"
#include "collab/oracle.hpp"
#include "collab/quantile_fit.hpp"
#include "collab/simulate.hpp"

namespace {

using namespace collab;
using nlohmann::json;

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json summary_json(const CoverageSummary& s) {
  return json{{"n", s.n},
              {"n_in", s.n_in},
              {"n_out", s.n_out},
              {"coverage", s.coverage},
              {"mean_size", s.mean_size},
              {"coverage_in", optional_json(s.coverage_in)},
              {"coverage_out", optional_json(s.coverage_out)},
              {"human_coverage", s.human_coverage}};
}

std::string describe_set(const PredictionSet& set) {
  std::ostringstream os;
  if (const auto* labels = std::get_if<LabelSet>(&set)) {
    bool first = true;
    for (Label y : *labels) {
      os << (first ? "" : ";") << y;
      first = false;
    }
  } else {
    bool first = true;
    for (const auto& iv : std::get<IntervalUnion>(set).intervals()) {
      os << (first ? "" : ";") << '[' << iv.lo << ' ' << iv.hi << ']';
      first = false;
    }
  }
  return os.str();
}

void cmd_simulate(const std::string& config_path, const std::string& out,
                  std::optional<std::uint64_t> seed) {
  auto cfg = io::load_run_config(config_path);
  if (seed) cfg.sim.seed = *seed;
  std::vector<Record> records;
  if (cfg.task == TaskKind::classification) {
    ShiftSchedule schedule;
    if (cfg.schedule_path) schedule = io::load_schedule(*cfg.schedule_path);
    records = gen_classification_stream(cfg.sim, schedule);
  } else {
    records = gen_regression_dataset(cfg.sim);
  }
  io::write_dataset(out, records);
  std::cout << "wrote " << records.size() << " records to " << out << '\n';
}

void cmd_fit(const std::string& data, const std::string& rates_text, const std::string& out,
             std::string annotate, FitConfig fit) {
  auto records = io::load_dataset(data);
  const auto rates = io::parse_rates(rates_text);
  const BandModels models = fit_band_models(records, rates, fit);
  io::write_json_file(out, models);
  annotate_bands(records, models);
  if (annotate.empty()) {
    std::filesystem::path p(data);
    annotate = (p.parent_path() / (p.stem().string() + ".banded.jsonl")).string();
  }
  io::write_dataset(annotate, records);
  std::cout << "wrote models to " << out << " and banded records to " << annotate << '\n';
}

void cmd_calibrate(const std::string& data, const std::string& rates_text, const std::string& out,
                   const std::string& mode, std::optional<double> alpha, bool jitter) {
  const auto records = io::load_dataset(data);
  if (mode == "ai-alone") {
    if (!alpha) throw std::invalid_argument("--mode ai-alone requires --alpha");
    const double q = calibrate_ai_alone(records, *alpha);
    json j{{"mode", "ai-alone"}, {"alpha", *alpha}, {"threshold", q == kInf ? json(nullptr) : json(q)}};
    if (!records.empty() && records.front().kind() == TaskKind::regression) {
      const auto w = SupportWindow::from_labels(records);
      j["support"] = {w.lo, w.hi};
    }
    io::write_json_file(out, j);
  } else if (mode == "two-threshold") {
    const auto rates = io::parse_rates(rates_text);
    const auto cal = calibrate_offline(records, rates, default_score(), {.jitter = jitter});
    io::write_json_file(out, cal);
  } else {
    throw std::invalid_argument("unknown calibration mode '" + mode + "'");
  }
  std::cout << "wrote calibration to " << out << '\n';
}

void cmd_predict(const std::string& data, const std::string& calib_path, const std::string& out) {
  const auto records = io::load_dataset(data);
  const json cj = io::read_json_file(calib_path);
  std::vector<PredictionSet> sets;
  sets.reserve(records.size());
  if (cj.contains("mode") && cj.at("mode") == "ai-alone") {
    const double q = cj.at("threshold").is_null() ? kInf : cj.at("threshold").get<double>();
    SupportWindow w;
    if (cj.contains("support")) w = {cj["support"][0].get<double>(), cj["support"][1].get<double>()};
    for (const auto& r : records) sets.push_back(predict_set_ai_alone(r, q, w));
  } else {
    const auto cal = cj.get<OfflineCalibration>();
    const SupportWindow w = cal.support.value_or(SupportWindow{});
    for (const auto& r : records) sets.push_back(predict_set(r, cal.thresholds, w));
  }
  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot write " + out);
  csv << "id,group,set,size,covered\n";
  std::vector<Record> labeled;
  std::vector<PredictionSet> labeled_sets;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string group, covered;
    if (r.label) {
      group = human_contains(r.human_set, *r.label) ? "in" : "out";
      covered = set_contains(sets[i], *r.label) ? "1" : "0";
      labeled.push_back(r);
      labeled_sets.push_back(sets[i]);
    }
    char size[32];
    std::snprintf(size, sizeof size, "%.17g", set_size(sets[i]));
    csv << r.id << ',' << group << ',' << describe_set(sets[i]) << ',' << size << ',' << covered << '\n';
  }
  std::cout << summary_json(summarize(labeled, labeled_sets)).dump() << '\n';
}

void cmd_online(const std::string& stream_path, const std::string& config_path, const std::string& out,
                const std::string& mode, const std::string& calib_path) {
  const auto records = io::load_dataset(stream_path);
  const auto cfg = io::load_run_config(config_path);
  OnlineConfig online = cfg.online;
  std::optional<ThresholdPair> fixed;
  if (!calib_path.empty()) {
    const auto cal = io::read_json_file(calib_path).get<OfflineCalibration>();
    fixed = cal.thresholds;
    if (cal.support) online.window = *cal.support;
  } else if (!records.empty() && records.front().kind() == TaskKind::regression) {
    online.window = SupportWindow::from_labels(records);
  }
  OnlineMode m;
  if (mode == "adaptive") {
    m = OnlineMode::adaptive;
  } else if (mode == "fixed") {
    if (!fixed) throw std::invalid_argument("--mode fixed requires --calib");
    m = OnlineMode::fixed;
  } else {
    throw std::invalid_argument("unknown online mode '" + mode + "'");
  }
  if (records.empty()) throw std::invalid_argument("stream is empty");
  if (m == OnlineMode::adaptive && fixed) warm_start(online, *fixed, records.front().kind());
  const auto trace = run_stream(records, online, m, fixed);
  io::write_trace_csv(out, trace);
  const auto& st = trace.final_state;
  std::cout << "rounds=" << st.t << " n_in=" << st.n_in << " n_out=" << st.n_out
            << " err_in=" << st.err_in_total << " err_out=" << st.err_out_total << '\n';
}

void cmd_oracle(std::size_t instances, std::uint64_t seed, const std::string& rates_text,
                const std::string& out, std::size_t max_contexts, std::size_t max_labels) {
  const auto rates = io::parse_rates(rates_text);
  json reports = json::array();
  std::size_t matches = 0, ties = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inst = suite_instance(seed, i, rates, max_contexts, max_labels);
    const auto report = verify_theorem1(inst);
    matches += report.matched;
    ties += report.has_ties;
    json j = report;
    j["instance"] = i;
    j["contexts"] = inst.contexts.size();
    j["labels"] = inst.n_labels();
    reports.push_back(j);
  }
  json doc{{"reports", reports},
           {"summary", {{"instances", instances}, {"matches", matches}, {"ties", ties}}}};
  io::write_json_file(out, doc);
  std::cout << "instances=" << instances << " matches=" << matches << " ties=" << ties << '\n';
}

// eta from the first threshold move: |delta b| = eta * (1 - eps) or eta * eps.
std::optional<double> infer_eta(const io::TraceTable& table, const TargetRates& rates) {
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto& next = table.rows[i + 1];
    const double step = row.in_group ? next.b - row.b : next.a - row.a;
    const double target = row.in_group ? rates.epsilon : rates.delta;
    if (step != 0.0) {
      // strip the rounding noise of the subtraction
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", std::abs(step) / (row.err ? 1.0 - target : target));
      return std::stod(buf);
    }
  }
  return std::nullopt;
}

void cmd_evaluate(const std::string& trace_path, const std::string& targets, const std::string& out,
                  std::optional<double> eta, std::size_t window) {
  const auto table = io::read_trace_csv(trace_path);
  if (table.rows.empty()) throw std::invalid_argument("trace is empty");
  const auto rates = io::parse_rates(targets);
  if (!eta) eta = infer_eta(table, rates);
  if (!eta) throw std::invalid_argument("thresholds never move; pass --eta");
  const auto ev = evaluate_trace(table.rows, *eta, rates, window);
  json j{{"rounds", ev.rounds},
         {"eta", *eta},
         {"n_in", ev.n_in},
         {"n_out", ev.n_out},
         {"err_rate_in", ev.n_in ? json(double(ev.err_in) / double(ev.n_in)) : json(nullptr)},
         {"err_rate_out", ev.n_out ? json(double(ev.err_out) / double(ev.n_out)) : json(nullptr)},
         {"bound_in_holds", ev.bound_in_holds},
         {"bound_out_holds", ev.bound_out_holds},
         {"worst_ratio_in", ev.worst_ratio_in},
         {"worst_ratio_out", ev.worst_ratio_out},
         {"final_window",
          {{"rounds", ev.window},
           {"coverage", ev.window_coverage},
           {"mean_size", ev.window_mean_size},
           {"coverage_in", optional_json(ev.window_coverage_in)},
           {"coverage_out", optional_json(ev.window_coverage_out)}}}};
  io::write_json_file(out, j);
  std::cout << "bound_in_holds=" << ev.bound_in_holds << " bound_out_holds=" << ev.bound_out_holds
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-AI collaborative prediction sets"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;

  std::string config, out, data, rates = "0.1,0.3", calib, stream, trace, annotate;
  std::string cal_mode, online_mode;
  std::optional<double> alpha, eta;
  bool jitter = false;
  FitConfig fit;
  std::size_t instances = 50, max_contexts = 4, max_labels = 4, window = 2000;
  std::uint64_t oracle_seed = 0;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset or stream");
  sim->add_option("--config", config, "run config JSON")->required();
  sim->add_option("--out", out, "output JSONL")->required();
  sim->add_option("--seed", seed, "override the config seed");

  auto* fitq = app.add_subcommand("fit-quantiles", "fit the four pinball models and annotate bands");
  fitq->add_option("--data", data, "labeled regression JSONL")->required();
  fitq->add_option("--rates", rates, "epsilon,delta")->required();
  fitq->add_option("--out", out, "model JSON")->required();
  fitq->add_option("--annotate", annotate, "banded JSONL output (default <data>.banded.jsonl)");
  fitq->add_option("--epochs", fit.epochs, "subgradient epochs");
  fitq->add_option("--lr", fit.learning_rate, "learning rate");
  fitq->add_option("--seed", seed, "initialization seed");

  auto* cal = app.add_subcommand("calibrate", "offline two-threshold calibration");
  cal->add_option("--data", data, "labeled calibration JSONL")->required();
  cal->add_option("--rates", rates, "epsilon,delta");
  cal->add_option("--out", out, "calibration JSON")->required();
  cal->add_option("--mode", cal_mode, "two-threshold | ai-alone")->default_val("two-threshold");
  cal->add_option("--alpha", alpha, "miscoverage for ai-alone");
  cal->add_flag("--jitter", jitter, "break score ties with a 1e-12 id-keyed jitter");

  auto* pred = app.add_subcommand("predict", "build prediction sets for a dataset");
  pred->add_option("--data", data, "JSONL records")->required();
  pred->add_option("--calib", calib, "calibration JSON")->required();
  pred->add_option("--out", out, "per-record CSV")->required();

  auto* onl = app.add_subcommand("online", "run the online calibrator over a stream");
  onl->add_option("--stream", stream, "labeled JSONL stream")->required();
  onl->add_option("--config", config, "run config JSON")->required();
  onl->add_option("--out", out, "trace CSV")->required();
  onl->add_option("--mode", online_mode, "adaptive | fixed")->default_val("adaptive");
  onl->add_option("--calib", calib, "calibration JSON: frozen thresholds (fixed) or warm start (adaptive)");

  auto* orc = app.add_subcommand("oracle-check", "brute force vs two-threshold sweep");
  orc->add_option("--instances", instances, "number of random instances");
  orc->add_option("--seed", oracle_seed, "suite seed");
  orc->add_option("--rates", rates, "epsilon,delta");
  orc->add_option("--out", out, "report JSON")->required();
  orc->add_option("--max-contexts", max_contexts, "at most this many contexts")->check(CLI::Range(1, 6));
  orc->add_option("--max-labels", max_labels, "at most this many labels")->check(CLI::Range(2, 6));

  auto* ev = app.add_subcommand("evaluate", "check the online error bound on a trace");
  ev->add_option("--trace", trace, "trace CSV")->required();
  ev->add_option("--targets", rates, "epsilon,delta")->required();
  ev->add_option("--out", out, "summary JSON")->required();
  ev->add_option("--eta", eta, "learning rate (inferred from the trace when omitted)");
  ev->add_option("--window", window, "final-window length");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      cmd_simulate(config, out, seed);
    } else if (*fitq) {
      if (seed) fit.seed = *seed;
      cmd_fit(data, rates, out, annotate, fit);
    } else if (*cal) {
      cmd_calibrate(data, rates, out, cal_mode, alpha, jitter);
    } else if (*pred) {
      cmd_predict(data, calib, out);
    } else if (*onl) {
      cmd_online(stream, config, out, online_mode, calib);
    } else if (*orc) {
      cmd_oracle(instances, oracle_seed, rates, out, max_contexts, max_labels);
    } else if (*ev) {
      cmd_evaluate(trace, rates, out, eta, window);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
