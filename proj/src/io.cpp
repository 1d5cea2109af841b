#include "collab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace collab::io {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw FormatError(what + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw FormatError("unknown field '" + key + "' in " + what);
    }
  }
}

const json& require(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw FormatError("missing field '" + std::string(key) + "' in " + what);
  return j.at(key);
}

double as_number(const json& j, const char* field) {
  if (!j.is_number()) throw FormatError("field '" + std::string(field) + "' must be a number");
  return j.get<double>();
}

std::uint64_t as_count(const json& j, const char* field) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw FormatError("field '" + std::string(field) + "' must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

std::vector<double> as_numbers(const json& j, const char* field) {
  if (!j.is_array()) throw FormatError("field '" + std::string(field) + "' must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(as_number(v, field));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Record record_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("record must be a JSON object");
  Record r;
  const json& id = require(j, "id", "record");
  if (!id.is_string()) throw FormatError("field 'id' must be a string");
  r.id = id.get<std::string>();

  if (j.contains("probs")) {
    check_keys(j, {"id", "probs", "human_set", "label"}, "classification record");
    ProbVector p;
    try {
      p = ProbVector(as_numbers(j.at("probs"), "probs"));
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
    const json& hs = require(j, "human_set", "classification record");
    if (!hs.is_array()) throw FormatError("field 'human_set' must be an array");
    std::vector<Label> labels;
    for (const auto& v : hs) {
      const auto y = as_count(v, "human_set");
      if (y >= p.size()) throw FormatError("field 'human_set' has label " + std::to_string(y) +
                                           " outside " + std::to_string(p.size()) + " labels");
      labels.push_back(static_cast<Label>(y));
    }
    r.human_set = LabelSet(std::move(labels));
    if (j.contains("label")) {
      const auto y = as_count(j.at("label"), "label");
      if (y >= p.size()) throw FormatError("field 'label' " + std::to_string(y) + " outside label space");
      r.label = Target{static_cast<Label>(y)};
    }
    r.evidence = std::move(p);
    return r;
  }

  check_keys(j, {"id", "features", "band", "human_lo", "human_hi", "human_empty", "label"},
             "regression record");
  r.features = as_numbers(require(j, "features", "regression record"), "features");
  if (j.contains("band")) {
    const json& b = j.at("band");
    check_keys(b, {"q_eps_lo", "q_eps_hi", "q_del_lo", "q_del_hi"}, "band");
    QuantileBandPair band{as_number(require(b, "q_eps_lo", "band"), "q_eps_lo"),
                          as_number(require(b, "q_eps_hi", "band"), "q_eps_hi"),
                          as_number(require(b, "q_del_lo", "band"), "q_del_lo"),
                          as_number(require(b, "q_del_hi", "band"), "q_del_hi")};
    if (band.q_eps_lo > band.q_eps_hi || band.q_del_lo > band.q_del_hi) {
      throw FormatError("field 'band' has a crossed quantile pair");
    }
    r.evidence = band;
  }
  const bool empty = j.contains("human_empty") && j.at("human_empty").get<bool>();
  const double lo = as_number(require(j, "human_lo", "regression record"), "human_lo");
  const double hi = as_number(require(j, "human_hi", "regression record"), "human_hi");
  if (!empty && lo > hi) throw FormatError("field 'human_lo' exceeds 'human_hi'");
  r.human_set = HumanInterval(lo, hi, empty);
  if (j.contains("label")) r.label = Target{as_number(j.at("label"), "label")};
  return r;
}

json record_to_json(const Record& r) {
  json j;
  j["id"] = r.id;
  if (r.kind() == TaskKind::classification) {
    j["probs"] = r.probs().values();
    j["human_set"] = std::get<LabelSet>(r.human_set).labels();
    if (r.label) j["label"] = std::get<Label>(*r.label);
    return j;
  }
  j["features"] = r.features;
  if (const auto* b = std::get_if<QuantileBandPair>(&r.evidence)) {
    j["band"] = {{"q_eps_lo", b->q_eps_lo},
                 {"q_eps_hi", b->q_eps_hi},
                 {"q_del_lo", b->q_del_lo},
                 {"q_del_hi", b->q_del_hi}};
  }
  const auto& h = std::get<HumanInterval>(r.human_set);
  j["human_lo"] = h.lo;
  j["human_hi"] = h.hi;
  if (h.empty) j["human_empty"] = true;
  if (r.label) j["label"] = std::get<double>(*r.label);
  return j;
}

std::vector<Record> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
      if (out.size() > 1 && out.back().kind() != out.front().kind()) {
        throw FormatError("record kind differs from line 1");
      }
    } catch (const json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, std::span<const Record> records) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
  if (!out) throw FormatError("write failed for " + path.string());
}

void write_trace_csv(const std::filesystem::path& path, const StreamTrace& trace) {
  const MetricSeries m = running_metrics(trace);
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "t,group,err,a_t,b_t,set_size,running_cov,running_size,running_cov_in,running_cov_out\n";
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto& row = trace.rows[i];
    out << row.t << ',' << (row.in_group ? "in" : "out") << ',' << (row.err ? 1 : 0) << ','
        << format_double(row.a) << ',' << format_double(row.b) << ',' << format_double(row.set_size)
        << ',' << format_double(m.coverage[i]) << ',' << format_double(m.mean_size[i]) << ','
        << (m.coverage_in[i] ? format_double(*m.coverage_in[i]) : "") << ','
        << (m.coverage_out[i] ? format_double(*m.coverage_out[i]) : "") << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

TraceTable read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line != "t,group,err,a_t,b_t,set_size,running_cov,running_size,running_cov_in,running_cov_out") {
    throw FormatError("line 1: unexpected trace header");
  }
  TraceTable table;
  std::size_t line_no = 1;
  double prev_hits = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 10) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 10 cells, got " +
                        std::to_string(cells.size()));
    }
    try {
      TraceRow row;
      row.t = std::stoul(cells[0]);
      if (cells[1] != "in" && cells[1] != "out") throw FormatError("group must be in or out");
      row.in_group = cells[1] == "in";
      row.err = cells[2] == "1";
      row.a = std::stod(cells[3]);
      row.b = std::stod(cells[4]);
      row.set_size = std::stod(cells[5]);
      const double cov = std::stod(cells[6]);
      const double hits = std::round(cov * static_cast<double>(row.t));
      row.hit = hits > prev_hits;
      prev_hits = hits;
      table.rows.push_back(row);
      table.metrics.coverage.push_back(cov);
      table.metrics.mean_size.push_back(std::stod(cells[7]));
      table.metrics.coverage_in.push_back(cells[8].empty() ? std::nullopt
                                                           : std::optional<double>(std::stod(cells[8])));
      table.metrics.coverage_out.push_back(cells[9].empty() ? std::nullopt
                                                            : std::optional<double>(std::stod(cells[9])));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return table;
}

ShiftSchedule schedule_from_json(const json& j) {
  check_keys(j, {"segments", "adaptation"}, "schedule");
  ShiftSchedule s;
  if (j.contains("segments")) {
    for (const auto& seg : j.at("segments")) {
      check_keys(seg,
                 {"start_round", "dirichlet_alpha", "ai_temperature", "ai_noise", "human_noise",
                  "human_k", "label_support"},
                 "schedule segment");
      ShiftSchedule::Segment out;
      out.start_round = as_count(require(seg, "start_round", "schedule segment"), "start_round");
      auto& o = out.overrides;
      if (seg.contains("dirichlet_alpha")) o.dirichlet_alpha = as_number(seg.at("dirichlet_alpha"), "dirichlet_alpha");
      if (seg.contains("ai_temperature")) o.ai_temperature = as_number(seg.at("ai_temperature"), "ai_temperature");
      if (seg.contains("ai_noise")) o.ai_noise = as_number(seg.at("ai_noise"), "ai_noise");
      if (seg.contains("human_noise")) o.human_noise = as_number(seg.at("human_noise"), "human_noise");
      if (seg.contains("human_k")) o.human_k = as_count(seg.at("human_k"), "human_k");
      if (seg.contains("label_support")) {
        std::vector<Label> support;
        for (const auto& v : seg.at("label_support")) support.push_back(static_cast<Label>(as_count(v, "label_support")));
        o.label_support = std::move(support);
      }
      s.segments.push_back(std::move(out));
    }
  }
  if (j.contains("adaptation")) {
    const json& a = j.at("adaptation");
    check_keys(a, {"window", "raise_threshold", "lower_threshold", "k_min", "k_max"}, "adaptation");
    AdaptationPolicy p;
    if (a.contains("window")) p.window = as_count(a.at("window"), "window");
    if (a.contains("raise_threshold")) p.raise_threshold = as_number(a.at("raise_threshold"), "raise_threshold");
    if (a.contains("lower_threshold")) p.lower_threshold = as_number(a.at("lower_threshold"), "lower_threshold");
    if (a.contains("k_min")) p.k_min = as_count(a.at("k_min"), "k_min");
    if (a.contains("k_max")) p.k_max = as_count(a.at("k_max"), "k_max");
    s.adaptation = p;
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return s;
}

ShiftSchedule load_schedule(const std::filesystem::path& path) {
  return schedule_from_json(read_json_file(path));
}

namespace {

SimConfig sim_from_json(const json& j, TaskKind task) {
  SimConfig cfg;
  if (task == TaskKind::classification) {
    check_keys(j,
               {"n", "n_labels", "dirichlet_alpha", "ai_temperature", "ai_noise", "human_noise",
                "human_k", "label_support"},
               "sim");
    ClassificationSim c;
    if (j.contains("n_labels")) c.n_labels = as_count(j.at("n_labels"), "n_labels");
    if (j.contains("dirichlet_alpha")) c.dirichlet_alpha = as_number(j.at("dirichlet_alpha"), "dirichlet_alpha");
    if (j.contains("ai_temperature")) c.ai_temperature = as_number(j.at("ai_temperature"), "ai_temperature");
    if (j.contains("ai_noise")) c.ai_noise = as_number(j.at("ai_noise"), "ai_noise");
    if (j.contains("human_noise")) c.human_noise = as_number(j.at("human_noise"), "human_noise");
    if (j.contains("human_k")) c.human_k = as_count(j.at("human_k"), "human_k");
    if (j.contains("label_support")) {
      for (const auto& v : j.at("label_support")) c.label_support.push_back(static_cast<Label>(as_count(v, "label_support")));
    }
    cfg.task = c;
  } else {
    check_keys(j,
               {"n", "feature_dim", "noise_sd", "human_label_noise_sd", "base_width", "width_noise_sd"},
               "sim");
    RegressionSim r;
    if (j.contains("feature_dim")) r.feature_dim = as_count(j.at("feature_dim"), "feature_dim");
    if (j.contains("noise_sd")) r.noise_sd = as_number(j.at("noise_sd"), "noise_sd");
    if (j.contains("human_label_noise_sd")) r.human_label_noise_sd = as_number(j.at("human_label_noise_sd"), "human_label_noise_sd");
    if (j.contains("base_width")) r.base_width = as_number(j.at("base_width"), "base_width");
    if (j.contains("width_noise_sd")) r.width_noise_sd = as_number(j.at("width_noise_sd"), "width_noise_sd");
    cfg.task = r;
  }
  if (j.contains("n")) cfg.n = as_count(j.at("n"), "n");
  return cfg;
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  check_keys(j, {"task", "rates", "online", "sim", "schedule", "seed", "outputs"}, "run config");
  RunConfig cfg;
  try {
    if (j.contains("task")) {
      const auto task = j.at("task").get<std::string>();
      if (task == "classification") {
        cfg.task = TaskKind::classification;
      } else if (task == "regression") {
        cfg.task = TaskKind::regression;
      } else {
        throw FormatError("field 'task' must be classification or regression");
      }
    }
    if (j.contains("rates")) {
      const json& r = j.at("rates");
      check_keys(r, {"epsilon", "delta"}, "rates");
      cfg.rates = TargetRates(as_number(require(r, "epsilon", "rates"), "epsilon"),
                              as_number(require(r, "delta", "rates"), "delta"));
    }
    cfg.online.rates = cfg.rates;
    if (j.contains("online")) {
      const json& o = j.at("online");
      check_keys(o, {"eta", "init_a", "init_b", "score_bounds", "label_scale"}, "online");
      if (o.contains("eta")) cfg.online.eta = as_number(o.at("eta"), "eta");
      if (o.contains("init_a")) cfg.online.init_a = as_number(o.at("init_a"), "init_a");
      if (o.contains("init_b")) cfg.online.init_b = as_number(o.at("init_b"), "init_b");
      if (o.contains("label_scale")) {
        cfg.label_scale = as_number(o.at("label_scale"), "label_scale");
        cfg.online.bounds = ScoreBounds::from_label_scale(*cfg.label_scale);
      }
      if (o.contains("score_bounds")) {
        const auto b = as_numbers(o.at("score_bounds"), "score_bounds");
        if (b.size() != 2) throw FormatError("field 'score_bounds' must hold [lo, hi]");
        cfg.online.bounds = ScoreBounds(b[0], b[1]);
      }
      cfg.online.validate();
    }
    if (j.contains("seed")) cfg.seed = as_count(j.at("seed"), "seed");
    if (j.contains("sim")) cfg.sim = sim_from_json(j.at("sim"), cfg.task);
    else if (cfg.task == TaskKind::regression) cfg.sim.task = RegressionSim{};
    cfg.sim.seed = cfg.seed;
    cfg.sim.validate();
    if (j.contains("schedule")) cfg.schedule_path = j.at("schedule").get<std::string>();
    if (j.contains("outputs")) {
      for (const auto& [key, value] : j.at("outputs").items()) cfg.outputs[key] = value.get<std::string>();
    }
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("run config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg = run_config_from_json(read_json_file(path));
  // relative schedule paths are taken from the config's directory
  if (cfg.schedule_path && std::filesystem::path(*cfg.schedule_path).is_relative()) {
    cfg.schedule_path = (path.parent_path() / *cfg.schedule_path).string();
  }
  return cfg;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("write failed for " + path.string());
}

TargetRates parse_rates(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw FormatError("rates must be '<epsilon>,<delta>'");
  try {
    return TargetRates(std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1)));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("rates: ") + e.what());
  }
}

}  // namespace collab::io
