#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "collab/core.hpp"
#include "collab/online.hpp"
#include "collab/simulate.hpp"
#include "json.hpp"

namespace collab::io {

// Thrown for malformed input files; the message names the line (when there
// is one) and the offending field.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One JSONL line <-> one record. Classification lines carry
// {"id","probs","human_set","label"}; regression lines carry
// {"id","features","band"?,"human_lo","human_hi","human_empty"?,"label"}.
// "label" may be omitted for unlabeled records. Unknown fields are rejected.
Record record_from_json(const nlohmann::json& j);
nlohmann::json record_to_json(const Record& r);

std::vector<Record> load_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, std::span<const Record> records);

struct TraceTable {
  std::vector<TraceRow> rows;
  MetricSeries metrics;
};

// Header then one row per round: t, group, err, a_t, b_t, set_size and the
// four running metrics (missing group coverage is an empty cell). Numbers
// use 17 significant digits so reloads are exact.
void write_trace_csv(const std::filesystem::path& path, const StreamTrace& trace);
TraceTable read_trace_csv(const std::filesystem::path& path);

ShiftSchedule schedule_from_json(const nlohmann::json& j);
ShiftSchedule load_schedule(const std::filesystem::path& path);

struct RunConfig {
  TaskKind task = TaskKind::classification;
  TargetRates rates;
  OnlineConfig online;
  std::optional<double> label_scale;  // default score bounds are +-5 * scale
  SimConfig sim;
  std::optional<std::string> schedule_path;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> outputs;
};

RunConfig run_config_from_json(const nlohmann::json& j);
// A relative schedule path is resolved against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

// "0.1,0.3" -> TargetRates{0.1, 0.3}.
TargetRates parse_rates(const std::string& text);

}  // namespace collab::io
