#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustboot/measure.hpp"
#include "robustboot/robustness.hpp"

namespace robustboot {

/// Measure file rows: point coordinates (1..3 columns) then the weight.
/// Lines starting with '#' are comments. Parse failures throw DomainError
/// with the offending line number.
struct MeasureFile {
  std::size_t dims = 1;
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};

MeasureFile read_measure_csv(const std::string& path);
void write_measure_csv(const std::string& path, const MeasureFile& mf);

/// Sample path CSV: header "index,value" (or value_0..value_{d-1}).
SamplePath<double> read_path_csv(const std::string& path);
void write_path_csv(const std::string& path, const SamplePath<double>& p);

struct TraceRow {
  std::size_t rep = 0;
  std::size_t position = 0;
  std::size_t source_index = 0;
};
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);

/// JSON <-> config. The text format is plain nested key/value tables; see
/// configs/ for worked examples.
ProcessSpec parse_process_spec_json(const std::string& json_text);
ExperimentConfig parse_experiment_config_json(const std::string& json_text);
std::string experiment_config_to_json(const ExperimentConfig& config);

std::string report_to_json(const RobustnessReport& report);
void write_report_json(const std::string& path, const RobustnessReport& report);
void write_report_csv(const std::string& path, const RobustnessReport& report);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// FNV-1a 64-bit content hash, hex encoded; used in run manifests.
std::string content_hash_hex(const std::string& text);

struct RunManifest {
  std::string config_path;
  std::string config_hash;
  std::string tool_version;
  std::uint64_t master_seed = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;
};

std::string manifest_to_json(const RunManifest& manifest);

/// Fixed 9-decimal rendering used by all CLI numeric output.
std::string format_fixed9(double v);

}  // namespace robustboot
