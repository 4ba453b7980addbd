// experiment.hpp - seeded experiment runner behind the command line tool.
//
// A config names a command, its parameters (strings, validated per command
// before anything runs), a seed, an output path and tolerance overrides.
// Single runs are emitted as JSON, sweeps and tables as CSV; floats in CSV
// carry 17 significant digits and JSON numbers round-trip exactly.

#pragma once

#include "acnum/random.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace acnum {

/// Invalid command line or config (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Records of different commands or measurement sets passed to report().
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { GapSearch, WitnessAudit, DeformCheck, DimBounds, Reduction, Nearcomm, Invariants };

std::string command_name(Command c);
/// Throws UsageError on an unknown name.
Command parse_command(const std::string& name);

struct ExperimentConfig {
  Command command = Command::Invariants;
  std::map<std::string, std::string> params;
  Seed seed{1};
  std::string out_path;
  std::map<std::string, double> tolerances;
};

struct Measurement {
  std::string name;
  std::variant<double, std::int64_t> value;

  double as_double() const;
  friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct PassFlag {
  std::string name;
  bool ok = false;
  friend bool operator==(const PassFlag&, const PassFlag&) = default;
};

struct ExperimentRecord {
  ExperimentConfig config;
  std::vector<Measurement> measurements;
  std::vector<PassFlag> pass_flags;
  double wall_time = 0.0;

  /// Table emitted as CSV (witness-audit, dim-bounds, reduction); empty otherwise.
  std::vector<std::string> table_header;
  std::vector<std::vector<std::string>> table_rows;

  bool all_pass() const;
  const Measurement* find(const std::string& name) const;
};

/// Tolerances each command accepts, with their defaults.
std::map<std::string, double> default_tolerances(Command c);

/// Checks parameter names and values and tolerance keys; throws UsageError.
void validate(const ExperimentConfig& config);

/// Validates, runs deterministically for the seed and writes the output file
/// when out_path is set (CSV for table commands, JSON otherwise).
ExperimentRecord run(const ExperimentConfig& config);

/// 0 when every pass flag holds, 1 otherwise.
int exit_code(const ExperimentRecord& r);

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentRecord& r);
ExperimentRecord record_from_json(const nlohmann::json& j);

/// JSON written for single-run commands (the command's own output fields).
nlohmann::json output_json(const ExperimentRecord& r);
/// CSV of the record's table.
std::string table_csv(const ExperimentRecord& r);

/// "%.17g"
std::string format_double(double x);

struct ReportOutput {
  std::string csv;
  /// "x y" lines; empty unless both columns were requested.
  std::string plot;
};

/// One CSV row per record: command, seed, parameters, measurements.
/// Records must share command, parameter names and measurement names.
/// An empty input gives the header-only CSV "command,seed".
ReportOutput report(const std::vector<ExperimentRecord>& records, const std::string& x_column = "",
                    const std::string& y_column = "");

}  // namespace acnum
