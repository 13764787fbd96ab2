#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minatt/json_io.hpp"

namespace minatt {

enum class ExperimentKind { Perturb, Gap, Spectrum, Weyl };

std::string_view to_string(ExperimentKind k);

struct Experiment {
  std::string name;
  ExperimentKind kind = ExperimentKind::Perturb;
  std::vector<std::string> targets;
  std::optional<double> epsilon;
  /// Prefix length; falls back to the run-wide default.
  std::optional<std::size_t> truncation;
  double tolerance = 1e-8;
  /// perturb: auto | positive | general | bounded_below. gap: auto | graph | closed_form | diagonal.
  std::string method = "auto";
  /// Optional expected outputs checked against the run (caseTag, witnessIndex, value, ...).
  Json expected;
};

struct ScenarioConfig {
  std::map<std::string, OperatorRep> operators;
  /// Operator specs as written, echoed into the report.
  Json operator_specs = Json::object();
  std::vector<Experiment> experiments;
};

struct RunOptions {
  std::size_t truncation = kDefaultPrefix;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct ExperimentOutcome {
  Json record;  // name, kind, inputs, outputs, checks, value, pass, error
  bool pass = false;
  double seconds = 0.0;
};

struct Report {
  std::vector<ExperimentOutcome> experiments;

  std::size_t passed() const;
  std::size_t failed() const;
  bool all_passed() const { return failed() == 0; }

  /// Deterministic payload; wall times sit in a separate "wallTimes" field.
  Json to_json() const;
  static Report from_json(const Json& j);
};

/// Throws ConfigError on any validation problem.
ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::string& path);

/// Runs experiments in config order; per-experiment failures are recorded, not thrown.
Report run_scenario(const ScenarioConfig& config, const RunOptions& opts = {});

enum class ReportFormat { Json, Csv };

std::string render_report(const Report& report, ReportFormat format);
/// Empty path writes to stdout. Throws IoError when the file cannot be written.
void emit_report(const Report& report, ReportFormat format, const std::string& path);

}  // namespace minatt
