#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "securesense/design.hpp"
#include "securesense/evaluate.hpp"
#include "securesense/io.hpp"
#include "securesense/model.hpp"
#include "securesense/scenarios.hpp"

namespace securesense::cli {

/// Either every case from the slot enumeration or an explicit list.
struct CaseSpec {
  std::string name;
  std::vector<Agent> theta;
  std::optional<double> mu;
};

struct ScenarioConfig {
  int delta = 0;
  /// Attackers that may infiltrate in the enumeration; defaults to all defined.
  std::optional<int> attackers;
  MeasureSpec measure = NoInfiltrationMass{0.7};
  /// Measure the designer believes in; evaluation always uses `measure`.
  std::optional<MeasureSpec> design_measure;
  std::vector<CaseSpec> cases;
};

struct EvaluationSettings {
  int trials = 0;
  std::uint64_t seed = 1;
  int threads = 1;
  double tol_sdp = DesignOptions{}.sdp.tolerance;
  double tol_pinv = kPinvTolerance;
  /// Leading trials written as per-stage rows; zero writes none.
  int trace_trials = 0;
};

struct ExperimentConfig {
  SystemModel model;
  FriendlyObjective objective;
  std::vector<AttackerSpec> attackers;
  ScenarioConfig scenarios;
  EvaluationSettings evaluation;
  std::string output = "out";
  /// Where the model came from, for the manifest: "inline", "generator" or "reference".
  std::string model_source;
};

/// Parses a config document. Every error is an InputError naming the field path.
[[nodiscard]] ExperimentConfig parse_config(const io::Json& doc);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Inline form of a config; parse_config(to_json(c)) reproduces c exactly.
[[nodiscard]] io::Json config_to_json(const ExperimentConfig& config);

[[nodiscard]] MeasureSpec parse_measure(const io::Reader& r);
[[nodiscard]] io::Json measure_to_json(const MeasureSpec& measure);

/// Scenario set of a config, measures applied.
[[nodiscard]] ScenarioSet build_scenarios(const ExperimentConfig& config);

/// Shape and assumption checks beyond what the parser enforces.
[[nodiscard]] ValidationReport check_config(const ExperimentConfig& config);

/// Two-adversary benchmark instance with the enumerated slot scenarios.
[[nodiscard]] ExperimentConfig reference_config(std::uint64_t seed, int n, int m, int r, int delta, int attackers);

}  // namespace securesense::cli
