#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "securesense/cli/config.hpp"
#include "securesense/evaluate.hpp"

namespace securesense::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kInputError = 2 };

/// Flag overrides shared by the commands. Unset fields keep the config values.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  std::optional<double> tol_sdp;
  std::optional<double> tol_pinv;
  std::optional<int> threads;
};

void apply(const Overrides& o, ExperimentConfig& config);
[[nodiscard]] DesignOptions design_options(const ExperimentConfig& config);
[[nodiscard]] EvaluationConfig evaluation_config(const ExperimentConfig& config);

/// One ordering assertion of a reproduction run.
struct Check {
  std::string name;
  bool passed = false;
  std::string expected;
  std::string actual;
};

/// Ordering checks between the secure, classical and no-sensor reports.
[[nodiscard]] std::vector<Check> scenario1_checks(const EvaluationReport& secure, const EvaluationReport& classical,
                                                  const EvaluationReport& none);

/// Delimiter-separated comparison: one row per scenario plus an average row,
/// full precision.
void write_comparison_csv(std::ostream& os, const std::vector<EvaluationReport>& reports);
/// Human table rounded to one decimal.
void print_comparison(std::ostream& os, const std::vector<EvaluationReport>& reports);

/// Entry point behind main(); returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace securesense::cli
