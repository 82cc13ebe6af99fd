#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "securesense/design.hpp"
#include "securesense/gauss.hpp"
#include "securesense/scenarios.hpp"
#include "securesense/stacked.hpp"
#include "securesense/types.hpp"

namespace securesense {

enum class BaselineKind { Classical, NoSensor };

/// Classical discloses the state (L_k = I); no-sensor discloses nothing (L_k = 0).
[[nodiscard]] GainSequence baseline_design(BaselineKind kind, const SystemModel& model);

/// E{xhat^o (xhat^o)'} in time-descending blocks: H_k on the diagonal,
/// H_k (A^{l-k})' at (k, l) for l > k.
[[nodiscard]] Matrix stacked_estimate_moment(const std::vector<Matrix>& H, const Matrix& A);

/// J_S of one scenario from the trace formula with the explicit stacked moment.
[[nodiscard]] double analytic_cost(const std::vector<Matrix>& H, const ScenarioOperator& op,
                                   const ControlLawBank& bank, const CovarianceLadder& ladder);

struct SimulationOptions {
  int trials = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  double pinv_tolerance = kPinvTolerance;
  /// Record Phi_S u - (Xi xhat^o + xi) per trial.
  bool check_operator_identity = false;
  /// Number of leading trials whose per-stage rows are kept.
  int trace_trials = 0;
};

struct TraceRow {
  int trial = 0;
  int k = 0;
  Agent agent;
  Vector x;
  Vector s;
  Vector u;
  Vector y;  ///< D u + w; empty without a control-observation channel
};

struct SimulationResult {
  int trials = 0;
  double mean = 0.0;       ///< sum_k ||u_k + K_S,k x_k||^2_Delta, expectation J_S
  double std_error = 0.0;
  double raw_mean = 0.0;   ///< sum_k ||x_{k+1}||^2_Q + ||u_k||^2_R over the cut horizon
  double raw_std_error = 0.0;
  double max_identity_error = 0.0;  ///< relative, max over trials
  std::vector<Vector> mean_state;   ///< E x_k for k = 1..nT+1
  std::vector<TraceRow> trace;
};

/// Monte Carlo of the causal closed loop. Trial i draws from a generator
/// seeded by (seed, i), so results do not depend on the thread count.
[[nodiscard]] SimulationResult simulate_closed_loop(const GainSequence& gains, const JumpScenario& scenario,
                                                    const ScenarioOperator& op, const ControlLawBank& bank,
                                                    const CovarianceLadder& ladder, const SimulationOptions& options);

struct EvaluationRow {
  std::string scenario;
  double mu = 0.0;
  int nT = 0;
  double analytic = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
};

struct EvaluationReport {
  std::string tag;  ///< secure | classical | no-sensor | custom name
  std::vector<EvaluationRow> rows;
  double average_analytic = 0.0;
  double average_empirical = 0.0;
  bool has_empirical = false;
};

struct NamedDesign {
  std::string tag;
  GainSequence gains;
};

struct EvaluationConfig {
  /// Zero skips Monte Carlo.
  int trials = 0;
  std::uint64_t seed = 1;
  int threads = 1;
  double pinv_tolerance = kPinvTolerance;
};

[[nodiscard]] EvaluationReport evaluate_design(const NamedDesign& design, const PreparedProblem& problem,
                                               const EvaluationConfig& config);

[[nodiscard]] std::vector<EvaluationReport> compare(const std::vector<NamedDesign>& designs,
                                                    const PreparedProblem& problem, const EvaluationConfig& config);

}  // namespace securesense
