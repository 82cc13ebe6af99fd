#pragma once

#include <string>
#include <vector>

#include "securesense/gauss.hpp"
#include "securesense/model.hpp"
#include "securesense/riccati.hpp"
#include "securesense/scenarios.hpp"
#include "securesense/sdp.hpp"
#include "securesense/stacked.hpp"
#include "securesense/types.hpp"

namespace securesense {

/// Quadratic-form data of one scenario's sensor cost J(H) = tr(Hhat Pi) + PiO - G.
struct ScenarioCoefficients {
  Matrix Pi;              ///< nm x nm
  double PiO = 0.0;       ///< includes G
  double G = 0.0;         ///< constant of the cut horizon, excluded from J_S
  std::vector<Matrix> V;  ///< stage weights folded from Pi
};

/// mu-weighted mixture over a scenario set.
struct ObjectiveCoefficients {
  Matrix Pi;
  double PiO = 0.0;
  double G = 0.0;  ///< sum of mu G over scenarios
  std::vector<Matrix> V;

  /// mu-average J_S of a design with second moments H: sum tr(V_k H_k) + PiO - G.
  [[nodiscard]] double cost(const std::vector<Matrix>& H) const;
};

[[nodiscard]] ScenarioCoefficients scenario_coefficients(const ScenarioOperator& op, const ControlLawBank& bank,
                                                         const CovarianceLadder& ladder);

/// V_k = Pi_kk + sum_{l>k} (Pi_kl A^{l-k} + (A^{l-k})' Pi_lk), blocks indexed by time.
[[nodiscard]] std::vector<Matrix> stage_weights(const Matrix& Pi, const Matrix& A, int n);

[[nodiscard]] ObjectiveCoefficients assemble_objective(const ScenarioSet& set,
                                                       const std::vector<ScenarioCoefficients>& terms,
                                                       const Matrix& A);

/// Everything a design or evaluation needs about (model, objectives, scenarios).
struct PreparedProblem {
  ControlLawBank bank;
  ScenarioSet set;
  CovarianceLadder ladder;
  std::vector<ScenarioOperator> operators;
  std::vector<ScenarioCoefficients> terms;
  ObjectiveCoefficients coefficients;

  [[nodiscard]] const SystemModel& model() const { return bank.model(); }
  [[nodiscard]] ChainedSdpProblem sdp_problem() const;
  /// Same scenarios and operators under a different measure.
  [[nodiscard]] PreparedProblem with_measure(const MeasureSpec& measure) const;
};

[[nodiscard]] PreparedProblem prepare_problem(const SystemModel& model, const FriendlyObjective& objective,
                                              const std::vector<AttackerSpec>& attackers, ScenarioSet set);

struct ExtractionOptions {
  double rounding_threshold = 0.5;
  double warn_low = 0.1;
  double warn_high = 0.9;
  double max_idempotency_defect = 0.05;
  double pinv_tolerance = kPinvTolerance;
};

/// Eigen data of P_k = D_k^{+1/2} (S_k - A S_{k-1} A') D_k^{+1/2}.
struct StageProjection {
  Matrix D;
  Matrix P;
  Vector eigenvalues;            ///< before rounding, ascending
  double idempotency_defect = 0; ///< ||P^2 - P||_F before rounding
  int rank = 0;
};

struct Certification {
  bool passed = false;
  std::string method;          ///< "batch" or "recursion"
  double max_relative_error = 0;  ///< max_k ||H_k - S_k||_F / ||Sigma_k||_F
  double achieved_objective = 0;  ///< sum tr(V_k H_k)
  double sdp_objective = 0;
  double lower_bound = 0;
};

struct SensorDesign {
  GainSequence gains;
  std::vector<Matrix> S;
  std::vector<StageProjection> projections;
  std::vector<int> ranks;
  std::vector<std::string> warnings;
  SdpStats sdp;
  Certification certification;
};

/// Rounds each P_k at the threshold and forms L_k = D_k^{+1/2} U_k Lambda_k.
/// Throws NumericalError when some P_k is far from idempotent.
[[nodiscard]] SensorDesign extract_gains(const SdpSolution& solution, const CovarianceLadder& ladder,
                                         const ExtractionOptions& options = {});

struct DesignOptions {
  /// Tighter than the solver defaults: certification compares H with S to
  /// 1e-6, and at n = 100 a 1e-8 gap leaves S off the vertex by more than that.
  /// The larger tie-break keeps degenerate directions strictly complementary.
  SdpOptions sdp{1e-12, 100, 1e-4};
  ExtractionOptions extraction;
  double certification_tolerance = 1e-6;
  /// Batch conditioning is used for certification up to this n*m, the recursion beyond.
  int batch_certification_limit = 400;
  std::string backend = "interior-point";
};

/// Compares H(gains) with S; does not throw.
[[nodiscard]] Certification certify(const SensorDesign& design, const SystemModel& model,
                                    const CovarianceLadder& ladder, const std::vector<Matrix>& V,
                                    const DesignOptions& options);

class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SDP, extraction and certification for a prepared problem. Throws
/// CertificationError when H(gains) misses S by more than the tolerance.
[[nodiscard]] SensorDesign secure_sensor_design(const PreparedProblem& problem, const DesignOptions& options = {});

}  // namespace securesense
