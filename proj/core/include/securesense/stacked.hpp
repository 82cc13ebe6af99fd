#pragma once

#include <map>
#include <utility>
#include <vector>

#include "securesense/model.hpp"
#include "securesense/riccati.hpp"
#include "securesense/scenarios.hpp"
#include "securesense/types.hpp"

namespace securesense {

// Every stacked vector and block matrix here is ordered time-descending: the
// block for time k sits at block index n - k (time n on top).

/// Block index of time k in a time-descending stack of length n.
[[nodiscard]] constexpr int block_index(int k, int n) { return n - k; }

/// Solves Phi X = rhs for a unit block upper-triangular Phi with r x r blocks.
[[nodiscard]] Matrix solve_unit_block_upper(const Matrix& Phi, const Matrix& rhs, int r);

struct FriendlyStack {
  int n = 0;
  int m = 0;
  int r = 0;
  Matrix PhiF;  ///< nr x nr
  Matrix KF;    ///< nr x nm block diagonal
  Matrix TF;    ///< nr x nm, PhiF^{-1} KF
};

[[nodiscard]] FriendlyStack build_friendly_stack(const SystemModel& model, const FriendlyTables& tables);

/// nm x nr; block (k, j) = A^{k-1-j} B for j < k.
[[nodiscard]] Matrix build_psi(const SystemModel& model);
/// m x nm indicator of time k.
[[nodiscard]] Matrix indicator(int k, int n, int m);
/// nm x nm selector mapping xhat^o to (E{xhat_l | s_1..k})_l: A^{l-k} xhat_k for l >= k, xhat_l for l < k.
[[nodiscard]] Matrix conditioning_selector(const Matrix& A, int n, int k);
/// Dense F_k, (2m + nr) x nm.
[[nodiscard]] Matrix build_F_k(const SystemModel& model, const FriendlyStack& fstack, int k);
/// Dense F^(kappa) stacking F_n .. F_kappa.
[[nodiscard]] Matrix build_F_kappa(const SystemModel& model, const FriendlyStack& fstack, int kappa);

/// Per-attacker quantities that do not depend on the infiltration time.
struct AdversaryRows {
  int n = 0;
  int r = 0;
  Matrix PhiA1;              ///< Phi_A^(1), nr x nr
  std::vector<Matrix> KF_k;  ///< K_A,k F_k, r x nm (index k-1)
  std::vector<Vector> Kz_k;  ///< K_A,k (0; 0; z), r (index k-1)
};

[[nodiscard]] AdversaryRows build_adversary_rows(const SystemModel& model, const AdversarialTables& tables,
                                                 const FriendlyStack& fstack, const Vector& z);

/// Attacker control law from infiltration time kappa: u = -TA xhat^o - ZA
/// over the times n..kappa.
struct AdversaryStack {
  int kappa = 1;
  Matrix PhiA;  ///< (n-kappa+1) r square
  Matrix TA;    ///< (n-kappa+1) r x nm
  Vector ZA;
};

[[nodiscard]] AdversaryStack build_adversary_stack(const AdversaryRows& rows, const FriendlyStack& fstack, int kappa);

/// Same law from dense augmented products, dense F^(kappa) and an explicit
/// inverse. Intended for small instances.
[[nodiscard]] AdversaryStack build_adversary_stack_dense(const SystemModel& model, const AdversarialTables& tables,
                                                         const FriendlyStack& fstack, int kappa, const Vector& z);

/// Control laws of every agent, with attacker stacks cached per (attacker, kappa).
class ControlLawBank {
 public:
  ControlLawBank(const SystemModel& model, const FriendlyObjective& objective, std::vector<AttackerSpec> attackers);

  [[nodiscard]] const SystemModel& model() const { return model_; }
  [[nodiscard]] const FriendlyObjective& objective() const { return objective_; }
  [[nodiscard]] const std::vector<AttackerSpec>& attackers() const { return attackers_; }
  [[nodiscard]] const FriendlyTables& friendly_tables() const { return ftables_; }
  [[nodiscard]] const FriendlyStack& friendly_stack() const { return fstack_; }
  [[nodiscard]] const AdversarialTables& adversarial_tables(int attacker) const;
  [[nodiscard]] const AdversaryRows& adversary_rows(int attacker) const;

  /// Builds (or returns the cached) stack for attacker i (1-based) from kappa.
  const AdversaryStack& adversary_stack(int attacker, int kappa);
  /// Prebuilds every stack a scenario set refers to.
  void prepare(const ScenarioSet& set);
  /// Read-only lookup; throws if the stack was not prepared.
  [[nodiscard]] const AdversaryStack& prepared_stack(int attacker, int kappa) const;

 private:
  SystemModel model_;
  FriendlyObjective objective_;
  std::vector<AttackerSpec> attackers_;
  FriendlyTables ftables_;
  FriendlyStack fstack_;
  std::vector<AdversarialTables> atables_;
  std::vector<AdversaryRows> arows_;
  std::map<std::pair<int, int>, AdversaryStack> stacks_;
};

struct ScenarioOperator {
  int nT = 0;
  Matrix T;   ///< nT r x nm
  Vector Z;   ///< nT r
  Matrix Xi;  ///< nT r x nm
  Vector xi;  ///< nT r
};

/// Stacks the in-charge agent's rows per segment and maps them through the
/// truncated Phi_F: u^{o*} = Xi xhat^o + xi.
[[nodiscard]] ScenarioOperator build_scenario_operator(const JumpScenario& scenario, const ControlLawBank& bank);

/// Top-left nT r block of Phi_F (the sensor's transform on the cut horizon).
[[nodiscard]] Matrix sensor_phi(const FriendlyStack& fstack, int nT);

}  // namespace securesense
