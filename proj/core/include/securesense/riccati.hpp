#pragma once

#include <vector>

#include "securesense/model.hpp"
#include "securesense/types.hpp"

namespace securesense {

/// Completion-of-squares tables of the friendly cost
/// sum_k ||x_{k+1}||^2_QF + ||u_k||^2_RF. Vectors are indexed by k-1.
struct FriendlyTables {
  std::vector<Matrix> Qcheck;  ///< n+1 entries, Qcheck[n] = QF
  std::vector<Matrix> Delta;   ///< n entries
  std::vector<Matrix> K;       ///< n entries, r x m
  double G = 0.0;

  [[nodiscard]] int horizon() const { return static_cast<int>(K.size()); }
  [[nodiscard]] const Matrix& K_at(int k) const { return K.at(static_cast<std::size_t>(k - 1)); }
  [[nodiscard]] const Matrix& Delta_at(int k) const { return Delta.at(static_cast<std::size_t>(k - 1)); }
  [[nodiscard]] const Matrix& Qcheck_at(int k) const { return Qcheck.at(static_cast<std::size_t>(k - 1)); }
};

[[nodiscard]] FriendlyTables friendly_tables(const SystemModel& model, const FriendlyObjective& objective);

/// Partition of the attacker's augmented state [x; u_F,n; ...; u_F,1; z].
struct AugmentedLayout {
  int m = 0;
  int r = 0;
  int n = 0;

  [[nodiscard]] int dim() const { return 2 * m + n * r; }
  /// Column offset of the friendly input slot for time k.
  [[nodiscard]] int slot(int k) const { return m + (n - k) * r; }
  [[nodiscard]] int z_offset() const { return m + n * r; }
};

/// Riccati tables of one attacker on the augmented state. The gains do not
/// depend on the infiltration time or on z.
struct AdversarialTables {
  AugmentedLayout layout;
  Matrix Qbar;
  std::vector<Matrix> Qcheck;  ///< n+1 entries, Qcheck[n] = Qbar
  std::vector<Matrix> Delta;   ///< n entries
  std::vector<Matrix> K;       ///< n entries, r x dim

  [[nodiscard]] const Matrix& K_at(int k) const { return K.at(static_cast<std::size_t>(k - 1)); }
  [[nodiscard]] const Matrix& Delta_at(int k) const { return Delta.at(static_cast<std::size_t>(k - 1)); }
};

[[nodiscard]] Matrix augmented_weight(const FriendlyObjective& objective, const AttackerSpec& attacker, int n,
                                      int r);

/// Dense augmented maps, for checks on small instances.
[[nodiscard]] Matrix augmented_A(const SystemModel& model, int k);
[[nodiscard]] Matrix augmented_B(const SystemModel& model);
[[nodiscard]] Matrix augmented_E(const SystemModel& model);

/// Riccati recursion with the time-varying augmented A_k applied blockwise.
[[nodiscard]] AdversarialTables adversarial_tables(const SystemModel& model, const FriendlyObjective& objective,
                                                   const AttackerSpec& attacker);

/// Same recursion using dense augmented products; O(n^4) in the horizon.
[[nodiscard]] AdversarialTables adversarial_tables_dense(const SystemModel& model, const FriendlyObjective& objective,
                                                         const AttackerSpec& attacker);

/// Friendly tables seen from a horizon cut at nT: stage k uses index k + n - nT.
struct SensorTables {
  int nT = 0;
  int shift = 0;
  const FriendlyTables* friendly = nullptr;

  [[nodiscard]] const Matrix& K_at(int k) const { return friendly->K_at(k + shift); }
  [[nodiscard]] const Matrix& Delta_at(int k) const { return friendly->Delta_at(k + shift); }
  /// Constant term of the truncated cost, excluded from J_S.
  [[nodiscard]] double G(const Matrix& Sigma1, const Matrix& SigmaV, const Matrix& QF) const;
};

[[nodiscard]] SensorTables truncated_sensor_tables(const FriendlyTables& friendly, int nT);

}  // namespace securesense
