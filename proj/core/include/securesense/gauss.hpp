#pragma once

#include <vector>

#include "securesense/model.hpp"
#include "securesense/types.hpp"

namespace securesense {

/// Relative cutoff used for every pseudo-inverse: eigenvalues at or below
/// tol * lambda_max are treated as zero.
inline constexpr double kPinvTolerance = 1e-10;

/// (M + M') / 2.
[[nodiscard]] Matrix symmetrize(const Matrix& M);

/// Unique PSD square root. Throws DomainError on asymmetric or clearly
/// indefinite input; small negative eigenvalues are clamped.
[[nodiscard]] Matrix psd_sqrt(const Matrix& M);

/// Pseudo-inverse square root of a PSD matrix.
[[nodiscard]] Matrix psd_pinv_sqrt(const Matrix& M, double tol = kPinvTolerance);

/// Moore-Penrose pseudo-inverse of a PSD matrix.
[[nodiscard]] Matrix psd_pinv(const Matrix& M, double tol = kPinvTolerance);

/// Open-loop second moments Sigma_k^o, k = 1..n (index k-1).
struct CovarianceLadder {
  std::vector<Matrix> sigma;
  Matrix A;

  [[nodiscard]] int horizon() const { return static_cast<int>(sigma.size()); }
  [[nodiscard]] const Matrix& at(int k) const { return sigma.at(static_cast<std::size_t>(k - 1)); }
  /// Stacked covariance of (x_n^o, ..., x_1^o); block (k, l) is A^{k-l} Sigma_l^o for k >= l.
  [[nodiscard]] Matrix stacked() const;
};

[[nodiscard]] CovarianceLadder propagate_open_loop(const SystemModel& model);

struct EstimatorState {
  Vector xhat;
  Matrix H;
};

/// Zero estimate and zero second moment, the prior before stage 1.
[[nodiscard]] EstimatorState initial_estimator_state(int m);

/// One causal MMSE update with the noiseless measurement L_k' x_k^o.
/// `xo_proxy` is x_k^o itself or any vector equal to it after the caller has
/// removed the measurable control offsets; only L_k' xo_proxy is used.
[[nodiscard]] EstimatorState estimator_step(const EstimatorState& prev, const Matrix& L, const Vector& xo_proxy,
                                            const CovarianceLadder& ladder, int k, double tol = kPinvTolerance);

/// Gains G_k = D_k L_k (L_k' D_k L_k)^+ and second moments H_k for a fixed gain
/// sequence, precomputed once and reused by every simulated path.
class EstimatorSchedule {
 public:
  EstimatorSchedule(const CovarianceLadder& ladder, const GainSequence& gains, double tol = kPinvTolerance);

  /// xhat_k = A xhat_{k-1} + G_k (s_k - L_k' A xhat_{k-1}), with s_k = L_k' x_k^o.
  [[nodiscard]] Vector update(int k, const Vector& xhat_prev, const Vector& s) const;

  [[nodiscard]] const std::vector<Matrix>& H() const { return H_; }
  [[nodiscard]] const Matrix& gain(int k) const { return G_.at(static_cast<std::size_t>(k - 1)); }
  [[nodiscard]] const Matrix& L(int k) const { return L_.at(static_cast<std::size_t>(k - 1)); }

 private:
  Matrix A_;
  std::vector<Matrix> L_;
  std::vector<Matrix> G_;
  std::vector<Matrix> H_;
};

/// H_k from the recursion H_k = A H_{k-1} A' + D L (L'DL)^+ L' D.
[[nodiscard]] std::vector<Matrix> recursive_H(const CovarianceLadder& ladder, const GainSequence& gains,
                                              double tol = kPinvTolerance);

/// H_k by conditioning x_k^o on the joint Gaussian vector (s_1, ..., s_k);
/// independent of the recursion and cubic in n*m.
[[nodiscard]] std::vector<Matrix> batch_conditional_H(const SystemModel& model, const GainSequence& gains,
                                                      double tol = kPinvTolerance);

}  // namespace securesense
