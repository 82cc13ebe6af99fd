#include "securesense/gauss.hpp"

#include <algorithm>
#include <cmath>

namespace securesense {
namespace {

Eigen::SelfAdjointEigenSolver<Matrix> checked_eigen(const Matrix& M, const char* who) {
  if (M.rows() != M.cols()) throw DomainError(std::string(who) + ": matrix not square");
  const double norm = M.norm();
  if ((M - M.transpose()).norm() > 1e-9 * std::max(1.0, norm))
    throw DomainError(std::string(who) + ": matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(M));
  if (M.size() > 0 && eig.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, norm))
    throw DomainError(std::string(who) + ": matrix indefinite");
  return eig;
}

Matrix spectral_map(const Eigen::SelfAdjointEigenSolver<Matrix>& eig, const Vector& values) {
  const Matrix& U = eig.eigenvectors();
  return symmetrize(U * values.asDiagonal() * U.transpose());
}

}  // namespace

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

Matrix psd_sqrt(const Matrix& M) {
  auto eig = checked_eigen(M, "psd_sqrt");
  return spectral_map(eig, eig.eigenvalues().cwiseMax(0.0).cwiseSqrt());
}

Matrix psd_pinv_sqrt(const Matrix& M, double tol) {
  auto eig = checked_eigen(M, "psd_pinv_sqrt");
  const Vector& lam = eig.eigenvalues();
  const double cut = lam.size() ? tol * std::max(0.0, lam.maxCoeff()) : 0.0;
  Vector inv(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) inv(i) = (lam(i) > cut && lam(i) > 0.0) ? 1.0 / std::sqrt(lam(i)) : 0.0;
  return spectral_map(eig, inv);
}

Matrix psd_pinv(const Matrix& M, double tol) {
  auto eig = checked_eigen(M, "psd_pinv");
  const Vector& lam = eig.eigenvalues();
  const double cut = lam.size() ? tol * std::max(0.0, lam.maxCoeff()) : 0.0;
  Vector inv(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) inv(i) = (lam(i) > cut && lam(i) > 0.0) ? 1.0 / lam(i) : 0.0;
  return spectral_map(eig, inv);
}

Matrix CovarianceLadder::stacked() const {
  const int n = horizon();
  const auto m = A.rows();
  Matrix S = Matrix::Zero(n * m, n * m);
  for (int l = 1; l <= n; ++l) {
    Matrix block = at(l);  // A^{k-l} Sigma_l for k = l, l+1, ...
    for (int k = l; k <= n; ++k) {
      const auto rk = (n - k) * m;
      const auto rl = (n - l) * m;
      S.block(rk, rl, m, m) = block;
      S.block(rl, rk, m, m) = block.transpose();
      block = A * block;
    }
  }
  return S;
}

CovarianceLadder propagate_open_loop(const SystemModel& model) {
  CovarianceLadder ladder;
  ladder.A = model.A;
  ladder.sigma.reserve(static_cast<std::size_t>(model.horizon));
  Matrix S = symmetrize(model.Sigma1);
  for (int k = 1; k <= model.horizon; ++k) {
    ladder.sigma.push_back(S);
    S = symmetrize(model.A * S * model.A.transpose() + model.SigmaV);
  }
  return ladder;
}

EstimatorState initial_estimator_state(int m) { return {Vector::Zero(m), Matrix::Zero(m, m)}; }

namespace {

// Returns (gain, innovation covariance D) for one stage.
std::pair<Matrix, Matrix> stage_gain(const Matrix& A, const Matrix& Hprev, const Matrix& sigma, const Matrix& L,
                                     double tol) {
  const Matrix D = symmetrize(sigma - A * Hprev * A.transpose());
  const Matrix DL = D * L;
  return {DL * psd_pinv(symmetrize(L.transpose() * DL), tol), D};
}

}  // namespace

EstimatorState estimator_step(const EstimatorState& prev, const Matrix& L, const Vector& xo_proxy,
                              const CovarianceLadder& ladder, int k, double tol) {
  const Matrix& A = ladder.A;
  const auto m = A.rows();
  if (L.rows() != m || xo_proxy.size() != m || prev.xhat.size() != m || prev.H.rows() != m)
    throw InputError("estimator_step: dimension mismatch");
  if (k < 1 || k > ladder.horizon()) throw InputError("estimator_step: stage out of range");

  const auto [G, D] = stage_gain(A, prev.H, ladder.at(k), L, tol);
  const Vector pred = A * prev.xhat;
  EstimatorState next;
  next.xhat = pred + G * (L.transpose() * xo_proxy - L.transpose() * pred);
  next.H = symmetrize(A * prev.H * A.transpose() + G * L.transpose() * D);
  return next;
}

EstimatorSchedule::EstimatorSchedule(const CovarianceLadder& ladder, const GainSequence& gains, double tol)
    : A_(ladder.A), L_(gains) {
  const int n = ladder.horizon();
  if (static_cast<int>(gains.size()) != n) throw InputError("EstimatorSchedule: need one gain per stage");
  const auto m = A_.rows();
  Matrix H = Matrix::Zero(m, m);
  for (int k = 1; k <= n; ++k) {
    const Matrix& L = gains[static_cast<std::size_t>(k - 1)];
    if (L.rows() != m) throw InputError("EstimatorSchedule: gain has wrong row count");
    auto [G, D] = stage_gain(A_, H, ladder.at(k), L, tol);
    H = symmetrize(A_ * H * A_.transpose() + G * L.transpose() * D);
    G_.push_back(std::move(G));
    H_.push_back(H);
  }
}

Vector EstimatorSchedule::update(int k, const Vector& xhat_prev, const Vector& s) const {
  const Vector pred = A_ * xhat_prev;
  const Matrix& L = this->L(k);
  return pred + gain(k) * (s - L.transpose() * pred);
}

std::vector<Matrix> recursive_H(const CovarianceLadder& ladder, const GainSequence& gains, double tol) {
  return EstimatorSchedule(ladder, gains, tol).H();
}

std::vector<Matrix> batch_conditional_H(const SystemModel& model, const GainSequence& gains, double tol) {
  const int n = model.horizon;
  if (static_cast<int>(gains.size()) != n) throw InputError("batch_conditional_H: need one gain per stage");
  const CovarianceLadder ladder = propagate_open_loop(model);
  const auto m = model.A.rows();

  // Cov(x_k, x_j) for all k, j in time order (time-ascending here; only local).
  std::vector<std::vector<Matrix>> cross(static_cast<std::size_t>(n), std::vector<Matrix>(static_cast<std::size_t>(n)));
  for (int j = 1; j <= n; ++j) {
    Matrix block = ladder.at(j);
    for (int k = j; k <= n; ++k) {
      cross[k - 1][j - 1] = block;
      cross[j - 1][k - 1] = block.transpose();
      block = model.A * block;
    }
  }

  std::vector<Eigen::Index> offset(static_cast<std::size_t>(n) + 1, 0);
  for (int j = 1; j <= n; ++j) offset[j] = offset[j - 1] + gains[j - 1].cols();

  // Cov(s) and Cov(x_k, s) with s_j = L_j' x_j.
  Matrix Css = Matrix::Zero(offset[n], offset[n]);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      Css.block(offset[i - 1], offset[j - 1], gains[i - 1].cols(), gains[j - 1].cols()) =
          gains[i - 1].transpose() * cross[i - 1][j - 1] * gains[j - 1];

  std::vector<Matrix> H;
  H.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const Eigen::Index dim = offset[k];
    if (dim == 0) {
      H.push_back(Matrix::Zero(m, m));
      continue;
    }
    Matrix Cxs(m, dim);
    for (int j = 1; j <= k; ++j) Cxs.middleCols(offset[j - 1], gains[j - 1].cols()) = cross[k - 1][j - 1] * gains[j - 1];
    const Matrix Cs = symmetrize(Css.topLeftCorner(dim, dim));
    H.push_back(symmetrize(Cxs * psd_pinv(Cs, tol) * Cxs.transpose()));
  }
  return H;
}

}  // namespace securesense
