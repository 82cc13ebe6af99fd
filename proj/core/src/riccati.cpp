#include "securesense/riccati.hpp"

#include "securesense/gauss.hpp"

namespace securesense {

FriendlyTables friendly_tables(const SystemModel& model, const FriendlyObjective& objective) {
  const int n = model.horizon;
  const Matrix& A = model.A;
  const Matrix& B = model.B;
  FriendlyTables t;
  t.Qcheck.resize(static_cast<std::size_t>(n) + 1);
  t.Delta.resize(static_cast<std::size_t>(n));
  t.K.resize(static_cast<std::size_t>(n));
  t.Qcheck[n] = symmetrize(objective.QF);

  for (int k = n; k >= 1; --k) {
    const Matrix& Qn = t.Qcheck[k];
    const Matrix BtQ = B.transpose() * Qn;
    Matrix Delta = symmetrize(BtQ * B + objective.RF);
    Eigen::LLT<Matrix> llt(Delta);
    if (llt.info() != Eigen::Success) throw NumericalError("friendly_tables: Delta not positive definite");
    Matrix K = llt.solve(BtQ * A);
    // Q + A'(Q - Q B Delta^-1 B' Q) A, with B'QA = Delta K.
    t.Qcheck[k - 1] = symmetrize(objective.QF + A.transpose() * Qn * A - (BtQ * A).transpose() * K);
    t.Delta[k - 1] = std::move(Delta);
    t.K[k - 1] = std::move(K);
  }

  t.G = (model.Sigma1 * (t.Qcheck[0] - objective.QF)).trace();
  for (int k = 1; k <= n; ++k) t.G += (model.SigmaV * t.Qcheck[k]).trace();
  return t;
}

Matrix augmented_weight(const FriendlyObjective& objective, const AttackerSpec& attacker, int n, int r) {
  const auto m = objective.QF.rows();
  const AugmentedLayout lay{static_cast<int>(m), r, n};
  Matrix Q = Matrix::Zero(lay.dim(), lay.dim());
  Q.topLeftCorner(m, m) = attacker.QA + attacker.lambda * objective.QF;
  Q.block(0, lay.z_offset(), m, m) = -attacker.QA;
  Q.block(lay.z_offset(), 0, m, m) = -attacker.QA;
  Q.bottomRightCorner(m, m) = attacker.QA;
  return symmetrize(Q);
}

Matrix augmented_A(const SystemModel& model, int k) {
  const AugmentedLayout lay{model.state_dim(), model.input_dim(), model.horizon};
  Matrix Ab = Matrix::Identity(lay.dim(), lay.dim());
  Ab.topLeftCorner(lay.m, lay.m) = model.A;
  Ab.block(0, lay.slot(k), lay.m, lay.r) = model.B;
  return Ab;
}

Matrix augmented_B(const SystemModel& model) {
  const AugmentedLayout lay{model.state_dim(), model.input_dim(), model.horizon};
  Matrix Bb = Matrix::Zero(lay.dim(), lay.r);
  Bb.topRows(lay.m) = model.B;
  return Bb;
}

Matrix augmented_E(const SystemModel& model) {
  const AugmentedLayout lay{model.state_dim(), model.input_dim(), model.horizon};
  Matrix E = Matrix::Zero(lay.dim(), lay.m);
  E.topRows(lay.m).setIdentity();
  return E;
}

namespace {

// X -> X Abar_k: only the state columns and the slot-k columns change.
void right_multiply_Abar(Matrix& X, const Matrix& A, const Matrix& B, const AugmentedLayout& lay, int k) {
  const Matrix Xx = X.leftCols(lay.m);
  X.middleCols(lay.slot(k), lay.r) += Xx * B;
  X.leftCols(lay.m) = Xx * A;
}

// X -> Abar_k' X: only the state rows and the slot-k rows change.
void left_multiply_AbarT(Matrix& X, const Matrix& A, const Matrix& B, const AugmentedLayout& lay, int k) {
  const Matrix Xx = X.topRows(lay.m);
  X.middleRows(lay.slot(k), lay.r) += B.transpose() * Xx;
  X.topRows(lay.m) = A.transpose() * Xx;
}

AdversarialTables init_tables(const SystemModel& model, const FriendlyObjective& objective,
                              const AttackerSpec& attacker) {
  AdversarialTables t;
  t.layout = {model.state_dim(), model.input_dim(), model.horizon};
  t.Qbar = augmented_weight(objective, attacker, model.horizon, model.input_dim());
  t.Qcheck.resize(static_cast<std::size_t>(model.horizon) + 1);
  t.Delta.resize(static_cast<std::size_t>(model.horizon));
  t.K.resize(static_cast<std::size_t>(model.horizon));
  t.Qcheck[model.horizon] = t.Qbar;
  return t;
}

}  // namespace

AdversarialTables adversarial_tables(const SystemModel& model, const FriendlyObjective& objective,
                                     const AttackerSpec& attacker) {
  AdversarialTables t = init_tables(model, objective, attacker);
  const auto& lay = t.layout;
  const Matrix& A = model.A;
  const Matrix& B = model.B;

  for (int k = lay.n; k >= 1; --k) {
    const Matrix& Qn = t.Qcheck[k];
    const Matrix BtQ = B.transpose() * Qn.topRows(lay.m);  // Bbar' Qcheck, r x p
    Matrix Delta = symmetrize(BtQ.leftCols(lay.m) * B + attacker.RA);
    Eigen::LLT<Matrix> llt(Delta);
    if (llt.info() != Eigen::Success) throw NumericalError("adversarial_tables: Delta not positive definite");

    Matrix W = Qn - BtQ.transpose() * llt.solve(BtQ);
    Matrix K = llt.solve(BtQ);
    right_multiply_Abar(K, A, B, lay, k);

    right_multiply_Abar(W, A, B, lay, k);
    left_multiply_AbarT(W, A, B, lay, k);
    t.Qcheck[k - 1] = symmetrize(t.Qbar + W);
    t.Delta[k - 1] = std::move(Delta);
    t.K[k - 1] = std::move(K);
  }
  return t;
}

AdversarialTables adversarial_tables_dense(const SystemModel& model, const FriendlyObjective& objective,
                                           const AttackerSpec& attacker) {
  AdversarialTables t = init_tables(model, objective, attacker);
  const Matrix Bb = augmented_B(model);
  for (int k = model.horizon; k >= 1; --k) {
    const Matrix Ab = augmented_A(model, k);
    const Matrix& Qn = t.Qcheck[k];
    const Matrix Delta = symmetrize(Bb.transpose() * Qn * Bb + attacker.RA);
    const Matrix Dinv = Delta.inverse();
    t.K[k - 1] = Dinv * Bb.transpose() * Qn * Ab;
    t.Qcheck[k - 1] = symmetrize(t.Qbar + Ab.transpose() * (Qn - Qn * Bb * Dinv * Bb.transpose() * Qn) * Ab);
    t.Delta[k - 1] = Delta;
  }
  return t;
}

double SensorTables::G(const Matrix& Sigma1, const Matrix& SigmaV, const Matrix& QF) const {
  double g = (Sigma1 * (friendly->Qcheck_at(1 + shift) - QF)).trace();
  for (int k = 1; k <= nT; ++k) g += (SigmaV * friendly->Qcheck_at(k + 1 + shift)).trace();
  return g;
}

SensorTables truncated_sensor_tables(const FriendlyTables& friendly, int nT) {
  const int n = friendly.horizon();
  if (nT < 1 || nT > n) throw InputError("truncated_sensor_tables: nT out of range");
  return SensorTables{nT, n - nT, &friendly};
}

}  // namespace securesense
