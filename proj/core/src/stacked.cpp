#include "securesense/stacked.hpp"

#include <string>

namespace securesense {

Matrix solve_unit_block_upper(const Matrix& Phi, const Matrix& rhs, int r) {
  if (Phi.rows() != Phi.cols() || Phi.rows() != rhs.rows() || r <= 0 || Phi.rows() % r != 0)
    throw InputError("solve_unit_block_upper: shape mismatch");
  const auto nb = Phi.rows() / r;
  Matrix X = rhs;
  // Last block row first; each block row only couples to the rows below it.
  for (auto i = nb - 2; i >= 0; --i) {
    const auto below = (nb - 1 - i) * r;
    X.middleRows(i * r, r).noalias() -= Phi.block(i * r, (i + 1) * r, r, below) * X.bottomRows(below);
  }
  return X;
}

FriendlyStack build_friendly_stack(const SystemModel& model, const FriendlyTables& tables) {
  const int n = model.horizon;
  const int m = model.state_dim();
  const int r = model.input_dim();
  FriendlyStack fs{n, m, r, Matrix::Identity(n * r, n * r), Matrix::Zero(n * r, n * m), {}};

  const Matrix psi = build_psi(model);
  for (int k = 1; k <= n; ++k) {
    const int row = block_index(k, n);
    const Matrix& K = tables.K_at(k);
    fs.KF.block(row * r, row * m, r, m) = K;
    // Columns of times j < k lie to the right of the diagonal.
    const int right = (k - 1) * r;
    if (right > 0) fs.PhiF.block(row * r, (row + 1) * r, r, right) = K * psi.block(row * m, (row + 1) * r, m, right);
  }
  fs.TF = solve_unit_block_upper(fs.PhiF, fs.KF, r);
  return fs;
}

Matrix build_psi(const SystemModel& model) {
  const int n = model.horizon;
  const int m = model.state_dim();
  const int r = model.input_dim();
  Matrix psi = Matrix::Zero(n * m, n * r);
  // Row block of time k+1 is A times that of time k plus B in the slot of time k.
  for (int k = 1; k < n; ++k) {
    const int src = block_index(k, n);
    const int dst = block_index(k + 1, n);
    psi.middleRows(dst * m, m) = model.A * psi.middleRows(src * m, m);
    psi.block(dst * m, src * r, m, r) = model.B;
  }
  return psi;
}

Matrix indicator(int k, int n, int m) {
  Matrix E = Matrix::Zero(m, n * m);
  E.middleCols(block_index(k, n) * m, m).setIdentity();
  return E;
}

Matrix conditioning_selector(const Matrix& A, int n, int k) {
  const auto m = A.rows();
  Matrix L = Matrix::Zero(n * m, n * m);
  const auto col = block_index(k, n) * m;
  Matrix P = Matrix::Identity(m, m);
  for (int l = k; l <= n; ++l) {
    L.block(block_index(l, n) * m, col, m, m) = P;
    P = A * P;
  }
  for (int l = 1; l < k; ++l) L.block(block_index(l, n) * m, block_index(l, n) * m, m, m).setIdentity();
  return L;
}

Matrix build_F_k(const SystemModel& model, const FriendlyStack& fstack, int k) {
  const int n = fstack.n, m = fstack.m, r = fstack.r;
  if (k < 1 || k > n) throw InputError("build_F_k: stage out of range");
  const Matrix TL = fstack.TF * conditioning_selector(model.A, n, k);
  const Matrix psi_k = build_psi(model).middleRows(block_index(k, n) * m, m);
  Matrix F = Matrix::Zero(2 * m + n * r, n * m);
  F.topRows(m) = indicator(k, n, m) - psi_k * TL;
  F.middleRows(m, n * r) = -TL;
  return F;
}

Matrix build_F_kappa(const SystemModel& model, const FriendlyStack& fstack, int kappa) {
  const int n = fstack.n;
  if (kappa < 1 || kappa > n) throw InputError("build_F_kappa: kappa out of range");
  const int p = 2 * fstack.m + n * fstack.r;
  Matrix F(static_cast<Eigen::Index>(n - kappa + 1) * p, static_cast<Eigen::Index>(n) * fstack.m);
  for (int k = n; k >= kappa; --k) F.middleRows(static_cast<Eigen::Index>(n - k) * p, p) = build_F_k(model, fstack, k);
  return F;
}

AdversaryRows build_adversary_rows(const SystemModel& model, const AdversarialTables& tables,
                                   const FriendlyStack& fstack, const Vector& z) {
  const int n = fstack.n, m = fstack.m, r = fstack.r;
  const Matrix& A = model.A;
  const Matrix psi = build_psi(model);
  const Matrix& TF = fstack.TF;

  AdversaryRows out;
  out.n = n;
  out.r = r;
  out.PhiA1 = Matrix::Identity(n * r, n * r);
  out.KF_k.resize(static_cast<std::size_t>(n));
  out.Kz_k.resize(static_cast<std::size_t>(n));

  // C holds sum_{l >= k} TF[:, l] A^{l-k}, the column block of time k in TF L_k.
  Matrix C = TF.middleCols(block_index(n, n) * m, m);
  for (int k = n; k >= 1; --k) {
    if (k < n) C = C * A + TF.middleCols(block_index(k, n) * m, m);
    const Matrix& K = tables.K_at(k);
    const auto Kx = K.leftCols(m);
    const auto Ku = K.middleCols(m, n * r);
    const auto Kz = K.rightCols(m);
    const int row = block_index(k, n);

    // W = Kx Psi_k + Ku acts on the friendly input stack.
    const Matrix KxPsi = Kx * psi.middleRows(row * m, m);
    const Matrix W = KxPsi + Ku;

    // TF L_k: time-k column block is C, columns of times l < k copy TF, later ones vanish.
    Matrix R = Matrix::Zero(r, n * m);
    const int tail = (k - 1) * m;  // columns of times l < k
    if (tail > 0) R.rightCols(tail) = -W * TF.rightCols(tail);
    R.middleCols(row * m, m) = Kx - W * C;
    out.KF_k[k - 1] = std::move(R);
    out.Kz_k[k - 1] = Kz * z;

    const int right = (k - 1) * r;
    if (right > 0) out.PhiA1.block(row * r, (row + 1) * r, r, right) = KxPsi.rightCols(right);
  }
  return out;
}

AdversaryStack build_adversary_stack(const AdversaryRows& rows, const FriendlyStack& fstack, int kappa) {
  const int n = rows.n, r = rows.r;
  if (kappa < 1 || kappa > n) throw InputError("build_adversary_stack: kappa out of range");
  const int len = (n - kappa + 1) * r;
  AdversaryStack st;
  st.kappa = kappa;
  st.PhiA = rows.PhiA1.topLeftCorner(len, len);

  Matrix G(len, fstack.TF.cols());
  Vector zeta(len);
  for (int k = n; k >= kappa; --k) {
    G.middleRows((n - k) * r, r) = rows.KF_k[k - 1];
    zeta.segment((n - k) * r, r) = rows.Kz_k[k - 1];
  }
  st.TA = solve_unit_block_upper(st.PhiA, G, r) + fstack.TF.topRows(len);
  st.ZA = solve_unit_block_upper(st.PhiA, zeta, r);
  return st;
}

AdversaryStack build_adversary_stack_dense(const SystemModel& model, const AdversarialTables& tables,
                                           const FriendlyStack& fstack, int kappa, const Vector& z) {
  const int n = fstack.n, m = fstack.m, r = fstack.r;
  const int p = 2 * m + n * r;
  const int count = n - kappa + 1;
  const Matrix Bb = augmented_B(model);

  Matrix Phi = Matrix::Identity(count * r, count * r);
  for (int k = n; k >= kappa; --k) {
    Matrix KM = tables.K_at(k);  // K_A,k Abar_{k-1} ... Abar_{j+1}
    for (int j = k - 1; j >= kappa; --j) {
      Phi.block((n - k) * r, (n - j) * r, r, r) = KM * Bb;
      KM = KM * augmented_A(model, j);
    }
  }
  Matrix KA = Matrix::Zero(count * r, count * p);
  for (int k = n; k >= kappa; --k) KA.block((n - k) * r, (n - k) * p, r, p) = tables.K_at(k);
  Vector zbar = Vector::Zero(count * p);
  for (int i = 0; i < count; ++i) zbar.segment(i * p + m + n * r, m) = z;

  const Matrix Phinv = Phi.inverse();
  AdversaryStack st;
  st.kappa = kappa;
  st.PhiA = Phi;
  st.TA = Phinv * KA * build_F_kappa(model, fstack, kappa) + fstack.TF.topRows(count * r);
  st.ZA = Phinv * KA * zbar;
  return st;
}

ControlLawBank::ControlLawBank(const SystemModel& model, const FriendlyObjective& objective,
                               std::vector<AttackerSpec> attackers)
    : model_(model), objective_(objective), attackers_(std::move(attackers)) {
  ftables_ = securesense::friendly_tables(model_, objective_);
  fstack_ = build_friendly_stack(model_, ftables_);
  for (const auto& a : attackers_) {
    atables_.push_back(securesense::adversarial_tables(model_, objective_, a));
    arows_.push_back(build_adversary_rows(model_, atables_.back(), fstack_, a.z));
  }
}

const AdversarialTables& ControlLawBank::adversarial_tables(int attacker) const {
  if (attacker < 1 || attacker > static_cast<int>(atables_.size()))
    throw InputError("unknown attacker A" + std::to_string(attacker));
  return atables_[attacker - 1];
}

const AdversaryRows& ControlLawBank::adversary_rows(int attacker) const {
  if (attacker < 1 || attacker > static_cast<int>(arows_.size()))
    throw InputError("unknown attacker A" + std::to_string(attacker));
  return arows_[attacker - 1];
}

const AdversaryStack& ControlLawBank::adversary_stack(int attacker, int kappa) {
  const auto key = std::make_pair(attacker, kappa);
  auto it = stacks_.find(key);
  if (it == stacks_.end()) it = stacks_.emplace(key, build_adversary_stack(adversary_rows(attacker), fstack_, kappa)).first;
  return it->second;
}

void ControlLawBank::prepare(const ScenarioSet& set) {
  for (const auto& s : set.scenarios)
    for (const auto& seg : s.segments())
      if (seg.agent.is_attacker()) adversary_stack(seg.agent.id, seg.kappa);
}

const AdversaryStack& ControlLawBank::prepared_stack(int attacker, int kappa) const {
  auto it = stacks_.find({attacker, kappa});
  if (it == stacks_.end())
    throw InputError("no control law prepared for A" + std::to_string(attacker) + " from k=" + std::to_string(kappa));
  return it->second;
}

Matrix sensor_phi(const FriendlyStack& fstack, int nT) {
  return fstack.PhiF.topLeftCorner(nT * fstack.r, nT * fstack.r);
}

ScenarioOperator build_scenario_operator(const JumpScenario& scenario, const ControlLawBank& bank) {
  const FriendlyStack& fs = bank.friendly_stack();
  const int n = fs.n, r = fs.r, nT = scenario.nT();
  ScenarioOperator op;
  op.nT = nT;
  op.T = Matrix::Zero(nT * r, n * fs.m);
  op.Z = Vector::Zero(nT * r);

  for (const auto& seg : scenario.segments()) {
    for (int t = seg.kappa; t < seg.kappa_plus; ++t) {
      const int dst = block_index(t, nT) * r;
      if (seg.agent.is_friendly()) {
        op.T.middleRows(dst, r) = fs.TF.middleRows(block_index(t, n) * r, r);
      } else {
        const AdversaryStack& st = bank.prepared_stack(seg.agent.id, seg.kappa);
        op.T.middleRows(dst, r) = st.TA.middleRows(block_index(t, n) * r, r);
        op.Z.segment(dst, r) = st.ZA.segment(block_index(t, n) * r, r);
      }
    }
  }
  const Matrix PhiS = sensor_phi(fs, nT);
  op.Xi = -PhiS * op.T;
  op.xi = -PhiS * op.Z;
  return op;
}

}  // namespace securesense
