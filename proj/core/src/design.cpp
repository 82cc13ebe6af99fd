#include "securesense/design.hpp"

#include <cmath>
#include <sstream>

namespace securesense {

double ObjectiveCoefficients::cost(const std::vector<Matrix>& H) const {
  return chain_objective(V, H) + PiO - G;
}

std::vector<Matrix> stage_weights(const Matrix& Pi, const Matrix& A, int n) {
  const auto m = A.rows();
  auto block = [&](int k, int l) { return Pi.block(block_index(k, n) * m, block_index(l, n) * m, m, m); };
  std::vector<Matrix> V(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    Matrix V_k = block(k, k);
    if (k < n) {
      // Horner form of sum_{l>k} Pi_kl A^{l-k}.
      Matrix acc = block(k, n);
      for (int l = n - 1; l > k; --l) acc = acc * A + block(k, l);
      const Matrix C = acc * A;
      V_k += C + C.transpose();
    }
    V[k - 1] = symmetrize(V_k);
  }
  return V;
}

ScenarioCoefficients scenario_coefficients(const ScenarioOperator& op, const ControlLawBank& bank,
                                           const CovarianceLadder& ladder) {
  const FriendlyStack& fs = bank.friendly_stack();
  const int n = fs.n, m = fs.m, r = fs.r, nT = op.nT;
  const SensorTables st = truncated_sensor_tables(bank.friendly_tables(), nT);

  // Delta Xi and Delta xi, one r-row block per time.
  Matrix DXi(op.Xi.rows(), op.Xi.cols());
  Vector Dxi(op.xi.size());
  for (int t = 1; t <= nT; ++t) {
    const int row = block_index(t, nT) * r;
    DXi.middleRows(row, r) = st.Delta_at(t) * op.Xi.middleRows(row, r);
    Dxi.segment(row, r) = st.Delta_at(t) * op.xi.segment(row, r);
  }

  ScenarioCoefficients c;
  c.Pi = op.Xi.transpose() * DXi;
  // Xi' Delta K: K has a single block K_S,t in the column of time t.
  Matrix P = Matrix::Zero(n * m, n * m);
  for (int t = 1; t <= nT; ++t) {
    const int row = block_index(t, nT) * r;
    P.middleCols(block_index(t, n) * m, m) = DXi.middleRows(row, r).transpose() * st.K_at(t);
  }
  c.Pi += P + P.transpose();
  c.Pi = symmetrize(c.Pi);

  const SystemModel& mdl = bank.model();
  c.G = st.G(mdl.Sigma1, mdl.SigmaV, bank.objective().QF);
  c.PiO = op.xi.dot(Dxi) + c.G;
  for (int t = 1; t <= nT; ++t) {
    const Matrix& K = st.K_at(t);
    c.PiO += (ladder.at(t) * K.transpose() * st.Delta_at(t) * K).trace();
  }
  c.V = stage_weights(c.Pi, ladder.A, n);
  return c;
}

ObjectiveCoefficients assemble_objective(const ScenarioSet& set, const std::vector<ScenarioCoefficients>& terms,
                                         const Matrix& A) {
  if (terms.size() != set.scenarios.size()) throw InputError("assemble_objective: one term per scenario required");
  ObjectiveCoefficients oc;
  const auto dim = terms.front().Pi.rows();
  oc.Pi = Matrix::Zero(dim, dim);
  for (std::size_t s = 0; s < terms.size(); ++s) {
    const double mu = set.scenarios[s].mu;
    if (mu == 0.0) continue;
    oc.Pi += mu * terms[s].Pi;
    oc.PiO += mu * terms[s].PiO;
    oc.G += mu * terms[s].G;
  }
  oc.Pi = symmetrize(oc.Pi);
  oc.V = stage_weights(oc.Pi, A, set.n);
  return oc;
}

ChainedSdpProblem PreparedProblem::sdp_problem() const {
  return {coefficients.V, ladder.sigma, ladder.A, Matrix::Zero(ladder.A.rows(), ladder.A.rows())};
}

PreparedProblem PreparedProblem::with_measure(const MeasureSpec& measure) const {
  PreparedProblem p = *this;
  p.set = assign_measures(p.set, measure);
  p.coefficients = assemble_objective(p.set, p.terms, p.ladder.A);
  return p;
}

PreparedProblem prepare_problem(const SystemModel& model, const FriendlyObjective& objective,
                                const std::vector<AttackerSpec>& attackers, ScenarioSet set) {
  if (set.n != model.horizon) throw InputError("scenario set horizon differs from the model horizon");
  for (const auto& s : set.scenarios)
    for (const auto& seg : s.segments())
      if (seg.agent.id > static_cast<int>(attackers.size()))
        throw InputError("scenario " + s.name + " refers to undefined attacker " + seg.agent.label());

  PreparedProblem p{ControlLawBank(model, objective, attackers), std::move(set), propagate_open_loop(model), {}, {}, {}};
  p.bank.prepare(p.set);
  for (const auto& s : p.set.scenarios) {
    p.operators.push_back(build_scenario_operator(s, p.bank));
    p.terms.push_back(scenario_coefficients(p.operators.back(), p.bank, p.ladder));
  }
  p.coefficients = assemble_objective(p.set, p.terms, model.A);
  return p;
}

SensorDesign extract_gains(const SdpSolution& solution, const CovarianceLadder& ladder,
                           const ExtractionOptions& options) {
  const int n = ladder.horizon();
  const Matrix& A = ladder.A;
  const auto m = A.rows();
  if (static_cast<int>(solution.S.size()) != n) throw InputError("extract_gains: solution length differs from horizon");

  SensorDesign d;
  d.S = solution.S;
  d.sdp = solution.stats;
  Matrix prev = Matrix::Zero(m, m);
  for (int k = 1; k <= n; ++k) {
    const Matrix& Sk = solution.S[k - 1];
    StageProjection sp;
    Matrix D = symmetrize(ladder.at(k) - A * prev * A.transpose());
    {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(D);
      D = symmetrize(eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose());
    }
    const Matrix Dm = psd_pinv_sqrt(D, options.pinv_tolerance);
    sp.P = symmetrize(Dm * (Sk - A * prev * A.transpose()) * Dm);
    sp.D = D;
    sp.idempotency_defect = (sp.P * sp.P - sp.P).norm();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(sp.P);
    sp.eigenvalues = eig.eigenvalues();
    Matrix L = Matrix::Zero(m, m);
    bool mid_band = false;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double lam = sp.eigenvalues(i);
      if (lam >= options.warn_low && lam <= options.warn_high) mid_band = true;
      if (lam > options.rounding_threshold) {
        L.col(i) = Dm * eig.eigenvectors().col(i);
        ++sp.rank;
      }
    }
    if (mid_band) {
      std::ostringstream os;
      os << "stage " << k << ": projection eigenvalue inside [" << options.warn_low << ", " << options.warn_high
         << "]; the SDP solution may be interior to the optimal face";
      d.warnings.push_back(os.str());
    }
    if (sp.idempotency_defect > options.max_idempotency_defect) {
      std::ostringstream os;
      os << "stage " << k << ": projection is far from idempotent (||P^2-P||_F = " << sp.idempotency_defect
         << "); tighten the SDP tolerance";
      throw NumericalError(os.str());
    }
    d.ranks.push_back(sp.rank);
    d.gains.push_back(std::move(L));
    d.projections.push_back(std::move(sp));
    prev = Sk;
  }
  return d;
}

Certification certify(const SensorDesign& design, const SystemModel& model, const CovarianceLadder& ladder,
                      const std::vector<Matrix>& V, const DesignOptions& options) {
  Certification c;
  const int n = model.horizon;
  std::vector<Matrix> H;
  if (n * model.state_dim() <= options.batch_certification_limit) {
    c.method = "batch";
    H = batch_conditional_H(model, design.gains, options.extraction.pinv_tolerance);
  } else {
    c.method = "recursion";
    H = recursive_H(ladder, design.gains, options.extraction.pinv_tolerance);
  }
  for (int k = 0; k < n; ++k) {
    const double scale = std::max(ladder.sigma[k].norm(), 1e-300);
    c.max_relative_error = std::max(c.max_relative_error, (H[k] - design.S[k]).norm() / scale);
  }
  c.achieved_objective = chain_objective(V, H);
  c.sdp_objective = chain_objective(V, design.S);
  c.lower_bound = design.sdp.lower_bound;
  c.passed = c.max_relative_error <= options.certification_tolerance;
  return c;
}

SensorDesign secure_sensor_design(const PreparedProblem& problem, const DesignOptions& options) {
  const ChainedSdpProblem sdp = problem.sdp_problem();
  const auto backend = make_sdp_backend(options.backend);
  const SdpSolution sol = solve_chained_sdp(sdp, options.sdp, *backend);
  SensorDesign design = extract_gains(sol, problem.ladder, options.extraction);
  design.certification = certify(design, problem.model(), problem.ladder, sdp.V, options);
  if (!design.certification.passed) {
    std::ostringstream os;
    os << "certification failed: max ||H_k - S_k||_F / ||Sigma_k||_F = " << design.certification.max_relative_error
       << " exceeds " << options.certification_tolerance;
    throw CertificationError(os.str());
  }
  return design;
}

}  // namespace securesense
