#include "securesense/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace securesense {

GainSequence baseline_design(BaselineKind kind, const SystemModel& model) {
  const int m = model.state_dim();
  const Matrix L = kind == BaselineKind::Classical ? Matrix(Matrix::Identity(m, m)) : Matrix(Matrix::Zero(m, m));
  return GainSequence(static_cast<std::size_t>(model.horizon), L);
}

Matrix stacked_estimate_moment(const std::vector<Matrix>& H, const Matrix& A) {
  const int n = static_cast<int>(H.size());
  const auto m = A.rows();
  Matrix Hh = Matrix::Zero(n * m, n * m);
  for (int k = 1; k <= n; ++k) {
    Matrix block = H[k - 1];  // A^{l-k} H_k
    for (int l = k; l <= n; ++l) {
      Hh.block(block_index(l, n) * m, block_index(k, n) * m, m, m) = block;
      Hh.block(block_index(k, n) * m, block_index(l, n) * m, m, m) = block.transpose();
      block = A * block;
    }
  }
  return Hh;
}

double analytic_cost(const std::vector<Matrix>& H, const ScenarioOperator& op, const ControlLawBank& bank,
                     const CovarianceLadder& ladder) {
  const FriendlyStack& fs = bank.friendly_stack();
  const int n = fs.n, m = fs.m, r = fs.r, nT = op.nT;
  if (static_cast<int>(H.size()) != n || op.Xi.cols() != n * m) throw InputError("analytic_cost: shape mismatch");
  const SensorTables st = truncated_sensor_tables(bank.friendly_tables(), nT);
  const Matrix Hh = stacked_estimate_moment(H, ladder.A);

  Matrix DXi(op.Xi.rows(), op.Xi.cols());
  Matrix DKH(op.Xi.rows(), op.Xi.cols());
  double xi_term = 0.0;
  double open_loop = 0.0;
  for (int t = 1; t <= nT; ++t) {
    const int row = block_index(t, nT) * r;
    const Matrix& D = st.Delta_at(t);
    const Matrix& K = st.K_at(t);
    DXi.middleRows(row, r) = D * op.Xi.middleRows(row, r);
    DKH.middleRows(row, r) = D * K * Hh.middleRows(block_index(t, n) * m, m);
    xi_term += op.xi.segment(row, r).dot(D * op.xi.segment(row, r));
    open_loop += (ladder.at(t) * K.transpose() * D * K).trace();
  }
  const Matrix XiH = op.Xi * Hh;
  return DXi.cwiseProduct(XiH).sum() + 2.0 * DKH.cwiseProduct(op.Xi).sum() + open_loop + xi_term;
}

namespace {

struct TrialOutcome {
  double cost = 0.0;
  double raw = 0.0;
  double identity_error = 0.0;
};

class TrialRunner {
 public:
  TrialRunner(const GainSequence& gains, const JumpScenario& scenario, const ScenarioOperator& op,
              const ControlLawBank& bank, const CovarianceLadder& ladder, const SimulationOptions& options)
      : scenario_(scenario),
        op_(op),
        bank_(bank),
        schedule_(ladder, gains, options.pinv_tolerance),
        options_(options),
        st_(truncated_sensor_tables(bank.friendly_tables(), op.nT)) {
    const SystemModel& model = bank.model();
    chol1_ = Eigen::LLT<Matrix>(model.Sigma1).matrixL();
    cholv_ = Eigen::LLT<Matrix>(model.SigmaV).matrixL();
    if (model.SigmaW) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(*model.SigmaW);
      cholw_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    agent_at_.assign(static_cast<std::size_t>(op.nT) + 1, Segment{});
    for (const auto& seg : scenario.segments())
      for (int k = seg.kappa; k < seg.kappa_plus; ++k) agent_at_[k] = seg;
    phiS_ = sensor_phi(bank.friendly_stack(), op.nT);
  }

  TrialOutcome run(int trial, std::vector<Vector>* state_sum, std::vector<TraceRow>* trace) const {
    const SystemModel& model = bank_.model();
    const FriendlyTables& ft = bank_.friendly_tables();
    const Matrix& A = model.A;
    const Matrix& B = model.B;
    const int n = model.horizon, m = model.state_dim(), r = model.input_dim(), nT = op_.nT;

    std::seed_seq seq{static_cast<std::uint32_t>(options_.seed), static_cast<std::uint32_t>(options_.seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(static_cast<std::uint64_t>(trial) >> 32)};
    std::mt19937_64 engine(seq);
    RandomSource rng(engine());
    auto gaussian = [&](const Matrix& L) { return Vector(L * rng.normal_vector(static_cast<int>(L.cols()))); };

    Vector xo = gaussian(chol1_);
    Vector c = Vector::Zero(m);   // effect of the applied inputs
    Vector cF = Vector::Zero(m);  // effect of the friendly inputs alone
    Vector xhat = Vector::Zero(m);
    std::vector<Vector> uF_hist(static_cast<std::size_t>(n) + 1);
    Vector xhat_stack = Vector::Zero(n * m);
    Vector u_stack(nT * r);

    TrialOutcome out;
    for (int k = 1; k <= nT; ++k) {
      const Vector x = xo + c;
      if (state_sum) (*state_sum)[k - 1] += x;
      const Matrix& L = schedule_.L(k);
      const Vector s = L.transpose() * x;
      xhat = schedule_.update(k, xhat, s - L.transpose() * c);
      xhat_stack.segment(block_index(k, n) * m, m) = xhat;

      const Matrix& KF = ft.K_at(k);
      const Vector uF = -KF * (xhat + cF);
      uF_hist[k] = uF;
      const Segment& seg = agent_at_[k];
      Vector u = uF;
      if (seg.agent.is_attacker()) u += attacker_deviation(seg.agent.id, k, xhat, c, cF, uF_hist);

      const Vector e = u + st_.K_at(k) * x;
      out.cost += e.dot(st_.Delta_at(k) * e);

      const Vector v = gaussian(cholv_);
      const Vector xo_next = A * xo + v;
      c = A * c + B * u;
      cF = A * cF + B * uF;
      xo = xo_next;
      const Vector x_next = xo + c;
      out.raw += u.dot(bank_.objective().RF * u) + x_next.dot(bank_.objective().QF * x_next);
      u_stack.segment(block_index(k, nT) * r, r) = u;

      if (trace) {
        TraceRow row{trial, k, seg.agent, x, s, u, {}};
        if (model.D) {
          row.y = *model.D * u;
          if (cholw_.size()) row.y += gaussian(cholw_);
        }
        trace->push_back(std::move(row));
      }
    }
    if (state_sum) (*state_sum)[nT] += xo + c;

    if (options_.check_operator_identity) {
      const Vector uo = phiS_ * u_stack;
      const Vector pred = op_.Xi * xhat_stack + op_.xi;
      out.identity_error = (uo - pred).norm() / std::max(1.0, uo.norm());
    }
    return out;
  }

 private:
  // delta u_k = -K_A,k [E{x_k | s}; E{u_F | s}; z] with the friendly inputs of
  // later stages predicted from xhat_k.
  Vector attacker_deviation(int attacker, int k, const Vector& xhat, const Vector& c, const Vector& cF,
                            const std::vector<Vector>& uF_hist) const {
    const SystemModel& model = bank_.model();
    const FriendlyTables& ft = bank_.friendly_tables();
    const AdversarialTables& at = bank_.adversarial_tables(attacker);
    const AugmentedLayout& lay = at.layout;
    const Matrix& K = at.K_at(k);
    const Vector& z = bank_.attackers()[attacker - 1].z;

    Vector du = K.leftCols(lay.m) * (xhat + c) + K.rightCols(lay.m) * z;
    for (int j = 1; j < k; ++j) du += K.middleCols(lay.slot(j), lay.r) * uF_hist[j];
    Vector xp = xhat;
    Vector cp = cF;
    for (int j = k; j <= lay.n; ++j) {
      const Vector uj = j == k ? uF_hist[k] : Vector(-ft.K_at(j) * (xp + cp));
      du += K.middleCols(lay.slot(j), lay.r) * uj;
      cp = model.A * cp + model.B * uj;
      xp = model.A * xp;
    }
    return -du;
  }

  const JumpScenario& scenario_;
  const ScenarioOperator& op_;
  const ControlLawBank& bank_;
  EstimatorSchedule schedule_;
  SimulationOptions options_;
  SensorTables st_;
  Matrix chol1_, cholv_, cholw_;
  std::vector<Segment> agent_at_;
  Matrix phiS_;
};

}  // namespace

SimulationResult simulate_closed_loop(const GainSequence& gains, const JumpScenario& scenario,
                                      const ScenarioOperator& op, const ControlLawBank& bank,
                                      const CovarianceLadder& ladder, const SimulationOptions& options) {
  if (options.trials < 1) throw InputError("simulate_closed_loop: trials must be positive");
  const TrialRunner runner(gains, scenario, op, bank, ladder, options);
  const int m = bank.model().state_dim();
  const int trials = options.trials;
  const int threads = std::clamp(options.threads, 1, trials);

  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
  std::vector<std::vector<Vector>> state_sums(static_cast<std::size_t>(threads),
                                              std::vector<Vector>(static_cast<std::size_t>(op.nT) + 1, Vector::Zero(m)));
  SimulationResult res;
  auto work = [&](int tid) {
    for (int i = tid; i < trials; i += threads) {
      std::vector<TraceRow>* trace = nullptr;
      std::vector<TraceRow> local;
      if (i < options.trace_trials) trace = &local;
      outcomes[i] = runner.run(i, &state_sums[tid], trace);
      if (trace && tid == 0) res.trace.insert(res.trace.end(), local.begin(), local.end());
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  if (options.trace_trials > 0 && threads > 1) {
    // Traces are rebuilt serially so their order never depends on scheduling.
    res.trace.clear();
    for (int i = 0; i < std::min(options.trace_trials, trials); ++i) {
      std::vector<TraceRow> local;
      runner.run(i, nullptr, &local);
      res.trace.insert(res.trace.end(), local.begin(), local.end());
    }
  }

  res.trials = trials;
  double sum = 0.0, sum2 = 0.0, raw = 0.0, raw2 = 0.0;
  for (const auto& o : outcomes) {
    sum += o.cost;
    sum2 += o.cost * o.cost;
    raw += o.raw;
    raw2 += o.raw * o.raw;
    res.max_identity_error = std::max(res.max_identity_error, o.identity_error);
  }
  const double N = trials;
  res.mean = sum / N;
  res.raw_mean = raw / N;
  if (trials > 1) {
    res.std_error = std::sqrt(std::max(0.0, (sum2 - N * res.mean * res.mean) / (N - 1)) / N);
    res.raw_std_error = std::sqrt(std::max(0.0, (raw2 - N * res.raw_mean * res.raw_mean) / (N - 1)) / N);
  }
  res.mean_state.assign(static_cast<std::size_t>(op.nT) + 1, Vector::Zero(m));
  for (const auto& part : state_sums)
    for (std::size_t k = 0; k < part.size(); ++k) res.mean_state[k] += part[k] / N;
  return res;
}

EvaluationReport evaluate_design(const NamedDesign& design, const PreparedProblem& problem,
                                 const EvaluationConfig& config) {
  if (static_cast<int>(design.gains.size()) != problem.model().horizon)
    throw InputError("design '" + design.tag + "' has the wrong number of stages");
  for (const auto& L : design.gains)
    if (L.rows() != problem.model().state_dim())
      throw InputError("design '" + design.tag + "' gains do not match the state dimension");

  const std::vector<Matrix> H = recursive_H(problem.ladder, design.gains, config.pinv_tolerance);
  EvaluationReport rep;
  rep.tag = design.tag;
  rep.has_empirical = config.trials > 0;
  for (std::size_t s = 0; s < problem.set.scenarios.size(); ++s) {
    const JumpScenario& sc = problem.set.scenarios[s];
    EvaluationRow row;
    row.scenario = sc.name;
    row.mu = sc.mu;
    row.nT = sc.nT();
    row.analytic = analytic_cost(H, problem.operators[s], problem.bank, problem.ladder);
    if (rep.has_empirical) {
      SimulationOptions so;
      so.trials = config.trials;
      so.seed = config.seed;
      so.threads = config.threads;
      so.pinv_tolerance = config.pinv_tolerance;
      const SimulationResult sim =
          simulate_closed_loop(design.gains, sc, problem.operators[s], problem.bank, problem.ladder, so);
      row.empirical = sim.mean;
      row.std_error = sim.std_error;
      rep.average_empirical += sc.mu * sim.mean;
    }
    rep.average_analytic += sc.mu * row.analytic;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::vector<EvaluationReport> compare(const std::vector<NamedDesign>& designs, const PreparedProblem& problem,
                                      const EvaluationConfig& config) {
  std::vector<EvaluationReport> out;
  out.reserve(designs.size());
  for (const auto& d : designs) out.push_back(evaluate_design(d, problem, config));
  return out;
}

}  // namespace securesense
