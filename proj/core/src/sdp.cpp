#include "securesense/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "securesense/gauss.hpp"

namespace securesense {

Vector svec(const Matrix& M) {
  const auto m = M.rows();
  Vector v(m * (m + 1) / 2);
  Eigen::Index idx = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    v(idx++) = M(j, j);
    for (Eigen::Index i = j + 1; i < m; ++i) v(idx++) = std::sqrt(2.0) * 0.5 * (M(i, j) + M(j, i));
  }
  return v;
}

Matrix smat(const Vector& v, int m) {
  Matrix M(m, m);
  Eigen::Index idx = 0;
  for (int j = 0; j < m; ++j) {
    M(j, j) = v(idx++);
    for (int i = j + 1; i < m; ++i) M(i, j) = M(j, i) = v(idx++) / std::sqrt(2.0);
  }
  return M;
}

double chain_objective(const std::vector<Matrix>& V, const std::vector<Matrix>& S) {
  double f = 0.0;
  for (std::size_t k = 0; k < V.size(); ++k) f += V[k].cwiseProduct(S[k]).sum();
  return f;
}

namespace {

double min_eig(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(M), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double max_eig(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(M), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

void check_problem(const ChainedSdpProblem& p) {
  const int n = p.horizon();
  const int m = p.dim();
  if (n < 1) throw InputError("chained SDP: empty horizon");
  if (static_cast<int>(p.Sigma.size()) != n) throw InputError("chained SDP: need one Sigma per stage");
  if (p.A.cols() != m || p.S0.rows() != m || p.S0.cols() != m) throw InputError("chained SDP: dimension mismatch");
  for (int k = 0; k < n; ++k) {
    if (p.V[k].rows() != m || p.V[k].cols() != m || p.Sigma[k].rows() != m || p.Sigma[k].cols() != m)
      throw InputError("chained SDP: stage matrix has wrong shape");
    if ((p.V[k] - p.V[k].transpose()).norm() > 1e-9 * std::max(1.0, p.V[k].norm()))
      throw DomainError("chained SDP: V not symmetric");
  }
}

std::vector<Matrix> minimal_chain(const ChainedSdpProblem& p) {
  std::vector<Matrix> S;
  Matrix prev = p.S0;
  for (int k = 0; k < p.horizon(); ++k) {
    prev = symmetrize(p.A * prev * p.A.transpose());
    S.push_back(prev);
  }
  return S;
}

double max_norm(const std::vector<Matrix>& V) {
  double v = 0.0;
  for (const auto& M : V) v = std::max(v, M.norm());
  return v;
}

// Largest t in (0, inf] with X + t dX PSD, for X positive definite.
double max_step(const Eigen::LLT<Matrix>& cholX, const Matrix& dX) {
  const Matrix Linv_dX = cholX.matrixL().solve(dX);
  const Matrix M = cholX.matrixL().solve(Linv_dX.transpose());
  const double lam = min_eig(M);
  return lam >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lam;
}

// d x d matrix of E -> sym(X E Zinv) in svec coordinates.
Matrix hkm_operator(const Matrix& X, const Matrix& Zinv, const std::vector<Matrix>& basis) {
  const auto d = static_cast<Eigen::Index>(basis.size());
  Matrix G(d, d);
  for (Eigen::Index j = 0; j < d; ++j) G.col(j) = svec(symmetrize(X * basis[j] * Zinv));
  return symmetrize(G);
}

struct TridiagonalFactor {
  std::vector<Eigen::LLT<Matrix>> pivots;
  std::vector<Matrix> lower;  // M_{k+1,k}
};

TridiagonalFactor factor_tridiagonal(std::vector<Matrix> diag, std::vector<Matrix> lower) {
  const std::size_t n = diag.size();
  TridiagonalFactor f;
  f.pivots.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      const Matrix Y = f.pivots[k - 1].solve(lower[k - 1].transpose());
      diag[k] = symmetrize(diag[k] - lower[k - 1] * Y);
    }
    f.pivots.emplace_back(diag[k]);
    // Rounding can make a pivot slightly indefinite late in the run; shift it
    // by a growing multiple of its scale before giving up.
    const double scale = std::max(diag[k].diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (double shift = 1e-14; f.pivots.back().info() != Eigen::Success && shift <= 1e-8; shift *= 10.0) {
      const auto d = diag[k].rows();
      f.pivots.back().compute(diag[k] + shift * scale * Matrix::Identity(d, d));
    }
    if (f.pivots.back().info() != Eigen::Success) throw NumericalError("interior point: Schur complement lost definiteness");
  }
  f.lower = std::move(lower);
  return f;
}

std::vector<Vector> solve_tridiagonal(const TridiagonalFactor& f, std::vector<Vector> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t k = 1; k < n; ++k) rhs[k] -= f.lower[k - 1] * f.pivots[k - 1].solve(rhs[k - 1]);
  std::vector<Vector> x(n);
  x[n - 1] = f.pivots[n - 1].solve(rhs[n - 1]);
  for (std::size_t k = n - 1; k-- > 0;) x[k] = f.pivots[k].solve(rhs[k] - f.lower[k].transpose() * x[k + 1]);
  return x;
}

}  // namespace

FeasibilityMargins feasibility_margins(const ChainedSdpProblem& problem, const std::vector<Matrix>& S) {
  FeasibilityMargins fm{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Matrix prev = problem.S0;
  for (int k = 0; k < problem.horizon(); ++k) {
    fm.upper = std::min(fm.upper, min_eig(problem.Sigma[k] - S[k]));
    fm.lower = std::min(fm.lower, min_eig(S[k] - problem.A * prev * problem.A.transpose()));
    prev = S[k];
  }
  return fm;
}

SdpSolution InteriorPointBackend::solve(const ChainedSdpProblem& p, const SdpOptions& opt) const {
  check_problem(p);
  const int n = p.horizon();
  const int m = p.dim();
  const Matrix& A = p.A;
  const Matrix At = A.transpose();
  const double vmax = max_norm(p.V);

  SdpSolution sol;
  sol.stats.backend = name();
  if (vmax == 0.0) {
    sol.S = minimal_chain(p);
    sol.stats.converged = true;
    return sol;
  }
  const double eps = opt.tie_break * vmax;
  const Matrix I = Matrix::Identity(m, m);

  // b = -(V + eps I): the problem is max b'y with slack Z = C - A(y) >= 0.
  std::vector<Matrix> b(n);
  for (int k = 0; k < n; ++k) b[k] = -symmetrize(p.V[k]) - eps * I;

  const int d = m * (m + 1) / 2;
  std::vector<Matrix> basis(d);
  for (int j = 0; j < d; ++j) basis[j] = smat(Vector::Unit(d, j), m);
  Matrix T(d, d);
  for (int j = 0; j < d; ++j) T.col(j) = svec(A * basis[j] * At);

  auto adjoint = [&](const std::vector<Matrix>& Wu, const std::vector<Matrix>& Wl) {
    std::vector<Matrix> out(n);
    for (int k = 0; k < n; ++k) {
      out[k] = Wu[k] - Wl[k];
      if (k + 1 < n) out[k] += At * Wl[k + 1] * A;
    }
    return out;
  };

  // Strictly feasible dual start halfway between the bounds.
  std::vector<Matrix> S(n);
  {
    Matrix prev = p.S0;
    for (int k = 0; k < n; ++k) {
      const Matrix lo = A * prev * At;
      S[k] = symmetrize(lo + 0.5 * (p.Sigma[k] - lo));
      prev = S[k];
    }
  }
  const double alpha0 = std::max(1.0, vmax);
  std::vector<Matrix> Xu(n, alpha0 * I), Xl(n, alpha0 * I);
  std::vector<Matrix> Zu(n), Zl(n);
  auto update_slacks = [&] {
    for (int k = 0; k < n; ++k) {
      Zu[k] = symmetrize(p.Sigma[k] - S[k]);
      const Matrix& prev = k == 0 ? p.S0 : S[k - 1];
      Zl[k] = symmetrize(S[k] - A * prev * At);
    }
  };

  const double nu = 2.0 * n * m;
  double bnorm = 0.0;
  for (const auto& bk : b) bnorm += bk.squaredNorm();
  bnorm = std::sqrt(bnorm);

  auto primal_residual = [&] {
    std::vector<Matrix> R = adjoint(Xu, Xl);
    for (int k = 0; k < n; ++k) R[k] = b[k] - R[k];
    return R;
  };
  auto primal_objective = [&] {
    double v = 0.0;
    for (int k = 0; k < n; ++k) v += p.Sigma[k].cwiseProduct(Xu[k]).sum();
    v -= (A * p.S0 * At).cwiseProduct(Xl[0]).sum();
    return v;
  };
  auto dual_objective = [&] {
    double v = 0.0;
    for (int k = 0; k < n; ++k) v += b[k].cwiseProduct(S[k]).sum();
    return v;
  };

  std::vector<Matrix> S_prev, Xu_prev, Xl_prev;
  SdpStats stats_prev;
  int it = 0;
  for (;; ++it) {
    update_slacks();
    const std::vector<Matrix> R = primal_residual();
    double rnorm = 0.0;
    for (const auto& Rk : R) rnorm += Rk.squaredNorm();
    rnorm = std::sqrt(rnorm);
    const double pobj = primal_objective();
    const double dobj = dual_objective();
    sol.stats.relative_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.stats.primal_infeasibility = rnorm / (1.0 + bnorm);
    if (sol.stats.relative_gap <= opt.tolerance && sol.stats.primal_infeasibility <= opt.tolerance) {
      sol.stats.converged = true;
      break;
    }
    if (it >= opt.max_iterations) break;

    std::vector<Eigen::LLT<Matrix>> cZu, cZl, cXu, cXl;
    std::vector<Matrix> Zu_inv(n), Zl_inv(n);
    double xz = 0.0;
    bool inside = true;
    for (int k = 0; k < n; ++k) {
      cZu.emplace_back(Zu[k]);
      cZl.emplace_back(Zl[k]);
      cXu.emplace_back(Xu[k]);
      cXl.emplace_back(Xl[k]);
      inside = cZu.back().info() == Eigen::Success && cZl.back().info() == Eigen::Success;
      if (!inside) break;
      Zu_inv[k] = symmetrize(cZu.back().solve(I));
      Zl_inv[k] = symmetrize(cZl.back().solve(I));
      xz += Xu[k].cwiseProduct(Zu[k]).sum() + Xl[k].cwiseProduct(Zl[k]).sum();
    }
    if (!inside) {
      // Rebuilding the slacks from S lost the last step's margin to rounding.
      if (it == 0) throw NumericalError("interior point: infeasible starting point");
      S = std::move(S_prev);
      Xu = std::move(Xu_prev);
      Xl = std::move(Xl_prev);
      sol.stats = stats_prev;
      break;
    }
    const double mu = xz / nu;

    std::vector<Matrix> Gu(n), Gl(n);
    for (int k = 0; k < n; ++k) {
      Gu[k] = hkm_operator(Xu[k], Zu_inv[k], basis);
      Gl[k] = hkm_operator(Xl[k], Zl_inv[k], basis);
    }
    std::vector<Matrix> diag(n), lower(std::max(0, n - 1));
    for (int k = 0; k < n; ++k) {
      diag[k] = Gu[k] + Gl[k];
      if (k + 1 < n) {
        diag[k] += T.transpose() * Gl[k + 1] * T;
        lower[k] = -Gl[k + 1] * T;
      }
    }
    TridiagonalFactor factor;
    try {
      factor = factor_tridiagonal(std::move(diag), std::move(lower));
    } catch (const NumericalError&) {
      // Near the optimum the Schur complement can become numerically
      // indefinite; keep the last iterate and report it as unconverged.
      break;
    }

    // Direction for a given right-hand side of the complementarity equation.
    struct Direction {
      std::vector<Matrix> dS, dZu, dZl, dXu, dXl;
    };
    auto direction = [&](double sigma_mu, const std::vector<Matrix>* corr_u, const std::vector<Matrix>* corr_l) {
      std::vector<Matrix> Wu(n), Wl(n);
      for (int k = 0; k < n; ++k) {
        Wu[k] = sigma_mu * Zu_inv[k];
        Wl[k] = sigma_mu * Zl_inv[k];
        if (corr_u) {
          Wu[k] -= (*corr_u)[k];
          Wl[k] -= (*corr_l)[k];
        }
      }
      const std::vector<Matrix> AW = adjoint(Wu, Wl);
      std::vector<Vector> rhs(n);
      for (int k = 0; k < n; ++k) rhs[k] = svec(b[k] - AW[k]);
      const std::vector<Vector> dy = solve_tridiagonal(factor, std::move(rhs));

      Direction dir;
      dir.dS.resize(n);
      dir.dZu.resize(n);
      dir.dZl.resize(n);
      dir.dXu.resize(n);
      dir.dXl.resize(n);
      for (int k = 0; k < n; ++k) dir.dS[k] = smat(dy[k], m);
      for (int k = 0; k < n; ++k) {
        dir.dZu[k] = -dir.dS[k];
        dir.dZl[k] = k == 0 ? dir.dS[k] : Matrix(dir.dS[k] - A * dir.dS[k - 1] * At);
        dir.dXu[k] = symmetrize(Wu[k] - Xu[k] - symmetrize(Xu[k] * dir.dZu[k] * Zu_inv[k]));
        dir.dXl[k] = symmetrize(Wl[k] - Xl[k] - symmetrize(Xl[k] * dir.dZl[k] * Zl_inv[k]));
      }
      return dir;
    };
    auto steps = [&](const Direction& dir) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = ap;
      for (int k = 0; k < n; ++k) {
        ap = std::min({ap, max_step(cXu[k], dir.dXu[k]), max_step(cXl[k], dir.dXl[k])});
        ad = std::min({ad, max_step(cZu[k], dir.dZu[k]), max_step(cZl[k], dir.dZl[k])});
      }
      return std::pair{ap, ad};
    };

    const Direction aff = direction(0.0, nullptr, nullptr);
    auto [ap_aff, ad_aff] = steps(aff);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double xz_aff = 0.0;
    for (int k = 0; k < n; ++k) {
      xz_aff += (Xu[k] + ap_aff * aff.dXu[k]).cwiseProduct(Zu[k] + ad_aff * aff.dZu[k]).sum();
      xz_aff += (Xl[k] + ap_aff * aff.dXl[k]).cwiseProduct(Zl[k] + ad_aff * aff.dZl[k]).sum();
    }
    const double sigma = std::pow(std::clamp(xz_aff / xz, 0.0, 1.0), 3.0);

    std::vector<Matrix> corr_u(n), corr_l(n);
    for (int k = 0; k < n; ++k) {
      corr_u[k] = symmetrize(aff.dXu[k] * aff.dZu[k] * Zu_inv[k]);
      corr_l[k] = symmetrize(aff.dXl[k] * aff.dZl[k] * Zl_inv[k]);
    }
    const Direction dir = direction(sigma * mu, &corr_u, &corr_l);
    auto [ap, ad] = steps(dir);
    constexpr double kDamping = 0.98;
    ap = std::min(1.0, kDamping * ap);
    ad = std::min(1.0, kDamping * ad);

    S_prev = S;
    stats_prev = sol.stats;
    Xu_prev = Xu;
    Xl_prev = Xl;
    for (int k = 0; k < n; ++k) {
      Xu[k] = symmetrize(Xu[k] + ap * dir.dXu[k]);
      Xl[k] = symmetrize(Xl[k] + ap * dir.dXl[k]);
      S[k] = symmetrize(S[k] + ad * dir.dS[k]);
    }
  }
  sol.stats.iterations = it;

  // Any feasible S has 0 <= S_k <= Sigma_k, which bounds the residual term.
  const std::vector<Matrix> R = primal_residual();
  double lb = -primal_objective();
  for (int k = 0; k < n; ++k) lb -= std::max(0.0, max_eig(R[k])) * p.Sigma[k].trace();
  for (int k = 0; k < n; ++k) lb -= eps * p.Sigma[k].trace();
  sol.stats.lower_bound = lb;
  sol.S = std::move(S);
  sol.objective = chain_objective(p.V, sol.S);
  return sol;
}

namespace {

// Dykstra's alternating projection onto {lo <= S <= hi} in the Frobenius norm.
Matrix project_interval(const Matrix& S, const Matrix& lo, const Matrix& hi) {
  auto clamp_below = [&](const Matrix& X) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(X - lo));
    return Matrix(lo + eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
                           eig.eigenvectors().transpose());
  };
  auto clamp_above = [&](const Matrix& X) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(hi - X));
    return Matrix(hi - eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
                           eig.eigenvectors().transpose());
  };
  Matrix x = S;
  Matrix P = Matrix::Zero(S.rows(), S.cols());
  Matrix Q = P;
  for (int i = 0; i < 200; ++i) {
    const Matrix y = clamp_below(x + P);
    P = x + P - y;
    const Matrix xn = clamp_above(y + Q);
    Q = y + Q - xn;
    const double change = (xn - x).norm();
    x = xn;
    if (change <= 1e-13 * (1.0 + x.norm())) break;
  }
  return symmetrize(x);
}

std::vector<Matrix> project_chain(const ChainedSdpProblem& p, std::vector<Matrix> S) {
  Matrix prev = p.S0;
  for (int k = 0; k < p.horizon(); ++k) {
    S[k] = project_interval(S[k], p.A * prev * p.A.transpose(), p.Sigma[k]);
    prev = S[k];
  }
  return S;
}

}  // namespace

SdpSolution ProjectedGradientBackend::solve(const ChainedSdpProblem& p, const SdpOptions& opt) const {
  check_problem(p);
  SdpSolution sol;
  sol.stats.backend = name();
  const double vmax = max_norm(p.V);
  std::vector<Matrix> S = minimal_chain(p);
  if (vmax == 0.0) {
    sol.S = std::move(S);
    sol.stats.converged = true;
    return sol;
  }
  const double eps = opt.tie_break * vmax;
  double smax = 0.0;
  for (const auto& Sg : p.Sigma) smax = std::max(smax, Sg.norm());
  const double step = 0.05 * smax / vmax;

  std::vector<Matrix> best = S;
  double best_obj = chain_objective(p.V, S);
  const Matrix I = Matrix::Identity(p.dim(), p.dim());
  int it = 0;
  for (; it < iterations_; ++it) {
    std::vector<Matrix> trial = S;
    for (int k = 0; k < p.horizon(); ++k) trial[k] -= step * (p.V[k] + eps * I);
    trial = project_chain(p, std::move(trial));
    double change = 0.0;
    for (int k = 0; k < p.horizon(); ++k) change += (trial[k] - S[k]).squaredNorm();
    S = std::move(trial);
    const double obj = chain_objective(p.V, S);
    if (obj < best_obj) {
      best_obj = obj;
      best = S;
    }
    if (std::sqrt(change) <= opt.tolerance * (1.0 + smax)) {
      sol.stats.converged = true;
      break;
    }
  }
  sol.stats.iterations = it;
  sol.stats.lower_bound = -std::numeric_limits<double>::infinity();
  sol.S = std::move(best);
  sol.objective = best_obj;
  return sol;
}

std::unique_ptr<SdpBackend> make_sdp_backend(const std::string& name) {
  if (name == "interior-point") return std::make_unique<InteriorPointBackend>();
  if (name == "projected-gradient") return std::make_unique<ProjectedGradientBackend>();
  throw InputError("unknown SDP backend '" + name + "'");
}

SdpSolution solve_chained_sdp(const ChainedSdpProblem& problem, const SdpOptions& options,
                              const SdpBackend& backend) {
  return backend.solve(problem, options);
}

ConicProgram to_conic_program(const ChainedSdpProblem& p) {
  check_problem(p);
  const int n = p.horizon();
  const int m = p.dim();
  const int d = m * (m + 1) / 2;
  ConicProgram cp;
  cp.c.resize(static_cast<Eigen::Index>(n) * d);
  for (int k = 0; k < n; ++k) cp.c.segment(static_cast<Eigen::Index>(k) * d, d) = svec(p.V[k]);

  std::vector<Matrix> basis(d);
  for (int j = 0; j < d; ++j) basis[j] = smat(Vector::Unit(d, j), m);
  const Matrix At = p.A.transpose();
  for (int k = 0; k < n; ++k) {
    ConicProgram::Block upper{p.Sigma[k], {}};
    for (int j = 0; j < d; ++j) upper.terms.push_back({k * d + j, -basis[j]});
    cp.blocks.push_back(std::move(upper));

    ConicProgram::Block lower{k == 0 ? Matrix(-p.A * p.S0 * At) : Matrix::Zero(m, m), {}};
    for (int j = 0; j < d; ++j) lower.terms.push_back({k * d + j, basis[j]});
    if (k > 0)
      for (int j = 0; j < d; ++j) lower.terms.push_back({(k - 1) * d + j, -p.A * basis[j] * At});
    cp.blocks.push_back(std::move(lower));
  }
  return cp;
}

}  // namespace securesense
