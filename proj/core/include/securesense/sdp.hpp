#pragma once

#include <memory>
#include <string>
#include <vector>

#include "securesense/types.hpp"

namespace securesense {

/// min sum_k tr(V_k S_k)  s.t.  Sigma_k >= S_k >= A S_{k-1} A',  k = 1..n,
/// with S_0 fixed (zero unless a tail of the chain is re-solved).
struct ChainedSdpProblem {
  std::vector<Matrix> V;
  std::vector<Matrix> Sigma;
  Matrix A;
  Matrix S0;

  [[nodiscard]] int horizon() const { return static_cast<int>(V.size()); }
  [[nodiscard]] int dim() const { return static_cast<int>(A.rows()); }
};

struct SdpOptions {
  double tolerance = 1e-8;       ///< relative gap and primal infeasibility
  int max_iterations = 100;
  double tie_break = 1e-9;       ///< eps / max ||V_k||_F for the +eps tr(S_k) term
};

struct SdpStats {
  std::string backend;
  int iterations = 0;
  bool converged = false;
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  /// Certified lower bound on the optimal value from the final dual iterate.
  double lower_bound = 0.0;
};

struct SdpSolution {
  std::vector<Matrix> S;
  double objective = 0.0;  ///< sum_k tr(V_k S_k) without the tie-break term
  SdpStats stats;
};

class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual SdpSolution solve(const ChainedSdpProblem& problem, const SdpOptions& options) const = 0;
};

/// Primal-dual path following (HKM direction, Mehrotra predictor-corrector).
/// The Schur complement is block tridiagonal in the stage index, so each
/// iteration costs O(n m^6).
class InteriorPointBackend final : public SdpBackend {
 public:
  [[nodiscard]] std::string name() const override { return "interior-point"; }
  [[nodiscard]] SdpSolution solve(const ChainedSdpProblem& problem, const SdpOptions& options) const override;
};

/// Projected gradient with a sequential Dykstra projection onto each stage's
/// two-sided interval. Slow and only accurate to about 1e-5 relative.
class ProjectedGradientBackend final : public SdpBackend {
 public:
  explicit ProjectedGradientBackend(int iterations = 20000) : iterations_(iterations) {}
  [[nodiscard]] std::string name() const override { return "projected-gradient"; }
  [[nodiscard]] SdpSolution solve(const ChainedSdpProblem& problem, const SdpOptions& options) const override;

 private:
  int iterations_;
};

[[nodiscard]] std::unique_ptr<SdpBackend> make_sdp_backend(const std::string& name);

[[nodiscard]] SdpSolution solve_chained_sdp(const ChainedSdpProblem& problem, const SdpOptions& options = {},
                                            const SdpBackend& backend = InteriorPointBackend{});

/// Smallest eigenvalues of Sigma_k - S_k and S_k - A S_{k-1} A' over all k.
struct FeasibilityMargins {
  double upper = 0.0;
  double lower = 0.0;
};
[[nodiscard]] FeasibilityMargins feasibility_margins(const ChainedSdpProblem& problem, const std::vector<Matrix>& S);

[[nodiscard]] double chain_objective(const std::vector<Matrix>& V, const std::vector<Matrix>& S);

/// Problem in linear-matrix-inequality form: variables y = (svec S_1, ..., svec S_n),
/// minimise c'y subject to F_j0 + sum_i y_i F_ji >= 0 for 2n blocks of size m.
struct ConicProgram {
  struct Term {
    int variable = 0;
    Matrix coefficient;
  };
  struct Block {
    Matrix constant;
    std::vector<Term> terms;
  };
  Vector c;
  std::vector<Block> blocks;
};

[[nodiscard]] ConicProgram to_conic_program(const ChainedSdpProblem& problem);

/// Symmetric-vector map with sqrt(2) off-diagonal scaling (an isometry).
[[nodiscard]] Vector svec(const Matrix& M);
[[nodiscard]] Matrix smat(const Vector& v, int m);

}  // namespace securesense
