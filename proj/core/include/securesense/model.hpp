#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "securesense/types.hpp"

namespace securesense {

/// Time-invariant controlled Gauss-Markov plant
///
///   x_{k+1} = A x_k + B u_k + v_k,   y_k = D u_k + w_k,   k = 1..n
///
/// with x_1 ~ N(0, Sigma1) and v_k ~ N(0, SigmaV). The control-observation
/// channel (D, SigmaW) is optional and only feeds simulation traces.
struct SystemModel {
  Matrix A;
  Matrix B;
  Matrix Sigma1;
  Matrix SigmaV;
  int horizon = 0;
  std::optional<Matrix> D;
  std::optional<Matrix> SigmaW;

  [[nodiscard]] int state_dim() const { return static_cast<int>(A.rows()); }
  [[nodiscard]] int input_dim() const { return static_cast<int>(B.cols()); }
};

/// Quadratic weights of the system-desired (friendly) cost.
struct FriendlyObjective {
  Matrix QF;
  Matrix RF;
};

/// One adversary: steer the state toward `z` while paying `lambda` times the
/// friendly state energy and an RA-weighted deviation from the friendly input.
struct AttackerSpec {
  Matrix QA;
  Matrix RA;
  double lambda = 0.0;
  Vector z;
};

struct ValidationReport {
  std::vector<std::string> issues;

  [[nodiscard]] bool ok() const { return issues.empty(); }
  [[nodiscard]] bool contains(std::string_view needle) const;
};

/// Checks the standing assumptions: non-singular A, positive definite Sigma1,
/// SigmaV and control weights, PSD state weights, lambda >= 0, consistent
/// shapes. Violations are collected, never thrown.
[[nodiscard]] ValidationReport validate(const SystemModel& model, const FriendlyObjective& objective,
                                        std::span<const AttackerSpec> attackers = {});

/// sigma_min / sigma_max of A; the model treats A as singular below 1e-12.
[[nodiscard]] double singularity_ratio(const Matrix& A);

class InstanceGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InstanceDiagnostics {
  int resamples = 0;           ///< rejected draws of A before a non-singular one
  double a_singularity_ratio = 0.0;
};

struct GeneratedInstance {
  SystemModel model;
  InstanceDiagnostics diagnostics;
};

/// Random benchmark plant: A and B uniform on [0,1] scaled by 0.1 (A redrawn
/// until non-singular), Sigma1 = (D+D')/2 + 2mI and SigmaV = 10((D'+D'')/2 + 2mI)
/// with fresh uniform D. Deterministic for a given seed.
[[nodiscard]] GeneratedInstance generate_random_instance(std::uint64_t seed, int m, int r, int n);

/// Plant, friendly weights and two attackers arranged like the two-adversary
/// benchmark: QF weighs the first m/2 states, attacker 1 the last m/4,
/// attacker 2 the last m/2; all R = I, lambda = 0.1 and z_i ~ N(0, I).
struct ReferenceSetup {
  SystemModel model;
  FriendlyObjective objective;
  std::vector<AttackerSpec> attackers;
};

/// Requires m divisible by 4.
[[nodiscard]] ReferenceSetup make_reference_setup(std::uint64_t seed, int m, int r, int n);

/// Portable draws on top of std::mt19937_64, whose output sequence is fixed by
/// the standard. The library's distributions are not, so the conversion to
/// uniform and normal variates is done here.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Standard normal (Box-Muller, one variate cached).
  double normal();
  Matrix uniform_matrix(int rows, int cols);
  Vector normal_vector(int size);

 private:
  std::mt19937_64 engine_;
  std::optional<double> cached_normal_;
};

}  // namespace securesense
