#include "securesense/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace securesense {
namespace {

constexpr double kSingularityThreshold = 1e-12;
constexpr int kMaxResamples = 1000;

bool is_square(const Matrix& M, Eigen::Index n) { return M.rows() == n && M.cols() == n; }

bool is_symmetric(const Matrix& M) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

double min_eigenvalue(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double eigen_scale(const Matrix& M) { return std::max(1.0, M.cwiseAbs().maxCoeff()); }

// Records a problem with a symmetric weight/covariance: shape, symmetry, and
// definiteness (strict when `definite`).
void check_symmetric(ValidationReport& report, const Matrix& M, Eigen::Index n, const std::string& name,
                     bool definite) {
  if (!is_square(M, n)) {
    std::ostringstream os;
    os << name << " dimension mismatch: expected " << n << "x" << n << ", got " << M.rows() << "x" << M.cols();
    report.issues.push_back(os.str());
    return;
  }
  if (n == 0) return;
  if (!is_symmetric(M)) {
    report.issues.push_back(name + " not symmetric");
    return;
  }
  const double lmin = min_eigenvalue(M);
  if (definite) {
    if (!(lmin > 1e-12 * eigen_scale(M))) report.issues.push_back(name + " not positive definite");
  } else if (lmin < -1e-9 * eigen_scale(M)) {
    report.issues.push_back(name + " not positive semi-definite");
  }
}

}  // namespace

bool ValidationReport::contains(std::string_view needle) const {
  for (const auto& issue : issues) {
    if (issue.find(needle) != std::string::npos) return true;
  }
  return false;
}

double singularity_ratio(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& s = svd.singularValues();
  const double smax = s.maxCoeff();
  if (smax == 0.0) return 0.0;
  return s.minCoeff() / smax;
}

ValidationReport validate(const SystemModel& model, const FriendlyObjective& objective,
                          std::span<const AttackerSpec> attackers) {
  ValidationReport report;
  const Eigen::Index m = model.A.rows();
  const Eigen::Index r = model.B.cols();

  if (model.horizon < 1) report.issues.push_back("horizon must be a positive integer");
  if (m == 0) report.issues.push_back("state dimension must be positive");
  if (r == 0) report.issues.push_back("input dimension must be positive");

  if (!is_square(model.A, m)) {
    report.issues.push_back("A dimension mismatch: A must be square");
  } else if (m > 0 && !(singularity_ratio(model.A) > kSingularityThreshold)) {
    report.issues.push_back("A singular");
  }
  if (model.B.rows() != m) report.issues.push_back("B dimension mismatch: B must have as many rows as A");

  check_symmetric(report, model.Sigma1, m, "Sigma1", true);
  check_symmetric(report, model.SigmaV, m, "SigmaV", true);
  if (model.D && !is_square(*model.D, r)) report.issues.push_back("D dimension mismatch: expected r x r");
  if (model.SigmaW) check_symmetric(report, *model.SigmaW, r, "SigmaW", false);

  check_symmetric(report, objective.QF, m, "Q_F", false);
  check_symmetric(report, objective.RF, r, "R_F", true);

  for (std::size_t i = 0; i < attackers.size(); ++i) {
    const auto& a = attackers[i];
    const std::string tag = "attacker " + std::to_string(i + 1) + ": ";
    check_symmetric(report, a.QA, m, tag + "Q_A", false);
    check_symmetric(report, a.RA, r, tag + "R_A", true);
    if (!(a.lambda >= 0.0)) report.issues.push_back(tag + "lambda must be nonnegative");
    if (a.z.size() != m) report.issues.push_back(tag + "z dimension mismatch");
  }
  return report;
}

double RandomSource::normal() {
  if (cached_normal_) {
    const double v = *cached_normal_;
    cached_normal_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

Matrix RandomSource::uniform_matrix(int rows, int cols) {
  Matrix M(rows, cols);
  // Row-major fill so a printed matrix reads in draw order.
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = uniform();
  return M;
}

Vector RandomSource::normal_vector(int size) {
  Vector v(size);
  for (int i = 0; i < size; ++i) v(i) = normal();
  return v;
}

GeneratedInstance generate_random_instance(std::uint64_t seed, int m, int r, int n) {
  if (m < 1 || r < 1 || n < 1) throw InputError("generate_random_instance: m, r, n must be >= 1");
  RandomSource rng(seed);
  GeneratedInstance out;
  auto& model = out.model;
  model.horizon = n;

  int attempts = 0;
  for (;;) {
    model.A = 0.1 * rng.uniform_matrix(m, m);
    out.diagnostics.a_singularity_ratio = singularity_ratio(model.A);
    if (out.diagnostics.a_singularity_ratio > kSingularityThreshold) break;
    if (++attempts >= kMaxResamples)
      throw InstanceGenerationError("generate_random_instance: no non-singular A after 1000 draws");
  }
  out.diagnostics.resamples = attempts;
  model.B = 0.1 * rng.uniform_matrix(m, r);

  const Matrix I = Matrix::Identity(m, m);
  const Matrix D1 = rng.uniform_matrix(m, m);
  model.Sigma1 = 0.5 * (D1 + D1.transpose()) + 2.0 * m * I;
  const Matrix D2 = rng.uniform_matrix(m, m);
  model.SigmaV = 10.0 * (0.5 * (D2 + D2.transpose()) + 2.0 * m * I);
  return out;
}

ReferenceSetup make_reference_setup(std::uint64_t seed, int m, int r, int n) {
  if (m % 4 != 0) throw InputError("make_reference_setup: m must be divisible by 4");
  ReferenceSetup setup;
  setup.model = generate_random_instance(seed, m, r, n).model;

  setup.objective.QF = Matrix::Zero(m, m);
  setup.objective.QF.topLeftCorner(m / 2, m / 2).setIdentity();
  setup.objective.RF = Matrix::Identity(r, r);

  // The attackers' targets come from a stream independent of the plant's.
  RandomSource targets(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int quarter : {m / 4, m / 2}) {
    AttackerSpec a;
    a.QA = Matrix::Zero(m, m);
    a.QA.bottomRightCorner(quarter, quarter).setIdentity();
    a.RA = Matrix::Identity(r, r);
    a.lambda = 0.1;
    a.z = targets.normal_vector(m);
    setup.attackers.push_back(std::move(a));
  }
  return setup;
}

}  // namespace securesense
