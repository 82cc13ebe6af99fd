#include <gtest/gtest.h>

#include "oracles.hpp"
#include "securesense/gauss.hpp"
#include "test_support.hpp"

namespace securesense {
namespace {

using testing::rel;
using testing::scalar_model;

Matrix random_spd(RandomSource& rng, int m) {
  const Matrix X = rng.uniform_matrix(m, m) - Matrix::Constant(m, m, 0.5);
  return X * X.transpose() + 0.1 * Matrix::Identity(m, m);
}

/// Mix of full-rank, rank-deficient and zero gains.
GainSequence random_gains(RandomSource& rng, int m, int n) {
  GainSequence g;
  for (int k = 0; k < n; ++k) {
    const int rank = static_cast<int>(rng.uniform() * (m + 1));
    Matrix L = Matrix::Zero(m, m);
    if (rank > 0) L.leftCols(rank) = rng.uniform_matrix(m, rank) - Matrix::Constant(m, rank, 0.5);
    if (rank > 1 && rng.uniform() < 0.3) L.col(rank - 1) = L.col(0);  // repeated column
    g.push_back(L);
  }
  return g;
}

TEST(PsdSqrt, Examples) {
  EXPECT_LT(rel(psd_sqrt(Matrix::Identity(3, 3)), Matrix::Identity(3, 3)), 1e-14);
  const Matrix D = Eigen::Vector2d(4, 9).asDiagonal();
  EXPECT_LT(rel(psd_sqrt(D), Matrix(Eigen::Vector2d(2, 3).asDiagonal())), 1e-14);

  Matrix M(2, 2);
  M << 2, 1, 1, 2;
  const Matrix R = psd_sqrt(M);
  // Eigenvectors (1,1)/sqrt2 and (1,-1)/sqrt2 with eigenvalues 3 and 1.
  const double a = (std::sqrt(3.0) + 1.0) / 2.0, b = (std::sqrt(3.0) - 1.0) / 2.0;
  Matrix expected(2, 2);
  expected << a, b, b, a;
  EXPECT_LT(rel(R, expected), 1e-14);
  EXPECT_LE((R * R - M).norm(), 1e-8 * (1 + M.norm()));
}

TEST(PsdSqrt, RejectsAsymmetricAndIndefinite) {
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW((void)psd_sqrt(asym), DomainError);
  Matrix indef(2, 2);
  indef << 1, 0, 0, -1;
  EXPECT_THROW((void)psd_sqrt(indef), DomainError);
}

TEST(PsdSqrt, ClampsTinyNegativeEigenvalues) {
  Matrix M(2, 2);
  M << 1, 0, 0, -1e-13;
  const Matrix R = psd_sqrt(M);
  EXPECT_NEAR(R(1, 1), 0.0, 1e-15);
}

TEST(PsdPinvSqrt, Examples) {
  EXPECT_LT(rel(psd_pinv_sqrt(Matrix::Identity(2, 2)), Matrix::Identity(2, 2)), 1e-14);
  const Matrix D = Eigen::Vector2d(4, 0).asDiagonal();
  const Matrix expected = Eigen::Vector2d(0.5, 0).asDiagonal();
  EXPECT_LT(rel(psd_pinv_sqrt(D, 1e-10), expected), 1e-14);
  EXPECT_EQ(psd_pinv_sqrt(Matrix::Zero(1, 1))(0, 0), 0.0);
}

TEST(PsdPinvSqrt, ProjectsOntoRange) {
  RandomSource rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix X = rng.uniform_matrix(5, 2);
    const Matrix M = X * X.transpose();
    const Matrix Pm = psd_pinv_sqrt(M);
    const Matrix P = Pm * M * Pm;
    const Matrix proj = X * (X.transpose() * X).inverse() * X.transpose();
    EXPECT_LT((P - proj).norm(), 1e-7);
    EXPECT_LT((psd_sqrt(M) * psd_sqrt(M) - M).norm(), 1e-8 * M.norm());
  }
}

TEST(Ladder, ScalarStack) {
  const CovarianceLadder ladder = propagate_open_loop(scalar_model());
  Matrix expected(2, 2);
  expected << 2, 1, 1, 1;
  EXPECT_LT(rel(ladder.stacked(), expected), 1e-15);
  EXPECT_DOUBLE_EQ(ladder.at(1)(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(ladder.at(2)(0, 0), 2.0);
}

TEST(Ladder, NoNoiseIdentityDynamics) {
  SystemModel m;
  m.A = Matrix::Identity(2, 2);
  m.B = Matrix::Ones(2, 1);
  m.Sigma1 = Matrix::Identity(2, 2) * 3.0;
  m.SigmaV = Matrix::Zero(2, 2);
  m.horizon = 4;
  const auto ladder = propagate_open_loop(m);
  for (int k = 1; k <= 4; ++k) EXPECT_EQ(ladder.at(k), m.Sigma1);
}

TEST(Ladder, StackedMatchesLiftedCovariance) {
  const auto m = generate_random_instance(3, 3, 1, 5).model;
  const auto ladder = propagate_open_loop(m);
  const Matrix W = oracle::lifted_noise(m.Sigma1, m.SigmaV, 5);
  const Matrix S = ladder.stacked();
  for (int k = 1; k <= 5; ++k)
    for (int l = 1; l <= 5; ++l) {
      const Matrix expected = oracle::lifted_state(m.A, 5, k) * W * oracle::lifted_state(m.A, 5, l).transpose();
      EXPECT_LT(rel(S.block((5 - k) * 3, (5 - l) * 3, 3, 3), expected), 1e-12);
    }
}

TEST(Ladder, BenchmarkInstanceIsPositiveDefinite) {
  const auto ladder = propagate_open_loop(generate_random_instance(0, 8, 2, 100).model);
  for (const auto& S : ladder.sigma) EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues().minCoeff(), 0.0);
}

TEST(EstimatorStep, NoInformation) {
  const auto m = generate_random_instance(2, 3, 1, 3).model;
  const auto ladder = propagate_open_loop(m);
  EstimatorState prev{Vector::Ones(3), 0.5 * ladder.at(1)};
  const auto next = estimator_step(prev, Matrix::Zero(3, 3), Vector::Constant(3, 7.0), ladder, 2);
  EXPECT_LT(rel(next.xhat, m.A * prev.xhat), 1e-15);
  EXPECT_LT(rel(next.H, m.A * prev.H * m.A.transpose()), 1e-14);
}

TEST(EstimatorStep, PerfectObservation) {
  const auto m = generate_random_instance(2, 3, 1, 3).model;
  const auto ladder = propagate_open_loop(m);
  EstimatorState prev = initial_estimator_state(3);
  const Vector x = Vector::LinSpaced(3, -1, 2);
  const auto s1 = estimator_step(prev, Matrix::Identity(3, 3), x, ladder, 1);
  EXPECT_LT(rel(s1.xhat, x), 1e-12);
  EXPECT_LT(rel(s1.H, ladder.at(1)), 1e-12);
}

TEST(EstimatorStep, ScalarHistory) {
  const auto ladder = propagate_open_loop(scalar_model());
  auto s = initial_estimator_state(1);
  s = estimator_step(s, Matrix::Ones(1, 1), Vector::Ones(1), ladder, 1);
  EXPECT_DOUBLE_EQ(s.H(0, 0), 1.0);
  s = estimator_step(s, Matrix::Zero(1, 1), Vector::Ones(1), ladder, 2);
  EXPECT_DOUBLE_EQ(s.H(0, 0), 1.0);
}

TEST(EstimatorStep, RejectsWrongShape) {
  const auto ladder = propagate_open_loop(scalar_model());
  EXPECT_THROW((void)estimator_step(initial_estimator_state(1), Matrix::Ones(2, 1), Vector::Ones(1), ladder, 1),
               InputError);
}

TEST(BatchH, TrivialGains) {
  const auto m = generate_random_instance(4, 3, 1, 4).model;
  const auto ladder = propagate_open_loop(m);
  const auto full = batch_conditional_H(m, GainSequence(4, Matrix::Identity(3, 3)));
  const auto none = batch_conditional_H(m, GainSequence(4, Matrix::Zero(3, 3)));
  for (int k = 1; k <= 4; ++k) {
    EXPECT_LT(rel(full[k - 1], ladder.at(k)), 1e-9);
    EXPECT_EQ(none[k - 1].norm(), 0.0);
  }
}

TEST(BatchH, ScalarExample) {
  const GainSequence g{Matrix::Ones(1, 1), Matrix::Zero(1, 1)};
  const auto H = batch_conditional_H(scalar_model(), g);
  EXPECT_NEAR(H[0](0, 0), 1.0, 1e-12);
  EXPECT_NEAR(H[1](0, 0), 1.0, 1e-12);
}

TEST(EstimatorOracle, RecursionBatchAndLiftedAgree) {
  RandomSource rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + trial % 4, n = 2 + trial % 5;
    SystemModel model = generate_random_instance(100 + trial, m, 1, n).model;
    model.A = rng.uniform_matrix(m, m) - Matrix::Constant(m, m, 0.5) + Matrix::Identity(m, m);
    model.Sigma1 = random_spd(rng, m);
    model.SigmaV = random_spd(rng, m);
    const GainSequence g = random_gains(rng, m, n);
    const auto ladder = propagate_open_loop(model);
    const auto Hr = recursive_H(ladder, g);
    const auto Hb = batch_conditional_H(model, g);
    const auto Ho = oracle::conditioning_H(model.A, model.Sigma1, model.SigmaV, g);
    for (int k = 0; k < n; ++k) {
      const double scale = std::max(1.0, Ho[k].norm());
      EXPECT_LT((Hr[k] - Ho[k]).norm() / scale, 1e-8) << "trial " << trial << " k " << k + 1;
      EXPECT_LT((Hb[k] - Ho[k]).norm() / scale, 1e-8) << "trial " << trial << " k " << k + 1;
    }
  }
}

TEST(EstimatorOracle, BoundsAndMonotoneInformation) {
  RandomSource rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 3, n = 6;
    const auto model = generate_random_instance(trial, m, 1, n).model;
    const auto ladder = propagate_open_loop(model);
    const auto H = recursive_H(ladder, random_gains(rng, m, n));
    Matrix prev = Matrix::Zero(m, m);
    for (int k = 1; k <= n; ++k) {
      const Matrix& Hk = H[k - 1];
      const double scale = ladder.at(k).norm();
      auto min_eig = [](const Matrix& X) { return Eigen::SelfAdjointEigenSolver<Matrix>(X).eigenvalues().minCoeff(); };
      EXPECT_GE(min_eig(Hk), -1e-10 * scale);
      EXPECT_GE(min_eig(ladder.at(k) - Hk), -1e-10 * scale);
      EXPECT_GE(min_eig(Hk - model.A * prev * model.A.transpose()), -1e-10 * scale);
      prev = Hk;
    }
  }
}

TEST(EstimatorSchedule, MatchesStepwiseFilter) {
  RandomSource rng(9);
  const int m = 3, n = 5;
  const auto model = generate_random_instance(9, m, 1, n).model;
  const auto ladder = propagate_open_loop(model);
  const GainSequence g = random_gains(rng, m, n);
  const EstimatorSchedule sched(ladder, g);
  EstimatorState st = initial_estimator_state(m);
  Vector xhat = Vector::Zero(m);
  for (int k = 1; k <= n; ++k) {
    const Vector x = rng.normal_vector(m);
    st = estimator_step(st, g[k - 1], x, ladder, k);
    xhat = sched.update(k, xhat, g[k - 1].transpose() * x);
    EXPECT_LT((xhat - st.xhat).norm(), 1e-10 * (1 + st.xhat.norm()));
    EXPECT_LT(rel(sched.H()[k - 1], st.H), 1e-12);
  }
}

}  // namespace
}  // namespace securesense
