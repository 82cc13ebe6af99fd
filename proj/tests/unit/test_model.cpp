#include <gtest/gtest.h>

#include "securesense/model.hpp"
#include "test_support.hpp"

namespace securesense {
namespace {

using testing::scalar_model;
using testing::scalar_objective;

TEST(Validate, ScalarOnesIsValid) {
  EXPECT_TRUE(validate(scalar_model(), scalar_objective()).ok());
}

TEST(Validate, ZeroAIsSingular) {
  SystemModel m = scalar_model();
  m.A(0, 0) = 0.0;
  const auto rep = validate(m, scalar_objective());
  EXPECT_TRUE(rep.contains("A singular"));
}

TEST(Validate, ZeroRFIsNotPositiveDefinite) {
  FriendlyObjective o = scalar_objective();
  o.RF(0, 0) = 0.0;
  EXPECT_TRUE(validate(scalar_model(), o).contains("R_F not positive definite"));
}

TEST(Validate, CollectsEveryIssue) {
  SystemModel m = scalar_model();
  m.A(0, 0) = 0.0;
  m.SigmaV(0, 0) = -1.0;
  FriendlyObjective o = scalar_objective();
  o.RF(0, 0) = 0.0;
  const auto rep = validate(m, o);
  EXPECT_GE(rep.issues.size(), 3u);
}

TEST(Validate, ShapeMismatchAndAttackerChecks) {
  SystemModel m = scalar_model();
  m.B = Matrix::Ones(2, 1);
  EXPECT_FALSE(validate(m, scalar_objective()).ok());

  const AttackerSpec bad{Matrix::Ones(1, 1), Matrix::Ones(1, 1), -0.5, Vector::Ones(1)};
  const std::vector<AttackerSpec> atk{bad};
  EXPECT_FALSE(validate(scalar_model(), scalar_objective(), atk).ok());
}

TEST(Generator, DeterministicForSeed) {
  const auto a = generate_random_instance(7, 4, 2, 10).model;
  const auto b = generate_random_instance(7, 4, 2, 10).model;
  EXPECT_EQ(a.A, b.A);
  EXPECT_EQ(a.B, b.B);
  EXPECT_EQ(a.Sigma1, b.Sigma1);
  EXPECT_EQ(a.SigmaV, b.SigmaV);
  EXPECT_NE(a.A, generate_random_instance(8, 4, 2, 10).model.A);
}

TEST(Generator, ScalarSigma1InRange) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = generate_random_instance(seed, 1, 1, 3).model;
    EXPECT_GE(m.Sigma1(0, 0), 2.0);
    EXPECT_LE(m.Sigma1(0, 0), 3.0);
    EXPECT_GE(m.SigmaV(0, 0), 20.0);
    EXPECT_LE(m.SigmaV(0, 0), 30.0);
  }
}

TEST(Generator, BenchmarkSizeIsValidAndDiagonallyDominant) {
  const auto gen = generate_random_instance(0, 8, 2, 100);
  const SystemModel& m = gen.model;
  const FriendlyObjective o{Matrix::Identity(8, 8), Matrix::Identity(2, 2)};
  EXPECT_TRUE(validate(m, o).ok());
  EXPECT_GT(gen.diagnostics.a_singularity_ratio, 1e-12);
  auto dominant = [](const Matrix& S) {
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
      const double off = S.row(i).cwiseAbs().sum() - std::abs(S(i, i));
      if (!(S(i, i) > off)) return false;
    }
    return true;
  };
  EXPECT_TRUE(dominant(m.Sigma1));
  EXPECT_TRUE(dominant(m.SigmaV / 10.0));
  EXPECT_GE(m.A.minCoeff(), 0.0);
  EXPECT_LE(m.A.maxCoeff(), 0.1);
  EXPECT_LE(m.B.maxCoeff(), 0.1);
}

TEST(Generator, EveryInstanceValidates) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = generate_random_instance(seed, 3, 2, 5).model;
    const FriendlyObjective o{Matrix::Identity(3, 3), Matrix::Identity(2, 2)};
    EXPECT_TRUE(validate(m, o).ok()) << "seed " << seed;
  }
}

TEST(Generator, RejectsNonPositiveDimensions) {
  EXPECT_THROW((void)generate_random_instance(1, 0, 1, 1), InputError);
  EXPECT_THROW((void)generate_random_instance(1, 1, 1, 0), InputError);
}

TEST(ReferenceSetup, WeightBlocks) {
  const auto s = make_reference_setup(3, 8, 2, 20);
  ASSERT_EQ(s.attackers.size(), 2u);
  Matrix QF = Matrix::Zero(8, 8);
  QF.topLeftCorner(4, 4).setIdentity();
  EXPECT_EQ(s.objective.QF, QF);
  Matrix Q1 = Matrix::Zero(8, 8), Q2 = Matrix::Zero(8, 8);
  Q1.bottomRightCorner(2, 2).setIdentity();
  Q2.bottomRightCorner(4, 4).setIdentity();
  EXPECT_EQ(s.attackers[0].QA, Q1);
  EXPECT_EQ(s.attackers[1].QA, Q2);
  for (const auto& a : s.attackers) {
    EXPECT_DOUBLE_EQ(a.lambda, 0.1);
    EXPECT_EQ(a.RA, Matrix::Identity(2, 2));
    EXPECT_EQ(a.z.size(), 8);
  }
  EXPECT_NE(s.attackers[0].z, s.attackers[1].z);
  EXPECT_TRUE(validate(s.model, s.objective, s.attackers).ok());
}

TEST(RandomSource, NormalMomentsAreSane) {
  RandomSource rng(11);
  double sum = 0, sum2 = 0;
  constexpr int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  EXPECT_NEAR(sum / N, 0.0, 0.01);
  EXPECT_NEAR(sum2 / N, 1.0, 0.01);
}

}  // namespace
}  // namespace securesense
