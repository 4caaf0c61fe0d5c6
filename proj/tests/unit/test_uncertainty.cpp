#include <gtest/gtest.h>

#include <random>

#include "bddc/errors.hpp"
#include "bddc/identification.hpp"
#include "bddc/systems.hpp"
#include "bddc/uncertainty.hpp"

namespace bddc {
namespace {

double min_eig(const Eigen::MatrixXd& M) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (M + M.transpose())).eigenvalues().minCoeff();
}

// Perturbs every parameter of `sys` by a random matrix of norm `size`.
EstimateSet perturbed(const BilinearSystemd& sys, double size, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  auto noise = [&](int r, int c) {
    Eigen::MatrixXd M = Eigen::MatrixXd::NullaryExpr(r, c, [&]() { return n01(rng); });
    return Eigen::MatrixXd(size * M / M.norm());
  };
  EstimateSet est = sys;
  const int n = sys.state_dim();
  est.A += noise(n, n);
  est.B0 += noise(n, sys.input_dim());
  for (auto& b : est.B) b += noise(n, n);
  return est;
}

Eigen::VectorXd sample_box(const InputBox& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01;
  Eigen::VectorXd u(box.dim());
  for (int i = 0; i < box.dim(); ++i) u(i) = box.lower(i) + u01(rng) * (box.upper(i) - box.lower(i));
  return u;
}

TEST(UncertaintyTest, BoxExtremes) {
  InputBox box{Eigen::Vector2d(-1.0, -0.5), Eigen::Vector2d(3.0, 2.0)};
  const BoxExtremes e = box_extremes(box);
  // sum(u) ranges over [-1.5, 5]: |1 - sum| peaks at 4.
  EXPECT_DOUBLE_EQ(e.m1, 4.0);
  EXPECT_DOUBLE_EQ(e.m2(0), 3.0);
  EXPECT_DOUBLE_EQ(e.m2(1), 2.0);
  EXPECT_TRUE(box.contains(Eigen::Vector2d(0.0, 2.0)));
  EXPECT_FALSE(box.contains(Eigen::Vector2d(0.0, 2.1)));
}

TEST(UncertaintyTest, InvalidBoxesThrow) {
  EXPECT_THROW(box_extremes({Eigen::Vector2d(0.5, -1.0), Eigen::Vector2d(1.0, 1.0)}), ParameterError);
  EXPECT_THROW(box_extremes({Eigen::Vector2d(1.0, -1.0), Eigen::Vector2d(-1.0, 1.0)}), ParameterError);
  EXPECT_THROW(box_extremes({Eigen::VectorXd(0), Eigen::VectorXd(0)}), DimensionError);
}

TEST(UncertaintyTest, IndividualQMatchesHandComputation) {
  SpectralBoundSet b;
  b.delta = 0.05;
  b.eps_A = 0.1;
  b.eps_B = {0.2, 0.3};
  b.eps_b0 = {0.05, 0.07};
  b.burn_in_ok = {true, true, true};
  const InputBox box = InputBox::Symmetric(2, 1.5);
  const ResidualQuadBound q = qdelta_individual(b, box, 3);
  ASSERT_FALSE(q.infeasible);
  // m1 = 1 + 3 = 4, m2 = (1.5, 1.5).
  const double cx = 4.0 * 0.1 + 1.5 * 0.2 + 1.5 * 0.3;
  const double cu = 0.05 * 0.05 + 0.07 * 0.07;
  Eigen::VectorXd diag(5);
  diag << 2 * cx * cx, 2 * cx * cx, 2 * cx * cx, 2 * cu, 2 * cu;
  EXPECT_LT((q.Q - Eigen::MatrixXd(diag.asDiagonal())).norm(), 1e-14);
  EXPECT_EQ(q.provenance, QuadBoundProvenance::kIndividual);
}

TEST(UncertaintyTest, InfiniteBoundMarksInfeasible) {
  SpectralBoundSet b;
  b.eps_A = kInfinity;
  b.eps_B = {1.0};
  b.eps_b0 = {1.0};
  const ResidualQuadBound q = qdelta_individual(b, InputBox::Symmetric(1, 1.0), 2);
  EXPECT_TRUE(q.infeasible);
  EXPECT_TRUE(overestimate_norm(q).infeasible);
}

// Property: when the true errors meet the bounds exactly, the quadratic form
// covers ||r(x, u)||^2 on random points of the box.
TEST(UncertaintyTest, ResidualSoundnessForBothConstructions) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 30; ++trial) {
    const int n_x = 1 + trial % 4;
    const int n_u = 1 + trial % 3;
    const BilinearSystemd sys = random_system(n_x, n_u, 100 + trial);
    const EstimateSet est = perturbed(sys, 0.05 + 0.01 * trial, rng);
    const InputBox box = InputBox::Symmetric(n_u, 0.5 + trial % 2);

    SpectralBoundSet sb;
    sb.delta = 0.1;
    sb.eps_A = (est.A - sys.A).norm();  // Frobenius dominates spectral
    EllipsoidBoundSet eb;
    eb.delta = 0.1;
    eb.E_A = (est.A - sys.A).transpose() * (est.A - sys.A);
    for (int i = 0; i < n_u; ++i) {
      sb.eps_B.push_back((est.B[i] - sys.B[i]).norm());
      sb.eps_b0.push_back((est.B0.col(i) - sys.B0.col(i)).norm());
      Eigen::MatrixXd err(n_x + 1, n_x);
      err.topRows(n_x) = (est.B[i] - sys.B[i]).transpose();
      err.row(n_x) = (est.B0.col(i) - sys.B0.col(i)).transpose();
      eb.E_B.push_back(err * err.transpose());
      eb.samples_ok.push_back(true);
      eb.finite.push_back(true);
    }
    sb.burn_in_ok.assign(n_u + 1, true);
    eb.samples_ok.push_back(true);
    eb.finite.push_back(true);

    const ResidualQuadBound qi = qdelta_individual(sb, box, n_x);
    const ResidualQuadBound qe = qdelta_ellipsoidal(eb, box);
    const ResidualQuadBound qo = overestimate_norm(qe);
    EXPECT_GE(min_eig(qo.Q - qe.Q), -1e-12);
    for (int k = 0; k < 2000; ++k) {
      Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(n_x, [&]() { return n01(rng); }) * 3.0;
      const Eigen::VectorXd u = sample_box(box, rng);
      Eigen::VectorXd z(n_x + n_u);
      z << x, u;
      const double r2 = model_residual(sys, est, x, u).squaredNorm();
      const double slack = 1e-10 * std::max(1.0, r2);
      ASSERT_LE(r2, z.dot(qi.Q * z) + slack) << "individual, trial " << trial;
      ASSERT_LE(r2, z.dot(qe.Q * z) + slack) << "ellipsoidal, trial " << trial;
    }
  }
}

TEST(UncertaintyTest, EllipsoidalQWithoutCrossBlocks) {
  // n_x = 1, E_A = 0, E_B = I_2, box [-2, 2]: congruence diag(2, 1), Q = 2 diag(4, 1).
  EllipsoidBoundSet b;
  b.delta = 0.05;
  b.E_A = Eigen::MatrixXd::Zero(1, 1);
  b.E_B = {Eigen::MatrixXd::Identity(2, 2)};
  b.samples_ok = {true, true};
  b.finite = {true, true};
  const ResidualQuadBound q = qdelta_ellipsoidal(b, InputBox::Symmetric(1, 2.0));
  EXPECT_LT((q.Q - Eigen::Vector2d(8.0, 2.0).asDiagonal().toDenseMatrix()).norm(), 1e-14);

  // E_B = 0: only the A term, 2 m1^2 E_A with m1 = 3.
  b.E_A = Eigen::MatrixXd::Constant(1, 1, 0.5);
  b.E_B = {Eigen::MatrixXd::Zero(2, 2)};
  const ResidualQuadBound qa = qdelta_ellipsoidal(b, InputBox::Symmetric(1, 2.0));
  EXPECT_NEAR(qa.Q(0, 0), 2.0 * 9.0 * 0.5, 1e-14);
  EXPECT_EQ(qa.Q(1, 1), 0.0);
}

TEST(UncertaintyTest, EllipsoidalQIsOrderInvariantAndPsd) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 200; ++trial) {
    EllipsoidBoundSet b;
    auto psd = [&](int n) {
      Eigen::MatrixXd G = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return n01(rng); });
      return Eigen::MatrixXd(G * G.transpose());
    };
    b.E_A = psd(3);
    b.E_B = {psd(4), psd(4)};
    const InputBox box{Eigen::Vector2d(-1.0, -3.0), Eigen::Vector2d(2.0, 1.0)};
    const ResidualQuadBound q = qdelta_ellipsoidal(b, box);
    EXPECT_GE(min_eig(q.Q), -1e-12 * q.Q.norm());
    std::swap(b.E_B[0], b.E_B[1]);
    const InputBox swapped{Eigen::Vector2d(-3.0, -1.0), Eigen::Vector2d(1.0, 2.0)};
    const ResidualQuadBound qs = qdelta_ellipsoidal(b, swapped);
    Eigen::PermutationMatrix<5> perm;
    perm.indices() << 0, 1, 2, 4, 3;
    EXPECT_LT((perm * qs.Q * perm.transpose() - q.Q).norm(), 1e-12 * q.Q.norm());
  }
}

TEST(UncertaintyTest, ClipAndRegularize) {
  Eigen::Matrix2d Q;
  Q << 1.0, 0.0, 0.0, -1e-15;
  EXPECT_GE(min_eig(clip_psd(Q)), 0.0);
  Q(1, 1) = -0.1;
  EXPECT_THROW(clip_psd(Q), ParameterError);
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_GT(min_eig(regularized(Z)), 0.0);
}

TEST(UncertaintyTest, ProvenanceNamesRoundTrip) {
  for (auto p : {QuadBoundProvenance::kIndividual, QuadBoundProvenance::kEllipsoidal,
                 QuadBoundProvenance::kNormOverestimate})
    EXPECT_EQ(provenance_from_string(to_string(p)), p);
  EXPECT_THROW(provenance_from_string("loose"), ConfigError);
}

}  // namespace
}  // namespace bddc
