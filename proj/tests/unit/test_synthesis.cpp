#include <gtest/gtest.h>

#include <random>

#include "bddc/errors.hpp"
#include "bddc/synthesis.hpp"
#include "bddc/systems.hpp"

namespace bddc {
namespace {

ResidualQuadBound zero_bound(int n_x, int n_u) {
  ResidualQuadBound q;
  q.Q = Eigen::MatrixXd::Zero(n_x + n_u, n_x + n_u);
  q.n_x = n_x;
  q.n_u = n_u;
  q.delta = 0.05;
  return q;
}

ResidualQuadBound individual_bound(const BilinearSystemd& truth, const EstimateSet& est, const InputBox& box) {
  SpectralBoundSet b;
  b.delta = 0.05;
  b.eps_A = (est.A - truth.A).norm();
  for (int i = 0; i < truth.input_dim(); ++i) {
    b.eps_B.push_back((est.B[i] - truth.B[i]).norm());
    b.eps_b0.push_back((est.B0.col(i) - truth.B0.col(i)).norm());
  }
  b.burn_in_ok.assign(truth.input_dim() + 1, true);
  return qdelta_individual(b, box, truth.state_dim());
}

TEST(StateRegionTest, NormBallAndGeneralRegion) {
  const StateRegion ball = StateRegion::NormBall(0.5, 3);
  EXPECT_TRUE(ball.contains(Eigen::Vector3d(0.4, 0.4, 0.4)));
  EXPECT_TRUE(ball.contains(Eigen::Vector3d(0.5, 0.5, 0.0)));  // boundary
  EXPECT_FALSE(ball.contains(Eigen::Vector3d(0.5, 0.5, 0.1)));
  EXPECT_NEAR(ball.margin(Eigen::Vector3d::Zero()), 0.5, 1e-15);
  // Shifted ball (x - 1)^2 <= 4 : Qx = -1, Sx = 1, Rx = 3.
  const StateRegion shifted(-Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Ones(1), 3.0);
  EXPECT_TRUE(shifted.contains(Eigen::VectorXd::Constant(1, 2.9)));
  EXPECT_FALSE(shifted.contains(Eigen::VectorXd::Constant(1, -1.1)));
  EXPECT_THROW(StateRegion(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), 1.0), ParameterError);
}

TEST(SynthesisTest, ExactModelFillsTheNormBall) {
  const BilinearSystemd sys = academic_system();
  const StateRegion region = StateRegion::NormBall(0.1, 2);
  const ControllerSolution sol = synthesize(sys, region, zero_bound(2, 1), sdp::BarrierSdpSolver());
  ASSERT_TRUE(sol.feasible()) << sol.diagnostics;
  // The RoA must lie inside the ball, so trace(P) <= 2 c.
  EXPECT_LE(sol.P.trace(), 0.2 + 1e-6);
  EXPECT_GT(sol.P.trace(), 0.19);
  EXPECT_GT(sol.main_lmi_min_eig, 0.0);
  EXPECT_LE(sol.invariance_lmi_max_eig, 1e-7);
  const RoaReport roa = roa_report(sol, region, 500, 1);
  EXPECT_TRUE(roa.contained());
  EXPECT_TRUE(control_input(sol, Eigen::Vector2d::Zero()).isZero(0.0));
}

TEST(SynthesisTest, HugeResidualBoundIsInfeasible) {
  const BilinearSystemd sys = academic_system();
  ResidualQuadBound q = zero_bound(2, 1);
  q.Q = 1e6 * Eigen::MatrixXd::Identity(3, 3);
  const ControllerSolution sol = synthesize(sys, StateRegion::NormBall(0.1, 2), q, sdp::BarrierSdpSolver());
  EXPECT_EQ(sol.status, SynthesisStatus::kInfeasible);
}

TEST(SynthesisTest, InfiniteBoundIsRejected) {
  ResidualQuadBound q = zero_bound(2, 1);
  q.infeasible = true;
  EXPECT_THROW(synthesize(academic_system(), StateRegion::NormBall(0.1, 2), q, sdp::BarrierSdpSolver()),
               ParameterError);
}

// Property: with a sound residual bound, V(x) = x^T P^{-1} x decreases along
// the true dynamics everywhere in the RoA.
TEST(SynthesisTest, CertificateHoldsOnPerturbedTruth) {
  const BilinearSystemd est = academic_system();
  BilinearSystemd truth = est;
  truth.A(0, 1) += 0.004;
  truth.B[0](1, 0) -= 0.003;
  truth.B0(0, 0) += 0.002;
  const InputBox box = InputBox::Symmetric(1, 2.0);
  const StateRegion region = StateRegion::NormBall(0.1, 2);
  const ControllerSolution sol =
      synthesize(est, region, individual_bound(truth, est, box), sdp::BarrierSdpSolver());
  ASSERT_TRUE(sol.feasible()) << sol.diagnostics;
  Engine rng = make_engine(9);
  for (int k = 0; k < 2000; ++k) {
    const Eigen::VectorXd x = sample_in_roa(sol, rng);
    if (x.norm() < 1e-9) continue;
    const Eigen::VectorXd u = control_input(sol, x);
    const Eigen::VectorXd next = step(truth, x, u);
    ASSERT_LT(lyapunov_value(sol, next), lyapunov_value(sol, x)) << x.transpose();
  }
  const ClosedLoopCertificate c =
      simulate_closed_loop(truth, sol, region, sample_in_roa(sol, rng));
  EXPECT_TRUE(c.passed) << c.failure;
  EXPECT_TRUE(c.monotone);
  EXPECT_LT(c.rho, 1.0);
}

TEST(SynthesisTest, InvariancePropertyOfRoa) {
  const StateRegion region = StateRegion::NormBall(0.3, 2);
  const ControllerSolution sol =
      synthesize(academic_system(), region, zero_bound(2, 1), sdp::BarrierSdpSolver());
  ASSERT_TRUE(sol.feasible());
  for (const Eigen::VectorXd& x : roa_boundary(sol, 200)) {
    EXPECT_NEAR(lyapunov_value(sol, x), 1.0, 1e-9);
    EXPECT_TRUE(region.contains(x, 1e-7));
  }
}

TEST(SynthesisTest, LmiBlockSizes) {
  sdp::SdpProblem p;
  const LmiVariables v = declare_lmi_variables(p, 3, 2);
  const StateRegion region = StateRegion::NormBall(1.0, 3);
  const BilinearSystemd sys = random_system(3, 2, 4);
  const sdp::AffineMatrix M = assemble_lmi_main(v, sys, region, Eigen::MatrixXd::Identity(5, 5));
  EXPECT_EQ(M.rows(), 3 + 2 + 5 + 3 + 6);
  EXPECT_TRUE(M.is_symmetric());
  const sdp::AffineMatrix N = assemble_lmi_invariance(v, region);
  EXPECT_EQ(N.rows(), 4);
  EXPECT_TRUE(N.is_symmetric());
}

}  // namespace
}  // namespace bddc
