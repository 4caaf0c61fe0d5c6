#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "bddc/errors.hpp"
#include "bddc/sdp.hpp"

namespace bddc::sdp {
namespace {

Eigen::MatrixXd I(int n) { return Eigen::MatrixXd::Identity(n, n); }

AffineMatrix scalar(double v) { return AffineMatrix(Eigen::MatrixXd::Constant(1, 1, v)); }

double min_eig(const Eigen::MatrixXd& M) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff();
}

// Checks every LMI at the returned point, independently of the solver.
void expect_strictly_feasible(const SdpProblem& p, const SolveResult& r) {
  for (const auto& c : p.constraints()) EXPECT_GT(min_eig(c.F.evaluate(r.y)), 0.0) << c.name;
}

TEST(AffineMatrixTest, EvaluateAndAlgebra) {
  SdpProblem p;
  const AffineMatrix X = p.add_matrix("X", 2, 3);
  const AffineMatrix s = p.add_scalar("s");
  ASSERT_EQ(p.num_variables(), 7);
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(7, 1.0, 7.0);
  Eigen::MatrixXd Xv(2, 3);
  Xv << 1, 3, 5, 2, 4, 6;  // column-major numbering
  EXPECT_EQ(X.evaluate(y), Xv);
  EXPECT_EQ(X.transpose().evaluate(y), Xv.transpose());
  EXPECT_DOUBLE_EQ(s.evaluate(y)(0, 0), 7.0);

  Eigen::MatrixXd M(2, 2);
  M << 1, -1, 0.5, 2;
  EXPECT_LT((kron(M, X).evaluate(y) - Eigen::kroneckerProduct(M, Xv)).norm(), 1e-14);
  EXPECT_LT(((M * X - 2.0 * X).evaluate(y) - (M * Xv - 2.0 * Xv)).norm(), 1e-14);
  const AffineMatrix B = blocks({{X, X}, {2.0 * X, -X}});
  EXPECT_EQ(B.rows(), 4);
  EXPECT_EQ(B.cols(), 6);
  EXPECT_EQ(B.block(2, 3, 2, 3).evaluate(y), -Xv);
  EXPECT_DOUBLE_EQ(trace(p.add_symmetric("P", 3)).coefficient(7 + 0)(0, 0), 1.0);
  EXPECT_THROW(blocks({{X, s}}), DimensionError);
}

TEST(AffineMatrixTest, SymmetricVariableIsSymmetric) {
  SdpProblem p;
  const AffineMatrix P = p.add_symmetric("P", 4);
  EXPECT_EQ(p.num_variables(), 10);
  EXPECT_TRUE(P.is_symmetric());
  EXPECT_THROW(p.add_psd("bad", p.add_matrix("X", 2, 2)), DimensionError);
}

TEST(BarrierSolverTest, TwoByTwoCorrelationBound) {
  // max x s.t. [[1, x], [x, 1]] >= 0 has optimum 1.
  SdpProblem p;
  const AffineMatrix x = p.add_scalar("x");
  p.add_psd("corr", blocks({{scalar(1.0), x}, {x, scalar(1.0)}}));
  p.maximize(x);
  const SolveResult r = BarrierSdpSolver().solve(p);
  ASSERT_EQ(r.status, SolveStatus::kOptimal) << r.message;
  EXPECT_NEAR(r.objective, 1.0, 1e-6);
  expect_strictly_feasible(p, r);
}

TEST(BarrierSolverTest, PolyhedralOptimum) {
  // max y1 + 2 y2, 0 <= y <= 1, y1 + y2 <= 1.5: optimum 2.5 at (0.5, 1).
  SdpProblem p;
  const AffineMatrix y1 = p.add_scalar("y1");
  const AffineMatrix y2 = p.add_scalar("y2");
  p.add_psd("y1>=0", y1);
  p.add_psd("y2>=0", y2);
  p.add_psd("y1<=1", scalar(1.0) - y1);
  p.add_psd("y2<=1", scalar(1.0) - y2);
  p.add_psd("sum", scalar(1.5) - y1 - y2);
  p.maximize(y1 + 2.0 * y2);
  const SolveResult r = BarrierSdpSolver().solve(p);
  ASSERT_EQ(r.status, SolveStatus::kOptimal) << r.message;
  EXPECT_NEAR(r.objective, 2.5, 1e-6);
  EXPECT_NEAR(r.y(0), 0.5, 1e-5);
  EXPECT_NEAR(r.y(1), 1.0, 1e-5);
}

TEST(BarrierSolverTest, LargestEigenvalueOfRandomMatrices) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int n = 2; n <= 6; ++n) {
    Eigen::MatrixXd G = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return n01(rng); });
    const Eigen::MatrixXd C = G + G.transpose();
    // max -t s.t. t I - C >= 0.
    SdpProblem p;
    const AffineMatrix t = p.add_scalar("t");
    p.add_psd("bound", kron(I(n), t) - AffineMatrix(C));
    p.maximize(-t);
    const SolveResult r = BarrierSdpSolver().solve(p);
    ASSERT_EQ(r.status, SolveStatus::kOptimal) << r.message;
    const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C).eigenvalues().maxCoeff();
    EXPECT_NEAR(-r.objective, lmax, 1e-6 * std::max(1.0, std::abs(lmax)));
  }
}

TEST(BarrierSolverTest, MaxTraceUnderIdentity) {
  SdpProblem p;
  const AffineMatrix P = p.add_symmetric("P", 3);
  p.add_psd("P>=0", P);
  p.add_psd("P<=I", AffineMatrix(I(3)) - P);
  p.maximize(trace(P));
  const SolveResult r = BarrierSdpSolver().solve(p);
  ASSERT_EQ(r.status, SolveStatus::kOptimal) << r.message;
  EXPECT_NEAR(r.objective, 3.0, 1e-6);
  expect_strictly_feasible(p, r);
}

TEST(BarrierSolverTest, DetectsInfeasibility) {
  SdpProblem p;
  const AffineMatrix x = p.add_scalar("x");
  p.add_psd("x>=0", x);
  p.add_psd("x<=-1", scalar(-1.0) - x);
  p.maximize(x);
  EXPECT_EQ(BarrierSdpSolver().solve(p).status, SolveStatus::kInfeasible);

  // Matrix version: P >= I and P <= 0.5 I.
  SdpProblem q;
  const AffineMatrix P = q.add_symmetric("P", 2);
  q.add_psd("lower", P - AffineMatrix(I(2)));
  q.add_psd("upper", AffineMatrix(0.5 * I(2)) - P);
  q.maximize(trace(P));
  EXPECT_EQ(BarrierSdpSolver().solve(q).status, SolveStatus::kInfeasible);
}

TEST(BarrierSolverTest, FeasibilityProblemWithoutObjective) {
  SdpProblem p;
  const AffineMatrix P = p.add_symmetric("P", 2);
  Eigen::Matrix2d A;
  A << 0.5, 0.2, 0.0, 0.7;
  // Lyapunov: P > I, A^T P A - P < 0.
  p.add_psd("P>I", P - AffineMatrix(I(2)));
  p.add_psd("decrease", P - A.transpose() * P * A - AffineMatrix(1e-3 * I(2)));
  const SolveResult r = BarrierSdpSolver().solve(p);
  ASSERT_EQ(r.status, SolveStatus::kOptimal) << r.message;
  expect_strictly_feasible(p, r);
}

TEST(SdpProblemTest, TripletExportListsEveryPiece) {
  SdpProblem p;
  const AffineMatrix x = p.add_scalar("x");
  p.add_psd("corr", blocks({{scalar(1.0), x}, {x, scalar(1.0)}}));
  p.maximize(x);
  std::ostringstream out;
  p.write_triplets(out);
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("bddc-sdp 1\n", 0), 0u);
  EXPECT_NE(s.find("variables 1"), std::string::npos);
  EXPECT_NE(s.find("objective 0 1"), std::string::npos);
  EXPECT_NE(s.find("constraint 0 corr 2"), std::string::npos);
  EXPECT_NE(s.find("F 0 1 0 1 1"), std::string::npos);
  EXPECT_NE(s.find("F 0 0 0 0 1"), std::string::npos);
}

TEST(SdpProblemTest, StatusNames) {
  EXPECT_EQ(to_string(SolveStatus::kOptimal), "feasible");
  EXPECT_EQ(to_string(SolveStatus::kInfeasible), "infeasible");
}

}  // namespace
}  // namespace bddc::sdp
