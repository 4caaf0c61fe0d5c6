#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bddc/errors.hpp"
#include "bddc/lifting.hpp"
#include "bddc/subgaussian_check.hpp"

namespace bddc {
namespace {

TEST(LiftingTest, LiftAppliesCoordinateMaps) {
  const LiftingSpec spec = LiftingSpec::SineAugmented(3, {0, 2});
  EXPECT_EQ(spec.lifted_dim(), 5);
  const Eigen::Vector3d z(0.3, -1.0, 2.0);
  const Eigen::VectorXd x = lift(spec, z);
  EXPECT_DOUBLE_EQ(x(0), 0.3);
  EXPECT_DOUBLE_EQ(x(2), 2.0);
  EXPECT_DOUBLE_EQ(x(3), std::sin(0.3));
  EXPECT_DOUBLE_EQ(x(4), std::sin(2.0));
  EXPECT_TRUE(lift(spec, Eigen::Vector3d::Zero()).isZero(0.0));

  Eigen::MatrixXd Z(2, 3);
  Z << 0.3, -1.0, 2.0, 1.0, 1.0, 1.0;
  const Eigen::MatrixXd X = lift_rows(spec, Z);
  EXPECT_EQ(X.row(0).transpose(), x);
  EXPECT_THROW(lift(spec, Eigen::Vector2d::Zero()), DimensionError);
}

TEST(LiftingTest, InvalidSpecThrows) {
  LiftingSpec spec;
  spec.base_dim = 2;
  spec.coordinates = {{CoordinateFn::kIdentity, 2}};
  EXPECT_THROW(validate(spec), DimensionError);
}

TEST(LiftingTest, PendulumModelIsExactOnFirstTwoRows) {
  const PendulumParameters p;
  const BilinearSystemd sys = pendulum_lifted_system(p);
  const LiftingSpec spec = pendulum_lifting();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector2d z(U(rng), U(rng));
    const double u = U(rng);
    const Eigen::VectorXd x_next = step(sys, lift(spec, z), Eigen::VectorXd::Constant(1, u));
    const Eigen::Vector2d z_next = pendulum_step(p, z, u);
    EXPECT_NEAR(x_next(0), z_next(0), 1e-12);
    EXPECT_NEAR(x_next(1), z_next(1), 1e-12);
  }
  // Additive input: A_1 = B_1 - A = 0.
  EXPECT_TRUE(sys.coupling(0).isZero(0.0));
}

TEST(LiftingTest, PendulumStepFormula) {
  PendulumParameters p;
  p.damping = 0.2;
  const Eigen::Vector2d z(0.5, -0.3);
  const Eigen::Vector2d next = pendulum_step(p, z, 1.5);
  const double Ts = p.sample_time, ml2 = p.mass * p.length * p.length;
  EXPECT_NEAR(next(0), 0.5 + Ts * -0.3, 1e-15);
  EXPECT_NEAR(next(1), -0.3 + Ts * p.gravity / p.length * std::sin(0.5) - Ts * 0.2 / ml2 * -0.3 + Ts / ml2 * 1.5,
              1e-15);
}

TEST(VarianceProxyTest, PiecewiseAndContinuous) {
  EXPECT_DOUBLE_EQ(variance_proxy_bound(0.5), 2.0);
  EXPECT_DOUBLE_EQ(variance_proxy_bound(2.0), 8.0);
  EXPECT_NEAR(variance_proxy_bound(1.0 - 1e-12), variance_proxy_bound(1.0 + 1e-12), 1e-10);
  EXPECT_DOUBLE_EQ(variance_proxy_bound(Eigen::Vector2d(0.5, 2.0)), 8.0);
  EXPECT_THROW(variance_proxy_bound(-1.0), ParameterError);
  EXPECT_DOUBLE_EQ(gaussian_lifted_variance_proxy(pendulum_lifting(), 0.5), 2.0 * 0.25);
}

// Independent check of the proxy by quadrature of the moment generating
// function of (x, sin x), x ~ U[-a, a].
TEST(VarianceProxyTest, DominatesQuadratureMgf) {
  for (double a : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    const double s2 = variance_proxy_bound(a);
    const int n = 4000;
    for (int d = 0; d < 48; ++d) {
      const double th = std::numbers::pi * d / 48.0;
      const double v1 = std::cos(th), v2 = std::sin(th);
      for (double lam = -4.0; lam <= 4.0; lam += 0.25) {
        double mgf = 0.0;
        for (int k = 0; k < n; ++k) {
          const double x = -a + (k + 0.5) * 2.0 * a / n;
          mgf += std::exp(lam * (v1 * x + v2 * std::sin(x)));
        }
        mgf /= n;
        ASSERT_LE(std::log(mgf), lam * lam * s2 / 2.0 + 1e-9) << "a=" << a << " lam=" << lam;
      }
    }
  }
}

TEST(SubGaussianCheckTest, GaussianPassesAtTrueVarianceAndFailsFarBelow) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd S = Eigen::MatrixXd::NullaryExpr(20000, 2, [&]() { return n01(rng); });
  SubGaussianCheckOptions opt;
  opt.bootstrap = 200;
  opt.seed = 1;
  EXPECT_TRUE(empirical_subgaussian_check(S, 1.0, opt).pass);
  EXPECT_FALSE(empirical_subgaussian_check(S, 0.1, opt).pass);
}

TEST(SubGaussianCheckTest, UniformSineAtProxy) {
  SubGaussianCheckOptions opt;
  opt.bootstrap = 200;
  opt.seed = 2;
  const Eigen::MatrixXd S = uniform_sine_samples(2.0, 20000, 11);
  ASSERT_EQ(S.cols(), 2);
  EXPECT_TRUE((S.col(1).array() - S.col(0).array().sin()).abs().maxCoeff() < 1e-15);
  EXPECT_LE(S.col(0).cwiseAbs().maxCoeff(), 2.0);
  EXPECT_TRUE(empirical_subgaussian_check(S, variance_proxy_bound(2.0), opt).pass);
  EXPECT_FALSE(empirical_subgaussian_check(S, variance_proxy_bound(2.0) / 10.0, opt).pass);
}

TEST(SubGaussianCheckTest, TooFewSamplesThrows) {
  EXPECT_THROW(empirical_subgaussian_check(Eigen::MatrixXd::Zero(10, 2), 1.0), ParameterError);
}

}  // namespace
}  // namespace bddc
