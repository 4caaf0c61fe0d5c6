#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bddc/bilinear_system.hpp"

namespace bddc {

enum class CoordinateFn { kIdentity, kSine };

/// One lifted coordinate: fn(z[index]).
struct LiftedCoordinate {
  CoordinateFn fn = CoordinateFn::kIdentity;
  int index = 0;
};

/// Lifting Phi: R^{n_z} -> R^{n_x}. Every supported coordinate map vanishes
/// at zero, so Phi(0) = 0 and equilibria are preserved.
struct LiftingSpec {
  int base_dim = 0;
  std::vector<LiftedCoordinate> coordinates;

  int lifted_dim() const { return static_cast<int>(coordinates.size()); }

  static LiftingSpec Identity(int n);
  /// [z; sin(z_j) for j in sine_indices].
  static LiftingSpec SineAugmented(int n, const std::vector<int>& sine_indices);
};

void validate(const LiftingSpec& spec);

Eigen::VectorXd lift(const LiftingSpec& spec, const Eigen::VectorXd& z);
Eigen::MatrixXd lift_rows(const LiftingSpec& spec, const Eigen::MatrixXd& Z);

/// Variance proxy of (x, sin x) for x ~ U[-a, a]:
///   2a + 1 for a <= 1, a^2 + 2a for a > 1.
/// Crude but valid; not a tight constant.
double variance_proxy_bound(double a);

/// Coordinate-wise maximum of variance_proxy_bound over half-widths.
double variance_proxy_bound(const Eigen::VectorXd& half_widths);

/// Proxy for Phi(z), z ~ N(0, s^2 I): Phi is Lipschitz with constant
/// sqrt(k) where k is the largest number of lifted coordinates reading the
/// same base coordinate, so the Gaussian concentration inequality gives
/// k s^2.
double gaussian_lifted_variance_proxy(const LiftingSpec& spec, double s);

/// Proxy for Phi(z), z ~ U([-a, a]^n). Uses the closed form above when every
/// base coordinate feeds at most one identity and one sine coordinate, and a
/// Hoeffding bound (squared radius of the image box) otherwise.
double uniform_lifted_variance_proxy(const LiftingSpec& spec, double a);

/// Inverted pendulum with viscous damping, angle measured from upright:
///   z1+ = z1 + Ts z2
///   z2+ = z2 + (Ts g / l) sin z1 - (Ts b / (m l^2)) z2 + (Ts / (m l^2)) u
struct PendulumParameters {
  double mass = 1.0;
  double length = 1.0;
  double damping = 0.5;
  double gravity = 9.81;
  double sample_time = 0.1;
};

Eigen::Vector2d pendulum_step(const PendulumParameters& p,
                              const Eigen::Vector2d& z, double u);

/// Lifting [z1, z2, sin z1] used for the pendulum.
LiftingSpec pendulum_lifting();

/// Bilinear model of the pendulum in the lifted coordinates
/// x = [z1, z2, sin z1]. Rows one and two are exact. The third row,
/// sin(z1 + Ts z2), is not in the span of the lifted coordinates and is
/// replaced by its orthogonal projection in L2(N(0, I)); see
/// docs/pendulum_lifting.md. The input enters additively, so A_1 = 0.
BilinearSystemd pendulum_lifted_system(const PendulumParameters& p = {});

}  // namespace bddc
