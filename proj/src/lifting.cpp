#include "bddc/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "bddc/errors.hpp"

namespace bddc {

LiftingSpec LiftingSpec::Identity(int n) {
  LiftingSpec s;
  s.base_dim = n;
  for (int i = 0; i < n; ++i) s.coordinates.push_back({CoordinateFn::kIdentity, i});
  return s;
}

LiftingSpec LiftingSpec::SineAugmented(int n, const std::vector<int>& sine_indices) {
  LiftingSpec s = Identity(n);
  for (int j : sine_indices) s.coordinates.push_back({CoordinateFn::kSine, j});
  validate(s);
  return s;
}

void validate(const LiftingSpec& spec) {
  if (spec.base_dim <= 0) throw DimensionError("lifting base dimension must be positive");
  if (spec.coordinates.empty()) throw DimensionError("lifting has no coordinates");
  for (const auto& c : spec.coordinates)
    if (c.index < 0 || c.index >= spec.base_dim)
      throw DimensionError("lifted coordinate reads base index " +
                           std::to_string(c.index) + " outside [0, " +
                           std::to_string(spec.base_dim) + ")");
}

Eigen::VectorXd lift(const LiftingSpec& spec, const Eigen::VectorXd& z) {
  if (z.size() != spec.base_dim)
    throw DimensionError("lift: base state has wrong dimension");
  Eigen::VectorXd x(spec.lifted_dim());
  for (int k = 0; k < spec.lifted_dim(); ++k) {
    const auto& c = spec.coordinates[k];
    x(k) = c.fn == CoordinateFn::kSine ? std::sin(z(c.index)) : z(c.index);
  }
  return x;
}

Eigen::MatrixXd lift_rows(const LiftingSpec& spec, const Eigen::MatrixXd& Z) {
  Eigen::MatrixXd X(Z.rows(), spec.lifted_dim());
  for (Eigen::Index t = 0; t < Z.rows(); ++t)
    X.row(t) = lift(spec, Z.row(t).transpose()).transpose();
  return X;
}

double variance_proxy_bound(double a) {
  if (!std::isfinite(a) || a < 0.0)
    throw ParameterError("half-width must be finite and non-negative");
  return a <= 1.0 ? 2.0 * a + 1.0 : a * a + 2.0 * a;
}

double variance_proxy_bound(const Eigen::VectorXd& half_widths) {
  if (half_widths.size() == 0) throw DimensionError("no half-widths given");
  double best = 0.0;
  for (Eigen::Index i = 0; i < half_widths.size(); ++i)
    best = std::max(best, variance_proxy_bound(half_widths(i)));
  return best;
}

namespace {

std::map<int, std::pair<int, int>> usage(const LiftingSpec& spec) {
  std::map<int, std::pair<int, int>> counts;  // index -> (identity, sine)
  for (const auto& c : spec.coordinates) {
    auto& e = counts[c.index];
    (c.fn == CoordinateFn::kSine ? e.second : e.first) += 1;
  }
  return counts;
}

}  // namespace

double gaussian_lifted_variance_proxy(const LiftingSpec& spec, double s) {
  validate(spec);
  if (!std::isfinite(s) || s < 0.0) throw ParameterError("scale must be non-negative");
  int k = 0;
  for (const auto& [idx, c] : usage(spec)) k = std::max(k, c.first + c.second);
  return k * s * s;
}

double uniform_lifted_variance_proxy(const LiftingSpec& spec, double a) {
  validate(spec);
  bool simple = true;
  bool any_sine = false;
  for (const auto& [idx, c] : usage(spec)) {
    simple = simple && c.first <= 1 && c.second <= 1;
    any_sine = any_sine || c.second > 0;
  }
  if (simple) return any_sine ? variance_proxy_bound(a) : a * a;
  double r2 = 0.0;
  for (const auto& c : spec.coordinates) {
    const double b = c.fn == CoordinateFn::kSine ? std::min(1.0, a) : a;
    r2 += b * b;
  }
  return r2;
}

Eigen::Vector2d pendulum_step(const PendulumParameters& p,
                              const Eigen::Vector2d& z, double u) {
  const double ml2 = p.mass * p.length * p.length;
  const double ts = p.sample_time;
  return {z(0) + ts * z(1),
          z(1) + ts * p.gravity / p.length * std::sin(z(0)) -
              ts * p.damping / ml2 * z(1) + ts / ml2 * u};
}

LiftingSpec pendulum_lifting() { return LiftingSpec::SineAugmented(2, {0}); }

BilinearSystemd pendulum_lifted_system(const PendulumParameters& p) {
  if (p.mass <= 0 || p.length <= 0 || p.sample_time <= 0)
    throw ParameterError("pendulum mass, length and sample time must be positive");
  const double ts = p.sample_time;
  const double ml2 = p.mass * p.length * p.length;
  Eigen::Matrix3d A;
  A << 1.0, ts, 0.0,
       0.0, 1.0 - ts * p.damping / ml2, ts * p.gravity / p.length,
       0.0, ts * std::exp(-(1.0 + ts * ts) / 2.0), std::exp(-ts * ts / 2.0);
  Eigen::MatrixXd B0 = Eigen::Vector3d(0.0, ts / ml2, 0.0);
  return BilinearSystemd::FromCouplings(A, B0, {Eigen::MatrixXd::Zero(3, 3)});
}

}  // namespace bddc
