#include "bddc/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "bddc/errors.hpp"

namespace bddc {

namespace {

double spectral_norm_sym(const Eigen::MatrixXd& Q) {
  if (Q.size() == 0) return 0.0;
  const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q, Eigen::EigenvaluesOnly).eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

}  // namespace

bool InputBox::contains(const Eigen::VectorXd& u, double tol) const {
  if (u.size() != lower.size()) return false;
  return ((u - lower).array() >= -tol).all() && ((upper - u).array() >= -tol).all();
}

InputBox InputBox::Symmetric(int n_u, double half_width) {
  return {Eigen::VectorXd::Constant(n_u, -half_width), Eigen::VectorXd::Constant(n_u, half_width)};
}

void validate(const InputBox& box) {
  if (box.lower.size() == 0 || box.lower.size() != box.upper.size())
    throw DimensionError("input box bounds must be non-empty and of equal length");
  if (!box.lower.allFinite() || !box.upper.allFinite())
    throw ParameterError("input box must be compact");
  if ((box.lower.array() > box.upper.array()).any())
    throw ParameterError("input box has lower > upper");
  if ((box.lower.array() > 0.0).any() || (box.upper.array() < 0.0).any())
    throw ParameterError("input box must contain the origin");
}

BoxExtremes box_extremes(const InputBox& box) {
  validate(box);
  BoxExtremes e;
  e.m1 = std::max(std::abs(1.0 - box.lower.sum()), std::abs(1.0 - box.upper.sum()));
  e.m2 = box.lower.cwiseAbs().cwiseMax(box.upper.cwiseAbs());
  return e;
}

std::string to_string(QuadBoundProvenance p) {
  switch (p) {
    case QuadBoundProvenance::kIndividual:
      return "individual";
    case QuadBoundProvenance::kEllipsoidal:
      return "ellipsoidal";
    case QuadBoundProvenance::kNormOverestimate:
      return "norm-overestimate";
  }
  return "unknown";
}

QuadBoundProvenance provenance_from_string(const std::string& name) {
  if (name == "individual") return QuadBoundProvenance::kIndividual;
  if (name == "ellipsoidal") return QuadBoundProvenance::kEllipsoidal;
  if (name == "norm-overestimate") return QuadBoundProvenance::kNormOverestimate;
  throw ConfigError("unknown residual bound provenance '" + name + "'");
}

Eigen::MatrixXd clip_psd(const Eigen::MatrixXd& Q) {
  const Eigen::MatrixXd S = 0.5 * (Q + Q.transpose());
  if (S.size() == 0) return S;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double tol = 1e-12 * std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  if (ev(0) >= 0.0) return S;
  if (ev(0) < -tol) throw ParameterError("residual bound matrix is indefinite");
  Eigen::VectorXd clipped = ev.cwiseMax(0.0);
  Eigen::MatrixXd out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd regularized(const Eigen::MatrixXd& Q) {
  const double eps = 1e-9 * std::max(1.0, spectral_norm_sym(0.5 * (Q + Q.transpose())));
  return Q + eps * Eigen::MatrixXd::Identity(Q.rows(), Q.cols());
}

ResidualQuadBound qdelta_individual(const SpectralBoundSet& bounds, const InputBox& box, int n_x) {
  const BoxExtremes ext = box_extremes(box);
  const int n_u = bounds.input_dim();
  if (box.dim() != n_u) throw DimensionError("input box dimension differs from n_u");
  if (n_x < 1) throw DimensionError("n_x must be positive");
  ResidualQuadBound q;
  q.delta = bounds.delta;
  q.provenance = QuadBoundProvenance::kIndividual;
  q.n_x = n_x;
  q.n_u = n_u;
  q.Q = Eigen::MatrixXd::Zero(n_x + n_u, n_x + n_u);
  if (!bounds.all_finite()) {
    q.infeasible = true;
    q.Q.setConstant(kInfinity);
    return q;
  }
  double c_x = ext.m1 * bounds.eps_A;
  double c_u2 = 0.0;
  for (int i = 0; i < n_u; ++i) {
    c_x += ext.m2(i) * bounds.eps_B[i];
    c_u2 += bounds.eps_b0[i] * bounds.eps_b0[i];
  }
  q.Q.topLeftCorner(n_x, n_x).diagonal().setConstant(2.0 * c_x * c_x);
  q.Q.bottomRightCorner(n_u, n_u).diagonal().setConstant(2.0 * c_u2);
  return q;
}

ResidualQuadBound qdelta_ellipsoidal(const EllipsoidBoundSet& bounds, const InputBox& box) {
  const BoxExtremes ext = box_extremes(box);
  const int n_u = bounds.input_dim();
  const int n_x = static_cast<int>(bounds.E_A.rows());
  if (box.dim() != n_u) throw DimensionError("input box dimension differs from n_u");
  ResidualQuadBound q;
  q.delta = bounds.delta;
  q.provenance = QuadBoundProvenance::kEllipsoidal;
  q.n_x = n_x;
  q.n_u = n_u;
  q.Q = Eigen::MatrixXd::Zero(n_x + n_u, n_x + n_u);
  if (!bounds.all_finite()) {
    q.infeasible = true;
    q.Q.setConstant(kInfinity);
    return q;
  }
  // Per input, u_i^2 [x; 1]^T E [x; 1] must be bounded by a form in (x, u_i).
  // With S = E12^T E11^+ E12 <= E22 and gamma > 0,
  //   2 x^T E12 <= gamma x^T E11 x + S / gamma,
  // and gamma = sqrt(S / E22) gives
  //   u_i^2 [x; 1]^T E [x; 1] <= (1 + gamma) m2_i^2 x^T E11 x + (E22 + sqrt(S E22)) u_i^2.
  // The cross block is absorbed here because m2_i u_i x^T E12 does not bound
  // the indefinite term u_i^2 x^T E12. For E12 = 0 this is the plain
  // congruence with diag(m2 (x) I, I).
  for (int i = 0; i < n_u; ++i) {
    const Eigen::MatrixXd& E = bounds.E_B[i];
    if (E.rows() != n_x + 1) throw DimensionError("ellipsoid for B_i must be (n_x+1) square");
    const Eigen::MatrixXd E11 = 0.5 * (E.topLeftCorner(n_x, n_x) + E.topLeftCorner(n_x, n_x).transpose());
    const Eigen::VectorXd E12 = E.topRightCorner(n_x, 1);
    const double E22 = std::max(0.0, E(n_x, n_x));
    double S = 0.0;
    if (E12.squaredNorm() > 0.0) {
      const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(E11);
      S = std::clamp(E12.dot(cod.solve(E12)), 0.0, E22);
    }
    const double gamma = E22 > 0.0 ? std::sqrt(S / E22) : 0.0;
    q.Q.topLeftCorner(n_x, n_x) += (n_u + 1) * (1.0 + gamma) * ext.m2(i) * ext.m2(i) * E11;
    q.Q(n_x + i, n_x + i) += (n_u + 1) * (E22 + std::sqrt(S * E22));
  }
  q.Q.topLeftCorner(n_x, n_x) += (n_u + 1) * ext.m1 * ext.m1 * bounds.E_A;
  q.Q = clip_psd(q.Q);
  return q;
}

ResidualQuadBound overestimate_norm(const ResidualQuadBound& q) {
  if (q.infeasible) return q;
  if (!q.Q.allFinite()) throw ParameterError("overestimate_norm needs a finite Q");
  ResidualQuadBound out = q;
  out.provenance = QuadBoundProvenance::kNormOverestimate;
  out.Q = spectral_norm_sym(0.5 * (q.Q + q.Q.transpose())) *
          Eigen::MatrixXd::Identity(q.Q.rows(), q.Q.cols());
  return out;
}

Eigen::VectorXd model_residual(const BilinearSystemd& truth, const EstimateSet& est,
                               const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  return step(truth, x, u) - step(est, x, u);
}

}  // namespace bddc
