#pragma once

#include <string>

#include <Eigen/Dense>

#include "bddc/error_bounds.hpp"

namespace bddc {

/// Axis-aligned input box containing the origin.
struct InputBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::VectorXd& u, double tol = 0.0) const;
  static InputBox Symmetric(int n_u, double half_width);
};

void validate(const InputBox& box);

struct BoxExtremes {
  double m1 = 0.0;     // max |1 - sum_i u_i|
  Eigen::VectorXd m2;  // max |u_i| per coordinate
};

BoxExtremes box_extremes(const InputBox& box);

enum class QuadBoundProvenance { kIndividual, kEllipsoidal, kNormOverestimate };

std::string to_string(QuadBoundProvenance p);
QuadBoundProvenance provenance_from_string(const std::string& name);

/// ||r(x, u)||^2 <= [x; u]^T Q [x; u] for all x and u in the box, with
/// probability 1 - delta. `infeasible` marks bounds built from an infinite
/// error bound; Q is then meaningless and synthesis must not be attempted.
struct ResidualQuadBound {
  Eigen::MatrixXd Q;
  double delta = 0.0;
  QuadBoundProvenance provenance = QuadBoundProvenance::kIndividual;
  bool infeasible = false;
  int n_x = 0;
  int n_u = 0;
};

ResidualQuadBound qdelta_individual(const SpectralBoundSet& bounds, const InputBox& box, int n_x);

/// Cross blocks of each E_B[i] are absorbed through their Schur complement,
/// so the result reduces to the block-diagonal congruence when they vanish.
ResidualQuadBound qdelta_ellipsoidal(const EllipsoidBoundSet& bounds, const InputBox& box);

/// ||Q||_2 I.
ResidualQuadBound overestimate_norm(const ResidualQuadBound& q);

/// Symmetrizes and zeroes eigenvalues in [-1e-12 ||Q||, 0).
Eigen::MatrixXd clip_psd(const Eigen::MatrixXd& Q);

/// Q + 1e-9 max(1, ||Q||_2) I, which upper-bounds Q and is invertible.
Eigen::MatrixXd regularized(const Eigen::MatrixXd& Q);

/// r(x, u) = f(x, u) - f_hat(x, u), the noise-free model mismatch.
Eigen::VectorXd model_residual(const BilinearSystemd& truth, const EstimateSet& est,
                               const Eigen::VectorXd& x, const Eigen::VectorXd& u);

}  // namespace bddc
