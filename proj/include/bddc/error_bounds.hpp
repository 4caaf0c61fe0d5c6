#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bddc/identification.hpp"

namespace bddc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class BoundKind { kAPriori, kDataDependent, kEllipsoidal };

std::string to_string(BoundKind kind);
BoundKind bound_kind_from_string(const std::string& name);

/// Spectral-norm bounds ||A_hat - A|| <= eps_A, ||B_hat_i - B_i|| <= eps_B[i],
/// ||b0_hat_i - b0_i|| <= eps_b0[i], jointly with probability 1 - delta.
/// Failure budget: delta/2 for the unforced experiment, delta/(2 n_u) for each
/// forced one. Entries whose experiment misses its burn-in are +inf.
struct SpectralBoundSet {
  BoundKind kind = BoundKind::kAPriori;
  double delta = 0.0;
  double eps_A = kInfinity;
  std::vector<double> eps_B;
  std::vector<double> eps_b0;
  std::vector<bool> burn_in_ok;  // index 0: unforced experiment

  int input_dim() const { return static_cast<int>(eps_B.size()); }
  bool all_finite() const;
};

/// Ellipsoidal bounds (Gaussian noise):
///   (A_hat - A)^T (A_hat - A) <= E_A,   Theta_err_i^T Theta_err_i <= E_B[i]
/// with Theta_err_i = [B_hat_i - B_i, b0_hat_i - b0_i]^T.
struct EllipsoidBoundSet {
  double delta = 0.0;
  Eigen::MatrixXd E_A;
  std::vector<Eigen::MatrixXd> E_B;
  double C_A = 0.0;  // sigma_w^2 (2 sqrt(n_x) + sqrt(2 log(2/delta)))^2
  double C1 = 0.0;   // sigma_w^2 (sqrt(n_x+1) + sqrt(n_x) + sqrt(2 log(2 n_u/delta)))^2
  std::vector<bool> samples_ok;  // T_0 >= n_x, T_i >= n_x + 1
  std::vector<bool> finite;      // false when the Gram matrix is singular

  int input_dim() const { return static_cast<int>(E_B.size()); }
  bool all_finite() const;
};

struct BurnIn {
  double unforced = 0.0;
  double forced = 0.0;
};

void validate_delta(double delta);

/// Tbar_0 = 128 log(8 9^{n_x}/delta), Tbar_i = 64 (3 + 2 sqrt 2) log(8 n_u 9^{n_x}/delta).
BurnIn burn_in_a_priori(int n_x, int n_u, double delta);

/// Tbar_0 = log(2 9^{n_x}/delta)/2, Tbar_i = log(2 n_u 9^{2 n_x}/delta)/2.
BurnIn burn_in_data_dependent(int n_x, int n_u, double delta);

SpectralBoundSet a_priori_bounds(int n_x, int n_u, double delta, double sigma_w,
                                 double sigma_x, const std::vector<int>& samples);

SpectralBoundSet data_dependent_bounds(const std::vector<GramInfo>& grams, double delta,
                                       double sigma_w, double sigma_x);

/// Uses the unscaled Gram matrices X^T X and Y^T Y, so the result does not
/// depend on the sigma_x used to build `grams`.
EllipsoidBoundSet ellipsoidal_bounds(const std::vector<GramInfo>& grams, double delta,
                                     double sigma_w, int n_x, int n_u);

/// Scalar factor of the a priori eps_B (multiply by sigma_w / sigma_x).
double a_priori_forced_factor(int n_x, int n_u, double delta, int T);

/// Scalar factor of the data-dependent eps_B for one forced experiment
/// (multiply by sigma_w / sigma_x); +inf when lambda_min(M_i) = 0. Burn-in is
/// not checked.
double data_dependent_forced_factor(int n_x, int n_u, double delta, const GramInfo& gram);

struct CoverageReport {
  bool A = true;
  std::vector<bool> B;
  std::vector<bool> b0;  // ellipsoidal bounds check B and b0 jointly in B
  bool all() const;
};

CoverageReport check_spectral_coverage(const BilinearSystemd& truth, const EstimateSet& est,
                                       const SpectralBoundSet& bounds);

/// PSD check E - err^T err >= -tol * max(1, ||E||).
CoverageReport check_ellipsoid_coverage(const BilinearSystemd& truth, const EstimateSet& est,
                                        const EllipsoidBoundSet& bounds, double tol = 1e-10);

std::vector<GramInfo> grams(const std::vector<ExperimentDataset>& data, double sigma_x);

}  // namespace bddc
