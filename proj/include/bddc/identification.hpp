#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bddc/bilinear_system.hpp"
#include "bddc/data_collection.hpp"
#include "bddc/errors.hpp"

namespace bddc {

namespace internal {

// Least-squares solve of R Theta^T = Y via column-pivoted QR. A pivot counts
// as nonzero above max(T, p) * eps * |largest pivot|.
template <typename DerivedR, typename DerivedY>
MatrixX<typename DerivedR::Scalar> lstsq_transposed(
    const Eigen::MatrixBase<DerivedR>& R, const Eigen::MatrixBase<DerivedY>& Y,
    const char* what) {
  using Scalar = typename DerivedR::Scalar;
  const auto T = R.rows();
  const auto p = R.cols();
  if (T < p) throw RankDeficientError(static_cast<int>(T), static_cast<int>(p), what);
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(R);
  qr.setThreshold(static_cast<Scalar>(std::max<Eigen::Index>(T, p)) *
                  std::numeric_limits<Scalar>::epsilon());
  if (qr.rank() < p) throw RankDeficientError(static_cast<int>(qr.rank()), static_cast<int>(p), what);
  return qr.solve(Y.template cast<Scalar>()).transpose();
}

}  // namespace internal

/// A_hat = argmin ||X_plus - X A^T||_F for the unforced experiment.
template <typename DerivedX, typename DerivedY>
MatrixX<typename DerivedX::Scalar> ols_linear(const Eigen::MatrixBase<DerivedX>& X,
                                              const Eigen::MatrixBase<DerivedY>& Xplus) {
  if (X.rows() != Xplus.rows() || X.cols() != Xplus.cols())
    throw DimensionError("ols_linear: X and Xplus must have the same shape");
  return internal::lstsq_transposed(X, Xplus, "ols_linear: X has deficient column rank");
}

template <typename Scalar>
struct AffineEstimate {
  MatrixX<Scalar> B;       // n_x x n_x
  VectorX<Scalar> offset;  // column of B0 excited by the experiment
};

/// [B_hat b0_hat] = argmin ||X_plus - [X 1] [B b0]^T||_F.
template <typename DerivedX, typename DerivedY>
AffineEstimate<typename DerivedX::Scalar> ols_affine(const Eigen::MatrixBase<DerivedX>& X,
                                                     const Eigen::MatrixBase<DerivedY>& Xplus) {
  using Scalar = typename DerivedX::Scalar;
  if (X.rows() != Xplus.rows() || X.cols() != Xplus.cols())
    throw DimensionError("ols_affine: X and Xplus must have the same shape");
  const auto n = X.cols();
  MatrixX<Scalar> Y(X.rows(), n + 1);
  Y.leftCols(n) = X;
  Y.col(n).setOnes();
  const MatrixX<Scalar> theta =
      internal::lstsq_transposed(Y, Xplus, "ols_affine: [X 1] has deficient column rank");
  return {theta.leftCols(n), theta.col(n)};
}

inline Eigen::MatrixXd ols_linear(const ExperimentDataset& d) {
  if (d.input_index != 0) throw ParameterError("ols_linear needs the unforced experiment");
  return ols_linear(d.X, d.Xplus);
}

inline AffineEstimate<double> ols_affine(const ExperimentDataset& d) {
  if (d.input_index < 1) throw ParameterError("ols_affine needs a forced experiment");
  return ols_affine(d.X, d.Xplus);
}

/// Gram matrix of the scaled regressors xi = x / sigma_x:
///   index 0:  M_0 = sum xi xi^T
///   index i:  M_i = [sum xi xi^T, sum xi; sum xi^T, T].
struct GramInfo {
  int input_index = 0;
  Eigen::MatrixXd M;
  double lambda_min = 0.0;
  int samples = 0;
  double sigma_x = 1.0;

  /// Unscaled regressor Gram matrix (X^T X or Y^T Y).
  Eigen::MatrixXd unscaled() const;
};

inline GramInfo gram(const ExperimentDataset& d, double sigma_x);

/// Estimate from a single experiment: A_hat for index 0, (B_hat_i, b0_hat_i)
/// otherwise.
struct ExperimentEstimate {
  int input_index = 0;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;
};

inline ExperimentEstimate identify_experiment(const ExperimentDataset& d);

/// Model (A_hat, B0_hat, B_hat_i) in the same form as the true system.
using EstimateSet = BilinearSystemd;

/// Combines per-experiment estimates (any order). With an input basis T the
/// experiments estimate the system seen through u = T v, and the result is
/// mapped back to the canonical coordinates.
inline EstimateSet assemble(std::vector<ExperimentEstimate> estimates,
                     const std::optional<Eigen::MatrixXd>& input_basis = std::nullopt);

inline EstimateSet identify(const std::vector<ExperimentDataset>& data,
                     const std::optional<Eigen::MatrixXd>& input_basis = std::nullopt);

inline GramInfo gram(const ExperimentDataset& d, double sigma_x) {
  if (!(sigma_x > 0.0) || !std::isfinite(sigma_x)) throw ParameterError("sigma_x must be positive");
  const int n = d.state_dim();
  const Eigen::MatrixXd xi = d.X / sigma_x;
  GramInfo g;
  g.input_index = d.input_index;
  g.samples = d.samples();
  g.sigma_x = sigma_x;
  if (d.input_index == 0) {
    g.M = xi.transpose() * xi;
  } else {
    g.M.resize(n + 1, n + 1);
    g.M.topLeftCorner(n, n) = xi.transpose() * xi;
    g.M.topRightCorner(n, 1) = xi.colwise().sum().transpose();
    g.M.bottomLeftCorner(1, n) = g.M.topRightCorner(n, 1).transpose();
    g.M(n, n) = d.samples();
  }
  const Eigen::MatrixXd sym = 0.5 * (g.M + g.M.transpose());
  g.lambda_min = std::max(0.0, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0));
  return g;
}

inline Eigen::MatrixXd GramInfo::unscaled() const {
  Eigen::VectorXd d = Eigen::VectorXd::Constant(M.rows(), sigma_x);
  if (input_index != 0) d(M.rows() - 1) = 1.0;
  return d.asDiagonal() * M * d.asDiagonal();
}

inline ExperimentEstimate identify_experiment(const ExperimentDataset& d) {
  if (d.input_index == 0) return {0, ols_linear(d), {}};
  auto est = ols_affine(d);
  return {d.input_index, est.B, est.offset};
}

inline EstimateSet assemble(std::vector<ExperimentEstimate> estimates,
                            const std::optional<Eigen::MatrixXd>& input_basis) {
  std::sort(estimates.begin(), estimates.end(),
            [](const auto& a, const auto& b) { return a.input_index < b.input_index; });
  const int nu = static_cast<int>(estimates.size()) - 1;
  if (nu < 1) throw DimensionError("assemble needs the unforced and at least one forced experiment");
  for (int i = 0; i <= nu; ++i)
    if (estimates[i].input_index != i)
      throw DimensionError("experiment indices must be exactly 0..n_u");
  const Eigen::MatrixXd& A = estimates[0].matrix;
  const auto n = A.rows();
  EstimateSet est;
  est.A = A;
  est.B0.resize(n, nu);
  for (int i = 1; i <= nu; ++i) {
    if (estimates[i].matrix.rows() != n || estimates[i].offset.size() != n)
      throw DimensionError("experiment estimates disagree on n_x");
    est.B0.col(i - 1) = estimates[i].offset;
    est.B.push_back(estimates[i].matrix);
  }
  if (input_basis) {
    if (input_basis->rows() != nu || input_basis->cols() != nu)
      throw DimensionError("input basis must be n_u x n_u");
    // Experiments saw B0 T and A_ux (T kron I).
    const Eigen::MatrixXd Tinv = input_basis->inverse();
    const Eigen::MatrixXd B0 = est.B0 * Tinv;
    std::vector<Eigen::MatrixXd> B(nu, A);
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nu; ++j) B[i] += Tinv(j, i) * (est.B[j] - A);
    est.B0 = B0;
    est.B = B;
  }
  return est;
}

inline EstimateSet identify(const std::vector<ExperimentDataset>& data,
                            const std::optional<Eigen::MatrixXd>& input_basis) {
  std::vector<ExperimentEstimate> parts;
  for (const auto& d : data) parts.push_back(identify_experiment(d));
  return assemble(std::move(parts), input_basis);
}

}  // namespace bddc
