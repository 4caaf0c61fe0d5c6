#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bddc/errors.hpp"

namespace bddc {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Discrete-time input-affine bilinear system
///   x+ = A x + B0 u + sum_i u_i (B_i - A) x + w.
/// The per-input matrices B_i are stored; the drift-free couplings A_i are
/// always derived as B_i - A so the two parameterizations cannot disagree.
template <typename Scalar>
struct BilinearSystem {
  MatrixX<Scalar> A;
  MatrixX<Scalar> B0;
  std::vector<MatrixX<Scalar>> B;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B0.cols()); }

  /// A_ux = [B_1 - A, ..., B_nu - A], size n_x x (n_u n_x).
  MatrixX<Scalar> input_state_coupling() const {
    const int n = state_dim();
    MatrixX<Scalar> out(n, n * input_dim());
    for (int i = 0; i < input_dim(); ++i) out.middleCols(i * n, n) = B[i] - A;
    return out;
  }

  MatrixX<Scalar> coupling(int i) const { return B.at(i) - A; }

  static BilinearSystem FromCouplings(const MatrixX<Scalar>& A,
                                      const MatrixX<Scalar>& B0,
                                      const std::vector<MatrixX<Scalar>>& Ai) {
    BilinearSystem sys{A, B0, {}};
    for (const auto& a : Ai) sys.B.push_back(a + A);
    return sys;
  }

  template <typename Other>
  BilinearSystem<Other> cast() const {
    BilinearSystem<Other> out{A.template cast<Other>(),
                              B0.template cast<Other>(), {}};
    for (const auto& b : B) out.B.push_back(b.template cast<Other>());
    return out;
  }
};

using BilinearSystemd = BilinearSystem<double>;

/// Throws DimensionError on inconsistent shapes, ParameterError on
/// non-finite entries.
template <typename Scalar>
void validate(const BilinearSystem<Scalar>& sys) {
  const auto n = sys.A.rows();
  if (n == 0 || sys.A.cols() != n)
    throw DimensionError("A must be square and non-empty");
  if (sys.B0.rows() != n || sys.B0.cols() == 0)
    throw DimensionError("B0 must have n_x rows and at least one column");
  if (static_cast<Eigen::Index>(sys.B.size()) != sys.B0.cols())
    throw DimensionError("expected one B_i per input (" +
                         std::to_string(sys.B0.cols()) + "), got " +
                         std::to_string(sys.B.size()));
  for (const auto& b : sys.B)
    if (b.rows() != n || b.cols() != n)
      throw DimensionError("every B_i must be n_x x n_x");
  auto finite = [](const auto& m) { return m.array().isFinite().all(); };
  bool ok = finite(sys.A) && finite(sys.B0);
  for (const auto& b : sys.B) ok = ok && finite(b);
  if (!ok) throw ParameterError("system matrices contain non-finite entries");
}

/// u kron x with input as the outer factor:
/// [u_1 x; u_2 x; ...; u_nu x].
template <typename DerivedU, typename DerivedX>
VectorX<typename DerivedX::Scalar> kron_input_state(
    const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedX>& x) {
  const auto nx = x.size();
  VectorX<typename DerivedX::Scalar> out(u.size() * nx);
  for (Eigen::Index i = 0; i < u.size(); ++i)
    out.segment(i * nx, nx) = u(i) * x;
  return out;
}

/// One transition: x+ = A x + B0 u + A_ux (u kron x) + w.
template <typename Scalar, typename DerivedX, typename DerivedU,
          typename DerivedW>
VectorX<Scalar> step(const BilinearSystem<Scalar>& sys,
                     const Eigen::MatrixBase<DerivedX>& x,
                     const Eigen::MatrixBase<DerivedU>& u,
                     const Eigen::MatrixBase<DerivedW>& w) {
  const int n = sys.state_dim();
  if (x.size() != n || w.size() != n || u.size() != sys.input_dim())
    throw DimensionError("step: x, u, w do not match the system dimensions");
  VectorX<Scalar> out = sys.A * x + sys.B0 * u + w;
  for (int i = 0; i < sys.input_dim(); ++i) {
    if (u(i) != Scalar(0)) out += (sys.B[i] - sys.A) * (u(i) * x);
  }
  return out;
}

template <typename Scalar, typename DerivedX, typename DerivedU>
VectorX<Scalar> step(const BilinearSystem<Scalar>& sys,
                     const Eigen::MatrixBase<DerivedX>& x,
                     const Eigen::MatrixBase<DerivedU>& u) {
  return step(sys, x, u, VectorX<Scalar>::Zero(sys.state_dim()));
}

}  // namespace bddc
