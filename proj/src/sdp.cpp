#include "bddc/sdp.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "bddc/errors.hpp"

namespace bddc::sdp {

AffineMatrix::AffineMatrix(int rows, int cols) : constant_(Eigen::MatrixXd::Zero(rows, cols)) {}

AffineMatrix::AffineMatrix(const Eigen::MatrixXd& constant) : constant_(constant) {}

AffineMatrix AffineMatrix::Identity(int n) { return AffineMatrix(Eigen::MatrixXd::Identity(n, n)); }

Eigen::MatrixXd AffineMatrix::coefficient(int k) const {
  auto it = terms_.find(k);
  return it == terms_.end() ? Eigen::MatrixXd::Zero(rows(), cols()) : it->second;
}

void AffineMatrix::add_term(int k, const Eigen::MatrixXd& coeff) {
  if (coeff.rows() != rows() || coeff.cols() != cols())
    throw DimensionError("affine term has the wrong shape");
  auto it = terms_.find(k);
  if (it == terms_.end())
    terms_.emplace(k, coeff);
  else
    it->second += coeff;
}

Eigen::MatrixXd AffineMatrix::evaluate(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd out = constant_;
  for (const auto& [k, M] : terms_) {
    if (k >= y.size()) throw DimensionError("decision vector too short");
    out += y(k) * M;
  }
  return out;
}

AffineMatrix AffineMatrix::transpose() const {
  AffineMatrix out(Eigen::MatrixXd(constant_.transpose()));
  for (const auto& [k, M] : terms_) out.terms_.emplace(k, M.transpose());
  return out;
}

AffineMatrix AffineMatrix::block(int r, int c, int nr, int nc) const {
  AffineMatrix out(Eigen::MatrixXd(constant_.block(r, c, nr, nc)));
  for (const auto& [k, M] : terms_) out.terms_.emplace(k, M.block(r, c, nr, nc));
  return out;
}

bool AffineMatrix::is_symmetric(double tol) const {
  if (rows() != cols()) return false;
  auto sym = [tol](const Eigen::MatrixXd& M) {
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, M.cwiseAbs().maxCoeff());
  };
  if (rows() == 0) return true;
  if (!sym(constant_)) return false;
  for (const auto& [k, M] : terms_)
    if (!sym(M)) return false;
  return true;
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& other) {
  if (other.rows() != rows() || other.cols() != cols())
    throw DimensionError("affine sum: shapes " + std::to_string(rows()) + "x" + std::to_string(cols()) +
                         " and " + std::to_string(other.rows()) + "x" + std::to_string(other.cols()));
  constant_ += other.constant_;
  for (const auto& [k, M] : other.terms_) add_term(k, M);
  return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& other) { return *this += -other; }

AffineMatrix& AffineMatrix::operator*=(double s) {
  constant_ *= s;
  for (auto& [k, M] : terms_) M *= s;
  return *this;
}

AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b) { return a += b; }
AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b) { return a -= b; }
AffineMatrix operator-(AffineMatrix a) { return a *= -1.0; }
AffineMatrix operator*(double s, AffineMatrix a) { return a *= s; }

AffineMatrix operator*(const Eigen::MatrixXd& M, const AffineMatrix& a) {
  if (M.cols() != a.rows()) throw DimensionError("affine product: inner dimensions differ");
  AffineMatrix out(Eigen::MatrixXd(M * a.constant()));
  for (const auto& [k, C] : a.terms()) out.add_term(k, M * C);
  return out;
}

AffineMatrix operator*(const AffineMatrix& a, const Eigen::MatrixXd& M) {
  if (a.cols() != M.rows()) throw DimensionError("affine product: inner dimensions differ");
  AffineMatrix out(Eigen::MatrixXd(a.constant() * M));
  for (const auto& [k, C] : a.terms()) out.add_term(k, C * M);
  return out;
}

namespace {

Eigen::MatrixXd kron_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

}  // namespace

AffineMatrix kron(const AffineMatrix& a, const Eigen::MatrixXd& M) {
  AffineMatrix out(kron_dense(a.constant(), M));
  for (const auto& [k, C] : a.terms()) out.add_term(k, kron_dense(C, M));
  return out;
}

AffineMatrix kron(const Eigen::MatrixXd& M, const AffineMatrix& a) {
  AffineMatrix out(kron_dense(M, a.constant()));
  for (const auto& [k, C] : a.terms()) out.add_term(k, kron_dense(M, C));
  return out;
}

AffineMatrix trace(const AffineMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("trace of a non-square expression");
  AffineMatrix out(Eigen::MatrixXd::Constant(1, 1, a.constant().trace()));
  for (const auto& [k, C] : a.terms()) out.add_term(k, Eigen::MatrixXd::Constant(1, 1, C.trace()));
  return out;
}

AffineMatrix blocks(const std::vector<std::vector<AffineMatrix>>& rows) {
  if (rows.empty()) return AffineMatrix(0, 0);
  const std::size_t nc = rows[0].size();
  std::vector<int> heights, widths(nc, -1);
  for (const auto& row : rows) {
    if (row.size() != nc) throw DimensionError("block rows have different lengths");
    heights.push_back(row.empty() ? 0 : row[0].rows());
    for (std::size_t j = 0; j < nc; ++j) {
      if (row[j].rows() != heights.back())
        throw DimensionError("block row " + std::to_string(heights.size() - 1) + " has mixed heights");
      if (widths[j] < 0) widths[j] = row[j].cols();
      if (row[j].cols() != widths[j])
        throw DimensionError("block column " + std::to_string(j) + " has mixed widths");
    }
  }
  int H = 0, W = 0;
  for (int h : heights) H += h;
  for (int w : widths) W += w;
  AffineMatrix out(H, W);
  Eigen::MatrixXd constant = Eigen::MatrixXd::Zero(H, W);
  std::map<int, Eigen::MatrixXd> terms;
  int r = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int c = 0;
    for (std::size_t j = 0; j < nc; ++j) {
      const auto& b = rows[i][j];
      constant.block(r, c, b.rows(), b.cols()) = b.constant();
      for (const auto& [k, C] : b.terms()) {
        auto it = terms.find(k);
        if (it == terms.end()) it = terms.emplace(k, Eigen::MatrixXd::Zero(H, W)).first;
        it->second.block(r, c, b.rows(), b.cols()) = C;
      }
      c += widths[j];
    }
    r += heights[i];
  }
  out = AffineMatrix(constant);
  for (const auto& [k, C] : terms) out.add_term(k, C);
  return out;
}

AffineMatrix vstack(const std::vector<AffineMatrix>& parts) {
  std::vector<std::vector<AffineMatrix>> rows;
  for (const auto& p : parts) rows.push_back({p});
  return blocks(rows);
}

AffineMatrix hstack(const std::vector<AffineMatrix>& parts) { return blocks({parts}); }

int SdpProblem::allocate(const std::string& name, VarShape shape, int rows, int cols, int count) {
  if (rows < 1 || cols < 1) throw DimensionError("variable '" + name + "' must be non-empty");
  VariableBlock v{name, shape, rows, cols, num_variables_, count};
  variables_.push_back(v);
  num_variables_ += count;
  return v.offset;
}

AffineMatrix SdpProblem::add_scalar(const std::string& name) {
  const int k = allocate(name, VarShape::kScalar, 1, 1, 1);
  AffineMatrix out(1, 1);
  out.add_term(k, Eigen::MatrixXd::Ones(1, 1));
  return out;
}

AffineMatrix SdpProblem::add_symmetric(const std::string& name, int n) {
  int k = allocate(name, VarShape::kSymmetric, n, n, n * (n + 1) / 2);
  AffineMatrix out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
      E(i, j) = 1.0;
      E(j, i) = 1.0;
      out.add_term(k++, E);
    }
  return out;
}

AffineMatrix SdpProblem::add_matrix(const std::string& name, int rows, int cols) {
  int k = allocate(name, VarShape::kRectangular, rows, cols, rows * cols);
  AffineMatrix out(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(rows, cols);
      E(i, j) = 1.0;
      out.add_term(k++, E);
    }
  return out;
}

void SdpProblem::add_psd(const std::string& name, const AffineMatrix& F) {
  if (F.rows() != F.cols() || F.rows() == 0)
    throw DimensionError("constraint '" + name + "' is not square");
  if (!F.is_symmetric(1e-10)) throw DimensionError("constraint '" + name + "' is not symmetric");
  for (const auto& [k, C] : F.terms())
    if (k < 0 || k >= num_variables_) throw DimensionError("constraint '" + name + "' uses an unknown variable");
  AffineMatrix sym = 0.5 * (F + F.transpose());
  constraints_.push_back({name, sym});
}

void SdpProblem::maximize(const AffineMatrix& objective) {
  if (objective.rows() != 1 || objective.cols() != 1) throw DimensionError("objective must be scalar");
  objective_.clear();
  for (const auto& [k, C] : objective.terms()) objective_[k] = C(0, 0);
}

Eigen::VectorXd SdpProblem::objective() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(num_variables_);
  for (const auto& [k, v] : objective_) c(k) = v;
  return c;
}

std::vector<double> SdpProblem::min_eigenvalues(const Eigen::VectorXd& y) const {
  std::vector<double> out;
  for (const auto& c : constraints_) {
    const Eigen::MatrixXd F = c.F.evaluate(y);
    out.push_back(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(F, Eigen::EigenvaluesOnly).eigenvalues()(0));
  }
  return out;
}

namespace {

const char* shape_name(VarShape s) {
  switch (s) {
    case VarShape::kScalar:
      return "scalar";
    case VarShape::kSymmetric:
      return "symmetric";
    case VarShape::kRectangular:
      return "matrix";
  }
  return "?";
}

}  // namespace

void SdpProblem::write_triplets(std::ostream& out) const {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "bddc-sdp 1\n";
  out << "variables " << num_variables_ << '\n';
  for (const auto& v : variables_) {
    int k = v.offset;
    if (v.shape == VarShape::kSymmetric) {
      for (int j = 0; j < v.cols; ++j)
        for (int i = 0; i <= j; ++i) out << "var " << k++ << ' ' << v.name << ' ' << shape_name(v.shape) << ' ' << i << ' ' << j << '\n';
    } else {
      for (int j = 0; j < v.cols; ++j)
        for (int i = 0; i < v.rows; ++i) out << "var " << k++ << ' ' << v.name << ' ' << shape_name(v.shape) << ' ' << i << ' ' << j << '\n';
    }
  }
  for (const auto& [k, c] : objective_) out << "objective " << k << ' ' << c << '\n';
  for (std::size_t b = 0; b < constraints_.size(); ++b) {
    const auto& F = constraints_[b].F;
    out << "constraint " << b << ' ' << constraints_[b].name << ' ' << F.rows() << '\n';
    auto emit = [&](int k, const Eigen::MatrixXd& M) {
      for (int j = 0; j < M.cols(); ++j)
        for (int i = 0; i <= j; ++i)
          if (M(i, j) != 0.0) out << "F " << b << ' ' << k << ' ' << i << ' ' << j << ' ' << M(i, j) << '\n';
    };
    emit(0, F.constant());
    for (const auto& [k, C] : F.terms()) emit(k + 1, C);
  }
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "feasible";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kSolverError:
      return "solver-error";
  }
  return "unknown";
}

}  // namespace bddc::sdp
