#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bddc::sdp {

/// Matrix-valued affine function of the decision vector y:
///   F(y) = F_0 + sum_k y_k F_k.
class AffineMatrix {
 public:
  AffineMatrix() = default;
  AffineMatrix(int rows, int cols);
  explicit AffineMatrix(const Eigen::MatrixXd& constant);

  static AffineMatrix Zero(int rows, int cols) { return AffineMatrix(rows, cols); }
  static AffineMatrix Identity(int n);

  int rows() const { return static_cast<int>(constant_.rows()); }
  int cols() const { return static_cast<int>(constant_.cols()); }

  const Eigen::MatrixXd& constant() const { return constant_; }
  const std::map<int, Eigen::MatrixXd>& terms() const { return terms_; }
  Eigen::MatrixXd coefficient(int k) const;

  /// Adds y_k * coeff.
  void add_term(int k, const Eigen::MatrixXd& coeff);

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const;
  AffineMatrix transpose() const;
  AffineMatrix block(int r, int c, int nr, int nc) const;
  bool is_symmetric(double tol = 1e-12) const;

  AffineMatrix& operator+=(const AffineMatrix& other);
  AffineMatrix& operator-=(const AffineMatrix& other);
  AffineMatrix& operator*=(double s);

 private:
  Eigen::MatrixXd constant_;
  std::map<int, Eigen::MatrixXd> terms_;
};

AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b);
AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b);
AffineMatrix operator-(AffineMatrix a);
AffineMatrix operator*(double s, AffineMatrix a);
AffineMatrix operator*(const Eigen::MatrixXd& M, const AffineMatrix& a);
AffineMatrix operator*(const AffineMatrix& a, const Eigen::MatrixXd& M);

AffineMatrix kron(const AffineMatrix& a, const Eigen::MatrixXd& M);
AffineMatrix kron(const Eigen::MatrixXd& M, const AffineMatrix& a);

/// 1 x 1 expression.
AffineMatrix trace(const AffineMatrix& a);

/// Block assembly; every row of blocks must agree on heights and every
/// column on widths.
AffineMatrix blocks(const std::vector<std::vector<AffineMatrix>>& rows);
AffineMatrix vstack(const std::vector<AffineMatrix>& parts);
AffineMatrix hstack(const std::vector<AffineMatrix>& parts);

enum class VarShape { kScalar, kSymmetric, kRectangular };

struct VariableBlock {
  std::string name;
  VarShape shape = VarShape::kScalar;
  int rows = 1;
  int cols = 1;
  int offset = 0;  // first index in y
  int count = 1;   // number of scalar unknowns
};

/// F(y) >= 0 in the semidefinite order.
struct PsdConstraint {
  std::string name;
  AffineMatrix F;
};

/// maximize c^T y subject to a list of LMIs.
class SdpProblem {
 public:
  AffineMatrix add_scalar(const std::string& name);
  AffineMatrix add_symmetric(const std::string& name, int n);
  AffineMatrix add_matrix(const std::string& name, int rows, int cols);

  /// Requires a square, symmetric expression.
  void add_psd(const std::string& name, const AffineMatrix& F);

  /// Objective c^T y from a 1 x 1 expression (its constant is ignored).
  void maximize(const AffineMatrix& objective);

  int num_variables() const { return num_variables_; }
  const std::vector<VariableBlock>& variables() const { return variables_; }
  const std::vector<PsdConstraint>& constraints() const { return constraints_; }
  Eigen::VectorXd objective() const;

  /// Smallest eigenvalue of each constraint at y.
  std::vector<double> min_eigenvalues(const Eigen::VectorXd& y) const;

  /// Sparse triplet text format, see docs/sdp_format.md.
  void write_triplets(std::ostream& out) const;

 private:
  int allocate(const std::string& name, VarShape shape, int rows, int cols, int count);

  int num_variables_ = 0;
  std::vector<VariableBlock> variables_;
  std::vector<PsdConstraint> constraints_;
  std::map<int, double> objective_;
};

enum class SolveStatus { kOptimal, kInfeasible, kSolverError };

std::string to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::kSolverError;
  Eigen::VectorXd y;
  double objective = 0.0;
  int newton_steps = 0;
  /// Best value of s in F(y) >= s D^{-2} found during the feasibility
  /// phase (positive means strictly feasible).
  double feasibility_margin = 0.0;
  std::string message;
};

/// Interface to a conic back end.
class ConicSolver {
 public:
  virtual ~ConicSolver() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const SdpProblem& problem) const = 0;
};

struct BarrierOptions {
  /// Every scalar unknown is confined to [-variable_bound, variable_bound].
  double variable_bound = 1e9;
  /// Relative duality-gap target for the optimization phase.
  double gap_tolerance = 1e-8;
  double path_factor = 10.0;
  int max_newton_steps = 5000;
  /// Congruence scaling D F D of each constraint by the inverse square root
  /// of its coefficient diagonal.
  bool scale_constraints = true;
};

/// Primal log-det barrier path-following method. A feasibility phase
/// maximizes s subject to F(y) - s I >= 0 and either finds a strictly
/// feasible point or certifies infeasibility through the barrier duality gap;
/// the optimization phase then follows the central path of
/// max c^T y + (1/t) sum log det F(y). Every returned iterate is strictly
/// feasible.
class BarrierSdpSolver : public ConicSolver {
 public:
  explicit BarrierSdpSolver(BarrierOptions options = {}) : options_(options) {}
  std::string name() const override { return "barrier"; }
  SolveResult solve(const SdpProblem& problem) const override;
  const BarrierOptions& options() const { return options_; }

 private:
  BarrierOptions options_;
};

}  // namespace bddc::sdp
