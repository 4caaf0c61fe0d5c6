#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bddc/identification.hpp"
#include "bddc/random.hpp"
#include "bddc/sdp.hpp"
#include "bddc/uncertainty.hpp"

namespace bddc {

/// X = { x : [x; 1]^T [Qx Sx; Sx^T Rx] [x; 1] >= 0 } with Qx < 0, Rx > 0.
/// The inverse blocks (Qt, St, Rt) of [Qx Sx; Sx^T Rx]^{-1} are computed on
/// construction.
class StateRegion {
 public:
  StateRegion(const Eigen::MatrixXd& Qx, const Eigen::VectorXd& Sx, double Rx,
              double max_condition = 1e10);

  /// ||x||^2 <= c.
  static StateRegion NormBall(double c, int n_x);

  int dim() const { return static_cast<int>(Qx_.rows()); }
  const Eigen::MatrixXd& Qx() const { return Qx_; }
  const Eigen::VectorXd& Sx() const { return Sx_; }
  double Rx() const { return Rx_; }
  const Eigen::MatrixXd& Qt() const { return Qt_; }
  const Eigen::VectorXd& St() const { return St_; }
  double Rt() const { return Rt_; }
  const Eigen::MatrixXd& Qt_inverse() const { return Qt_inv_; }
  /// Condition number of Qt.
  double condition() const { return condition_; }
  /// Largest squared semi-axis of X (c for the ball ||x||^2 <= c).
  double semi_axis_squared() const { return semi_axis_squared_; }

  /// Region inequality value [x;1]^T M [x;1]; x is inside iff >= 0.
  double margin(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;

 private:
  Eigen::MatrixXd Qx_;
  Eigen::VectorXd Sx_;
  double Rx_;
  Eigen::MatrixXd Qt_;
  Eigen::VectorXd St_;
  double Rt_ = 0.0;
  Eigen::MatrixXd Qt_inv_;
  double condition_ = 1.0;
  double semi_axis_squared_ = 1.0;
};

inline StateRegion region_from_norm_bound(double c, int n_x) { return StateRegion::NormBall(c, n_x); }

enum class SynthesisObjective { kMaxTraceP, kMinTau };

std::string to_string(SynthesisObjective o);
SynthesisObjective objective_from_string(const std::string& name);

struct SynthesisOptions {
  double lmi_margin = 1e-6;
  SynthesisObjective objective = SynthesisObjective::kMaxTraceP;
  /// Tolerance of the a-posteriori check of the invariance LMI.
  double invariance_tolerance = 1e-7;
};

/// Decision variables of the design LMIs.
struct LmiVariables {
  sdp::AffineMatrix P;       // n_x x n_x symmetric
  sdp::AffineMatrix L;       // n_u x n_x
  sdp::AffineMatrix Lw;      // n_u x (n_x n_u)
  sdp::AffineMatrix Lambda;  // n_u x n_u symmetric
  sdp::AffineMatrix tau;     // 1 x 1
  sdp::AffineMatrix nu;      // 1 x 1
};

LmiVariables declare_lmi_variables(sdp::SdpProblem& problem, int n_x, int n_u);

/// Left-hand side of the main design LMI (required > 0), block sizes
/// (n_x, n_u, n_x + n_u, n_x, n_u n_x). `Q_inverse` is the inverse of the
/// regularized residual bound.
sdp::AffineMatrix assemble_lmi_main(const LmiVariables& v, const EstimateSet& est,
                                    const StateRegion& region, const Eigen::MatrixXd& Q_inverse);

/// Left-hand side of the invariance LMI (required <= 0):
///   [nu Rt - 1, -nu St^T; -nu St, nu Qt + P].
sdp::AffineMatrix assemble_lmi_invariance(const LmiVariables& v, const StateRegion& region);

struct SynthesisProblem {
  sdp::SdpProblem problem;
  LmiVariables vars;
  Eigen::MatrixXd Q_inverse;
};

/// Full program: main LMI >= eps I, invariance LMI <= 0, P >= eps I,
/// Lambda >= eps I, tau >= eps, nu >= eps, where eps is lmi_margin times the
/// largest squared semi-axis of the region.
SynthesisProblem build_synthesis_problem(const EstimateSet& est, const StateRegion& region,
                                         const ResidualQuadBound& q, const SynthesisOptions& options = {});

enum class SynthesisStatus { kFeasible, kInfeasible, kSolverError };

std::string to_string(SynthesisStatus s);

struct ControllerSolution {
  SynthesisStatus status = SynthesisStatus::kSolverError;
  Eigen::MatrixXd P;
  Eigen::MatrixXd L;
  Eigen::MatrixXd Lw;
  Eigen::MatrixXd Lambda;
  double nu = 0.0;
  double tau = 0.0;
  double objective = 0.0;
  /// lambda_min of the main LMI and lambda_max of the invariance LMI at the
  /// returned point.
  double main_lmi_min_eig = 0.0;
  double invariance_lmi_max_eig = 0.0;
  std::string diagnostics;

  bool feasible() const { return status == SynthesisStatus::kFeasible; }
  int state_dim() const { return static_cast<int>(P.rows()); }
  int input_dim() const { return static_cast<int>(L.rows()); }
};

ControllerSolution synthesize(const EstimateSet& est, const StateRegion& region, const ResidualQuadBound& q,
                              const sdp::ConicSolver& solver, const SynthesisOptions& options = {});

/// u = (I - Lw (Lambda^{-1} kron x))^{-1} L P^{-1} x.
Eigen::VectorXd control_input(const ControllerSolution& sol, const Eigen::VectorXd& x,
                              double max_condition = 1e12);

/// x^T P^{-1} x.
double lyapunov_value(const ControllerSolution& sol, const Eigen::VectorXd& x);

/// x^T P^{-1} x <= 1 (closed set, evaluated with relative tolerance 1e-12).
bool roa_membership(const ControllerSolution& sol, const Eigen::VectorXd& x);

struct RoaReport {
  double trace = 0.0;
  Eigen::VectorXd semi_axes;     // sqrt of eigenvalues of P, ascending
  Eigen::MatrixXd axes;          // matching eigenvectors
  double invariance_max_eig = 0.0;
  bool invariance_holds = false;  // invariance LMI within tolerance
  bool norm_ball_check = true;    // lambda_max(P) <= c for norm-ball regions
  bool is_norm_ball = false;
  int sampled_points = 0;
  int sampled_violations = 0;     // boundary samples outside X
  bool contained() const { return invariance_holds && norm_ball_check && sampled_violations == 0; }
};

RoaReport roa_report(const ControllerSolution& sol, const StateRegion& region, int samples = 2000,
                     std::uint64_t seed = 0, double tolerance = 1e-7);

/// Uniform sample from the RoA ellipsoid.
Eigen::VectorXd sample_in_roa(const ControllerSolution& sol, Engine& rng);

/// Points on the RoA boundary, evenly spaced in angle for n_x = 2 and along
/// a (first two coordinates) cut otherwise.
std::vector<Eigen::VectorXd> roa_boundary(const ControllerSolution& sol, int points);

struct ClosedLoopOptions {
  int steps = 200;
  double rho_threshold = 1.0 - 1e-4;
  /// Stop once V has dropped below this fraction of V(x0).
  double convergence_ratio = 1e-20;
};

struct ClosedLoopCertificate {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<double> lyapunov;
  bool monotone = true;
  bool stayed_in_region = true;
  double rho = 0.0;           // least-squares fit of log V_t = log V_0 + t log rho
  double rho_envelope = 0.0;  // max_t (V_t / V_0)^{1/t}
  double max_input_norm = 0.0;
  bool passed = false;
  std::string failure;
};

/// Noise-free closed loop on the true system with the synthesized controller.
ClosedLoopCertificate simulate_closed_loop(const BilinearSystemd& truth, const ControllerSolution& sol,
                                           const StateRegion& region, const Eigen::VectorXd& x0,
                                           const ClosedLoopOptions& options = {});

}  // namespace bddc
