#include "bddc/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "bddc/errors.hpp"

namespace bddc {

namespace {

using sdp::AffineMatrix;

double min_eig(const Eigen::MatrixXd& S) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()(0);
}

double max_eig(const Eigen::MatrixXd& S) {
  const auto ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly).eigenvalues();
  return ev(ev.size() - 1);
}

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& Q, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Q + Q.transpose()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double big = ev.cwiseAbs().maxCoeff();
  if (!(ev.cwiseAbs().minCoeff() > 1e-14 * big)) throw ParameterError(std::string(what) + " is singular");
  Eigen::MatrixXd inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (inv + inv.transpose());
}

Eigen::MatrixXd identity(int n) { return Eigen::MatrixXd::Identity(n, n); }

}  // namespace

StateRegion::StateRegion(const Eigen::MatrixXd& Qx, const Eigen::VectorXd& Sx, double Rx, double max_condition)
    : Qx_(0.5 * (Qx + Qx.transpose())), Sx_(Sx), Rx_(Rx) {
  const int n = static_cast<int>(Qx.rows());
  if (n < 1 || Qx.cols() != n) throw DimensionError("Qx must be square and non-empty");
  if (Sx.size() != n) throw DimensionError("Sx length differs from Qx size");
  if (!Qx.allFinite() || !Sx.allFinite() || !std::isfinite(Rx)) throw ParameterError("region data must be finite");
  if ((Qx - Qx.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Qx.cwiseAbs().maxCoeff()))
    throw ParameterError("Qx must be symmetric");
  if (!(max_eig(Qx_) < 0.0)) throw ParameterError("Qx must be negative definite");
  if (!(Rx > 0.0)) throw ParameterError("Rx must be positive");

  Eigen::MatrixXd M(n + 1, n + 1);
  M << Qx_, Sx_, Sx_.transpose(), Rx_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw ParameterError("region matrix is singular");
  Eigen::MatrixXd Mi = lu.inverse();
  Mi = 0.5 * (Mi + Mi.transpose());
  Qt_ = Mi.topLeftCorner(n, n);
  St_ = Mi.topRightCorner(n, 1);
  Rt_ = Mi(n, n);

  const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Qt_, Eigen::EigenvaluesOnly).eigenvalues();
  const double lo = ev.cwiseAbs().minCoeff();
  condition_ = lo > 0.0 ? ev.cwiseAbs().maxCoeff() / lo : std::numeric_limits<double>::infinity();
  if (!(condition_ <= max_condition)) {
    std::ostringstream msg;
    msg << "inverse region block is ill-conditioned (condition " << condition_ << ")";
    throw ParameterError(msg.str());
  }
  Qt_inv_ = symmetric_inverse(Qt_, "inverse region block");

  // (x - x_c)^T (-Qx) (x - x_c) <= Rx + Sx^T (-Qx)^{-1} Sx.
  const double rho = Rx_ + Sx_.dot(symmetric_inverse(-Qx_, "region shape") * Sx_);
  semi_axis_squared_ = rho / -max_eig(Qx_);
}

StateRegion StateRegion::NormBall(double c, int n_x) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("norm bound c must be positive");
  if (n_x < 1) throw DimensionError("n_x must be positive");
  return StateRegion(-identity(n_x), Eigen::VectorXd::Zero(n_x), c);
}

double StateRegion::margin(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw DimensionError("state dimension differs from region");
  return x.dot(Qx_ * x) + 2.0 * Sx_.dot(x) + Rx_;
}

bool StateRegion::contains(const Eigen::VectorXd& x, double tol) const { return margin(x) >= -tol; }

std::string to_string(SynthesisObjective o) {
  return o == SynthesisObjective::kMaxTraceP ? "max-trace-p" : "min-tau";
}

SynthesisObjective objective_from_string(const std::string& name) {
  if (name == "max-trace-p") return SynthesisObjective::kMaxTraceP;
  if (name == "min-tau") return SynthesisObjective::kMinTau;
  throw ConfigError("unknown synthesis objective '" + name + "'");
}

std::string to_string(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::kFeasible:
      return "feasible";
    case SynthesisStatus::kInfeasible:
      return "infeasible";
    case SynthesisStatus::kSolverError:
      return "solver-error";
  }
  return "unknown";
}

LmiVariables declare_lmi_variables(sdp::SdpProblem& problem, int n_x, int n_u) {
  LmiVariables v;
  v.P = problem.add_symmetric("P", n_x);
  v.L = problem.add_matrix("L", n_u, n_x);
  v.Lw = problem.add_matrix("L_w", n_u, n_x * n_u);
  v.Lambda = problem.add_symmetric("Lambda", n_u);
  v.tau = problem.add_scalar("tau");
  v.nu = problem.add_scalar("nu");
  return v;
}

AffineMatrix assemble_lmi_main(const LmiVariables& v, const EstimateSet& est, const StateRegion& region,
                               const Eigen::MatrixXd& Q_inverse) {
  const int n_x = est.state_dim();
  const int n_u = est.input_dim();
  if (region.dim() != n_x) throw DimensionError("region dimension differs from n_x");
  if (Q_inverse.rows() != n_x + n_u || Q_inverse.cols() != n_x + n_u)
    throw DimensionError("Q_inverse must be (n_x + n_u) square");

  const Eigen::MatrixXd& A = est.A;
  const Eigen::MatrixXd& B0 = est.B0;
  const Eigen::MatrixXd Aux = est.input_state_coupling();
  const Eigen::MatrixXd St = region.St();
  const Eigen::MatrixXd Rt = Eigen::MatrixXd::Constant(1, 1, region.Rt());
  const Eigen::MatrixXd Iu = identity(n_u);
  const Eigen::MatrixXd IuSt = Eigen::kroneckerProduct(Iu, St);
  const int nz = n_x + n_u;
  const int nw = n_u * n_x;

  // [0; L_w], (n_x + n_u) x (n_u n_x).
  const AffineMatrix ZLw = sdp::vstack({AffineMatrix::Zero(n_x, nw), v.Lw});
  const AffineMatrix PL = sdp::vstack({v.P, v.L});

  const AffineMatrix b11 = v.P - sdp::kron(v.tau, identity(n_x));
  const AffineMatrix b12 = -(Aux * sdp::kron(v.Lambda, St)) - B0 * (v.Lw * IuSt);
  const AffineMatrix b13 = AffineMatrix::Zero(n_x, nz);
  const AffineMatrix b14 = A * v.P + B0 * v.L;
  const AffineMatrix b15 = Aux * sdp::kron(v.Lambda, identity(n_x)) + B0 * v.Lw;

  const AffineMatrix b22 = sdp::kron(v.Lambda, Rt) - v.Lw * IuSt - IuSt.transpose() * v.Lw.transpose();
  const AffineMatrix b23 = -(IuSt.transpose() * ZLw.transpose());
  const AffineMatrix& b24 = v.L;
  const AffineMatrix& b25 = v.Lw;

  const AffineMatrix b33 = sdp::kron(v.tau, Q_inverse);
  const AffineMatrix& b34 = PL;
  const AffineMatrix b35 = -ZLw;

  const AffineMatrix& b44 = v.P;
  const AffineMatrix b45 = AffineMatrix::Zero(n_x, nw);

  const AffineMatrix b55 = -sdp::kron(v.Lambda, region.Qt_inverse());

  return sdp::blocks({
      {b11, b12, b13, b14, b15},
      {b12.transpose(), b22, b23, b24, b25},
      {b13.transpose(), b23.transpose(), b33, b34, b35},
      {b14.transpose(), b24.transpose(), b34.transpose(), b44, b45},
      {b15.transpose(), b25.transpose(), b35.transpose(), b45.transpose(), b55},
  });
}

AffineMatrix assemble_lmi_invariance(const LmiVariables& v, const StateRegion& region) {
  const Eigen::MatrixXd Rt = Eigen::MatrixXd::Constant(1, 1, region.Rt());
  const AffineMatrix corner = sdp::kron(v.nu, Rt) - AffineMatrix(Eigen::MatrixXd::Ones(1, 1));
  const AffineMatrix off = -sdp::kron(v.nu, Eigen::MatrixXd(region.St()));
  const AffineMatrix lower = sdp::kron(v.nu, region.Qt()) + v.P;
  return sdp::blocks({{corner, off.transpose()}, {off, lower}});
}

SynthesisProblem build_synthesis_problem(const EstimateSet& est, const StateRegion& region,
                                         const ResidualQuadBound& q, const SynthesisOptions& options) {
  validate(est);
  const int n_x = est.state_dim();
  const int n_u = est.input_dim();
  if (q.infeasible) throw ParameterError("residual bound is infinite");
  if (q.Q.rows() != n_x + n_u || q.Q.cols() != n_x + n_u)
    throw DimensionError("residual bound must be (n_x + n_u) square");
  if (!q.Q.allFinite()) throw ParameterError("residual bound must be finite");
  if (!(options.lmi_margin >= 0.0)) throw ParameterError("LMI margin must be nonnegative");

  SynthesisProblem sp;
  sp.Q_inverse = symmetric_inverse(regularized(q.Q), "regularized residual bound");
  sp.vars = declare_lmi_variables(sp.problem, n_x, n_u);
  const auto& v = sp.vars;
  // Relative to the region size, so shrinking X does not let the margin
  // dominate P.
  const double eps = options.lmi_margin * region.semi_axis_squared();

  AffineMatrix main = assemble_lmi_main(v, est, region, sp.Q_inverse);
  main -= AffineMatrix(eps * identity(main.rows()));
  sp.problem.add_psd("lyapunov_decay", main);
  sp.problem.add_psd("invariance", -assemble_lmi_invariance(v, region));
  sp.problem.add_psd("P_positive", v.P - AffineMatrix(eps * identity(n_x)));
  sp.problem.add_psd("Lambda_positive", v.Lambda - AffineMatrix(eps * identity(n_u)));
  sp.problem.add_psd("tau_positive", v.tau - AffineMatrix(Eigen::MatrixXd::Constant(1, 1, eps)));
  sp.problem.add_psd("nu_positive", v.nu - AffineMatrix(Eigen::MatrixXd::Constant(1, 1, eps)));

  if (options.objective == SynthesisObjective::kMaxTraceP)
    sp.problem.maximize(sdp::trace(v.P));
  else
    sp.problem.maximize(-v.tau);
  return sp;
}

ControllerSolution synthesize(const EstimateSet& est, const StateRegion& region, const ResidualQuadBound& q,
                              const sdp::ConicSolver& solver, const SynthesisOptions& options) {
  ControllerSolution sol;
  const SynthesisProblem sp = build_synthesis_problem(est, region, q, options);
  const sdp::SolveResult res = solver.solve(sp.problem);
  std::ostringstream diag;
  diag << solver.name() << ": " << sdp::to_string(res.status) << "; " << res.message;

  if (res.status == sdp::SolveStatus::kInfeasible) {
    sol.status = SynthesisStatus::kInfeasible;
    sol.diagnostics = diag.str();
    return sol;
  }
  if (res.status != sdp::SolveStatus::kOptimal || res.y.size() != sp.problem.num_variables()) {
    sol.status = SynthesisStatus::kSolverError;
    sol.diagnostics = diag.str();
    return sol;
  }

  const auto& v = sp.vars;
  sol.P = v.P.evaluate(res.y);
  sol.P = 0.5 * (sol.P + sol.P.transpose());
  sol.L = v.L.evaluate(res.y);
  sol.Lw = v.Lw.evaluate(res.y);
  sol.Lambda = v.Lambda.evaluate(res.y);
  sol.Lambda = 0.5 * (sol.Lambda + sol.Lambda.transpose());
  sol.tau = v.tau.evaluate(res.y)(0, 0);
  sol.nu = v.nu.evaluate(res.y)(0, 0);
  sol.objective = sol.P.trace();

  // Independent check on the unshifted, unscaled LMIs.
  sol.main_lmi_min_eig = min_eig(assemble_lmi_main(v, est, region, sp.Q_inverse).evaluate(res.y));
  sol.invariance_lmi_max_eig = max_eig(assemble_lmi_invariance(v, region).evaluate(res.y));
  const bool ok = sol.main_lmi_min_eig >= 0.0 && sol.invariance_lmi_max_eig <= options.invariance_tolerance &&
                  min_eig(sol.P) > 0.0 && min_eig(sol.Lambda) > 0.0 && sol.tau > 0.0 && sol.nu > 0.0;
  diag << "; lambda_min(main) " << sol.main_lmi_min_eig << ", lambda_max(invariance) "
       << sol.invariance_lmi_max_eig;
  if (!ok) {
    diag << "; a-posteriori check failed";
    sol.status = SynthesisStatus::kSolverError;
  } else {
    sol.status = SynthesisStatus::kFeasible;
  }
  sol.diagnostics = diag.str();
  return sol;
}

Eigen::VectorXd control_input(const ControllerSolution& sol, const Eigen::VectorXd& x, double max_condition) {
  const int n_x = sol.state_dim();
  const int n_u = sol.input_dim();
  if (x.size() != n_x) throw DimensionError("state dimension differs from controller");
  const Eigen::MatrixXd Lambda_inv = symmetric_inverse(sol.Lambda, "Lambda");
  const Eigen::MatrixXd M = identity(n_u) - sol.Lw * Eigen::kroneckerProduct(Lambda_inv, Eigen::MatrixXd(x));
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition)) {
    std::ostringstream msg;
    msg << "controller gain is singular at the queried state (condition " << cond << ")";
    throw SingularGainError(cond, msg.str());
  }
  const Eigen::VectorXd Pinv_x = sol.P.ldlt().solve(x);
  return M.partialPivLu().solve(sol.L * Pinv_x);
}

double lyapunov_value(const ControllerSolution& sol, const Eigen::VectorXd& x) {
  if (x.size() != sol.state_dim()) throw DimensionError("state dimension differs from controller");
  return x.dot(sol.P.ldlt().solve(x));
}

bool roa_membership(const ControllerSolution& sol, const Eigen::VectorXd& x) {
  return lyapunov_value(sol, x) <= 1.0 + 1e-12;
}

Eigen::VectorXd sample_in_roa(const ControllerSolution& sol, Engine& rng) {
  const int n = sol.state_dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.P);
  const Eigen::MatrixXd root =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double radius = std::pow(unif(rng), 1.0 / n);
  return root * (radius * unit_sphere(n, rng));
}

std::vector<Eigen::VectorXd> roa_boundary(const ControllerSolution& sol, int points) {
  const int n = sol.state_dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.P);
  const Eigen::MatrixXd root =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  std::vector<Eigen::VectorXd> out;
  out.reserve(points);
  for (int k = 0; k < points; ++k) {
    const double a = 2.0 * std::numbers::pi * k / points;
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
    dir(0) = std::cos(a);
    if (n > 1) dir(1) = std::sin(a);
    out.push_back(root * dir);
  }
  return out;
}

RoaReport roa_report(const ControllerSolution& sol, const StateRegion& region, int samples, std::uint64_t seed,
                     double tolerance) {
  if (region.dim() != sol.state_dim()) throw DimensionError("region dimension differs from controller");
  RoaReport r;
  r.trace = sol.P.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.P);
  r.semi_axes = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  r.axes = es.eigenvectors();

  const int n = sol.state_dim();
  Eigen::MatrixXd M(n + 1, n + 1);
  M << sol.nu * region.Rt() - 1.0, -sol.nu * region.St().transpose(), -sol.nu * region.St(),
      sol.nu * region.Qt() + sol.P;
  r.invariance_max_eig = max_eig(M);
  r.invariance_holds = r.invariance_max_eig <= tolerance;

  r.is_norm_ball = region.Sx().isZero(0.0) && region.Qx().isApprox(-identity(n));
  if (r.is_norm_ball) r.norm_ball_check = es.eigenvalues()(n - 1) <= region.Rx() * (1.0 + tolerance);

  const Eigen::MatrixXd root = es.eigenvectors() * r.semi_axes.asDiagonal() * es.eigenvectors().transpose();
  Engine rng = make_engine(seed);
  for (int k = 0; k < samples; ++k) {
    const Eigen::VectorXd x = root * unit_sphere(n, rng);
    ++r.sampled_points;
    if (!region.contains(x, tolerance * std::max(1.0, std::abs(region.Rx())))) ++r.sampled_violations;
  }
  return r;
}

ClosedLoopCertificate simulate_closed_loop(const BilinearSystemd& truth, const ControllerSolution& sol,
                                           const StateRegion& region, const Eigen::VectorXd& x0,
                                           const ClosedLoopOptions& options) {
  if (x0.size() != truth.state_dim() || truth.state_dim() != sol.state_dim() ||
      truth.input_dim() != sol.input_dim())
    throw DimensionError("closed-loop dimensions are inconsistent");
  ClosedLoopCertificate c;
  Eigen::VectorXd x = x0;
  const double v0 = lyapunov_value(sol, x0);
  c.states.push_back(x);
  c.lyapunov.push_back(v0);
  if (!region.contains(x, 1e-9)) {
    c.stayed_in_region = false;
    c.failure = "initial state outside the region";
  }
  // Floor below which V is rounding noise and the trajectory has converged.
  const double floor = std::max(v0 * options.convergence_ratio, 1e-300);
  for (int t = 0; t < options.steps && v0 > 0.0; ++t) {
    Eigen::VectorXd u;
    try {
      u = control_input(sol, x);
    } catch (const SingularGainError& e) {
      c.failure = e.what();
      c.monotone = false;
      break;
    }
    c.inputs.push_back(u);
    c.max_input_norm = std::max(c.max_input_norm, u.lpNorm<Eigen::Infinity>());
    x = step(truth, x, u);
    const double v = lyapunov_value(sol, x);
    c.states.push_back(x);
    c.lyapunov.push_back(v);
    if (!x.allFinite()) {
      c.monotone = false;
      c.failure = "state diverged";
      break;
    }
    if (c.stayed_in_region && !region.contains(x, 1e-9)) {
      c.stayed_in_region = false;
      std::ostringstream msg;
      msg << "trajectory left the region at step " << t + 1;
      c.failure = msg.str();
    }
    const double prev = c.lyapunov[c.lyapunov.size() - 2];
    if (!(v < prev)) {
      c.monotone = false;
      if (c.failure.empty()) {
        std::ostringstream msg;
        msg << "Lyapunov value did not decrease at step " << t + 1 << " (" << prev << " -> " << v << ")";
        c.failure = msg.str();
      }
    }
    if (v <= floor) break;
  }

  if (v0 > 0.0) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 1; t < c.lyapunov.size(); ++t) {
      if (!(c.lyapunov[t] > 0.0)) break;
      const double y = std::log(c.lyapunov[t] / v0);
      num += static_cast<double>(t) * y;
      den += static_cast<double>(t * t);
      c.rho_envelope = std::max(c.rho_envelope, std::pow(c.lyapunov[t] / v0, 1.0 / t));
    }
    c.rho = den > 0.0 ? std::exp(num / den) : 0.0;
  }
  c.passed = c.monotone && c.stayed_in_region && c.rho <= options.rho_threshold;
  if (!c.passed && c.failure.empty()) {
    std::ostringstream msg;
    msg << "fitted decay rate " << c.rho << " exceeds " << options.rho_threshold;
    c.failure = msg.str();
  }
  return c;
}

}  // namespace bddc
