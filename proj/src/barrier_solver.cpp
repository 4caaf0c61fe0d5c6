#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "bddc/sdp.hpp"

namespace bddc::sdp {

namespace {

struct Block {
  Eigen::MatrixXd F0;
  std::vector<int> vars;
  std::vector<Eigen::MatrixXd> F;
};

struct Program {
  int m = 0;
  std::vector<Block> blocks;
  Eigen::VectorXd bound;  // |y_k| < bound(k)

  double theta() const {
    double th = 2.0 * m;
    for (const auto& b : blocks) th += b.F0.rows();
    return th;
  }
};

Program compile(const SdpProblem& problem, const BarrierOptions& opt) {
  Program p;
  p.m = problem.num_variables();
  p.bound = Eigen::VectorXd::Constant(p.m, opt.variable_bound);
  for (const auto& c : problem.constraints()) {
    const int n = c.F.rows();
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    if (opt.scale_constraints) {
      Eigen::VectorXd diag = c.F.constant().diagonal().cwiseAbs();
      for (const auto& [k, C] : c.F.terms()) diag = diag.cwiseMax(C.diagonal().cwiseAbs());
      for (int i = 0; i < n; ++i) d(i) = diag(i) > 0.0 ? 1.0 / std::sqrt(diag(i)) : 1.0;
    }
    Block b;
    b.F0 = d.asDiagonal() * c.F.constant() * d.asDiagonal();
    for (const auto& [k, C] : c.F.terms()) {
      if (C.cwiseAbs().maxCoeff() == 0.0) continue;
      b.vars.push_back(k);
      b.F.push_back(d.asDiagonal() * C * d.asDiagonal());
    }
    p.blocks.push_back(std::move(b));
  }
  return p;
}

Eigen::MatrixXd block_value(const Block& b, const Eigen::VectorXd& y) {
  Eigen::MatrixXd S = b.F0;
  for (std::size_t j = 0; j < b.vars.size(); ++j) S += y(b.vars[j]) * b.F[j];
  return S;
}

// Barrier -sum log det F_b(y) - sum log(bound^2 - y^2); +inf outside.
double barrier(const Program& p, const Eigen::VectorXd& y) {
  double v = 0.0;
  for (int k = 0; k < p.m; ++k) {
    const double r = p.bound(k) * p.bound(k) - y(k) * y(k);
    if (!(r > 0.0)) return std::numeric_limits<double>::infinity();
    v -= std::log(r);
  }
  for (const auto& b : p.blocks) {
    Eigen::LLT<Eigen::MatrixXd> llt(block_value(b, y));
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const auto diag = llt.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
      if (!(diag(i) > 0.0)) return std::numeric_limits<double>::infinity();
      v -= 2.0 * std::log(diag(i));
    }
  }
  return v;
}

bool derivatives(const Program& p, const Eigen::VectorXd& y, Eigen::VectorXd& g, Eigen::MatrixXd& H) {
  g = Eigen::VectorXd::Zero(p.m);
  H = Eigen::MatrixXd::Zero(p.m, p.m);
  for (int k = 0; k < p.m; ++k) {
    const double a = p.bound(k) - y(k);
    const double b = p.bound(k) + y(k);
    g(k) += 1.0 / a - 1.0 / b;
    H(k, k) += 1.0 / (a * a) + 1.0 / (b * b);
  }
  std::vector<Eigen::MatrixXd> G;
  for (const auto& blk : p.blocks) {
    Eigen::LLT<Eigen::MatrixXd> llt(block_value(blk, y));
    if (llt.info() != Eigen::Success) return false;
    const auto L = llt.matrixL();
    G.resize(blk.vars.size());
    for (std::size_t j = 0; j < blk.vars.size(); ++j) {
      Eigen::MatrixXd tmp = L.solve(blk.F[j]);
      G[j] = L.solve(Eigen::MatrixXd(tmp.transpose()));
      g(blk.vars[j]) -= G[j].trace();
    }
    for (std::size_t i = 0; i < blk.vars.size(); ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const double h = G[i].cwiseProduct(G[j].transpose()).sum();
        H(blk.vars[i], blk.vars[j]) += h;
        if (i != j) H(blk.vars[j], blk.vars[i]) += h;
      }
  }
  return true;
}

enum class CenterStatus { kCentered, kStopped, kStalled, kFailed };

// Damped Newton on  -t c^T y + barrier(y).
CenterStatus center(const Program& p, const Eigen::VectorXd& c, double t, Eigen::VectorXd& y,
                    int& steps, int max_steps, const std::function<bool(const Eigen::VectorXd&)>& stop) {
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  for (int iter = 0; iter < 200; ++iter) {
    if (steps >= max_steps) return CenterStatus::kFailed;
    if (!derivatives(p, y, g, H)) return CenterStatus::kFailed;
    g -= t * c;
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    Eigen::VectorXd d;
    if (llt.info() == Eigen::Success) {
      d = -llt.solve(g);
    } else {
      const double ridge = 1e-14 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      d = -(H + ridge * Eigen::MatrixXd::Identity(p.m, p.m)).ldlt().solve(g);
    }
    const double lambda2 = -g.dot(d);
    if (!std::isfinite(lambda2)) return CenterStatus::kFailed;
    if (lambda2 <= 2e-10) return CenterStatus::kCentered;
    const double f0 = -t * c.dot(y) + barrier(p, y);
    double alpha = lambda2 > 0.0625 ? 1.0 / (1.0 + std::sqrt(lambda2)) : 1.0;
    Eigen::VectorXd yn;
    for (;;) {
      yn = y + alpha * d;
      const double fb = barrier(p, yn);
      if (std::isfinite(fb)) {
        if (lambda2 <= 0.0625) break;  // quadratic convergence region
        const double f1 = -t * c.dot(yn) + fb;
        if (f1 <= f0 - 0.25 * alpha * lambda2) break;
      }
      alpha *= 0.5;
      if (alpha < 1e-12) return lambda2 < 1e-4 ? CenterStatus::kCentered : CenterStatus::kStalled;
    }
    y = yn;
    ++steps;
    if (stop && stop(y)) return CenterStatus::kStopped;
  }
  return CenterStatus::kStalled;
}

double min_block_eigenvalue(const Program& p, const Eigen::VectorXd& y) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& b : p.blocks) {
    const Eigen::MatrixXd S = block_value(b, y);
    lo = std::min(lo, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues()(0));
  }
  return lo;
}

}  // namespace

SolveResult BarrierSdpSolver::solve(const SdpProblem& problem) const {
  const BarrierOptions& opt = options_;
  SolveResult res;
  const Program p = compile(problem, opt);
  const Eigen::VectorXd c = problem.objective();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(p.m);
  int steps = 0;
  std::ostringstream log;

  // Feasibility phase: maximize s subject to F_b(y) - s I >= 0.
  double s0 = p.blocks.empty() ? 1.0 : min_block_eigenvalue(p, y);
  res.feasibility_margin = s0;
  if (!(s0 > 0.0)) {
    Program q = p;
    q.m = p.m + 1;
    const double sbound = 2.0 * std::abs(s0) + 10.0;
    q.bound.conservativeResize(q.m);
    q.bound(p.m) = sbound;
    for (auto& b : q.blocks) {
      b.vars.push_back(p.m);
      b.F.push_back(-Eigen::MatrixXd::Identity(b.F0.rows(), b.F0.cols()));
    }
    Eigen::VectorXd ys = Eigen::VectorXd::Zero(q.m);
    ys(p.m) = s0 - 1.0;
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(q.m);
    cs(p.m) = 1.0;
    const double theta = q.theta();
    bool found = false;
    for (double t = 1.0;; t *= opt.path_factor) {
      const auto st = center(q, cs, t, ys, steps, opt.max_newton_steps, nullptr);
      if (st == CenterStatus::kFailed) {
        res.status = SolveStatus::kSolverError;
        res.message = "feasibility phase: Newton iteration failed";
        res.newton_steps = steps;
        return res;
      }
      const double s = ys(p.m);
      res.feasibility_margin = s;
      if (s > 0.0) {
        found = true;
        break;
      }
      if (s + 2.0 * theta / t < 0.0) break;
      if (theta / t < 1e-14 * std::max(1.0, std::abs(s)) || st == CenterStatus::kStalled) break;
    }
    res.newton_steps = steps;
    if (!found) {
      res.status = SolveStatus::kInfeasible;
      log << "feasibility phase: best margin " << res.feasibility_margin << " <= 0";
      res.message = log.str();
      res.y = ys.head(p.m);
      return res;
    }
    y = ys.head(p.m);
  }

  // Optimization phase.
  const double theta = p.theta();
  double t = 1.0 / std::max(1.0, c.cwiseAbs().maxCoeff());
  for (;;) {
    const auto st = center(p, c, t, y, steps, opt.max_newton_steps, nullptr);
    if (st == CenterStatus::kFailed) {
      res.status = SolveStatus::kSolverError;
      res.message = "optimization phase: Newton iteration failed";
      break;
    }
    const double obj = c.dot(y);
    if (theta / t <= opt.gap_tolerance * std::max(1.0, std::abs(obj)) || st == CenterStatus::kStalled) {
      res.status = SolveStatus::kOptimal;
      if (st == CenterStatus::kStalled) log << "stalled at gap " << theta / t << "; ";
      break;
    }
    t *= opt.path_factor;
  }
  res.y = y;
  res.objective = c.dot(y);
  res.newton_steps = steps;
  if (p.m > 0 && (y.cwiseAbs().array() > 0.99 * p.bound.array()).any()) log << "variable bound active; ";
  log << "newton steps " << steps;
  res.message = log.str();
  return res;
}

}  // namespace bddc::sdp
