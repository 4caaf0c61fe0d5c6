#include "bddc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bddc/errors.hpp"
#include "bddc/identification.hpp"
#include "bddc/lifting.hpp"
#include "bddc/parallel.hpp"
#include "bddc/random.hpp"
#include "bddc/systems.hpp"

namespace bddc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

double max_eigenvalue(const Eigen::MatrixXd& M) {
  if (M.size() == 0 || !M.allFinite()) return kInfinity;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation; NaN when undefined or when an entry is infinite.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return v.empty() ? kNaN : 0.0;
  for (double x : v)
    if (!std::isfinite(x)) return kNaN;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

StateSamplerSpec sampler_with_dim(const StateSamplerSpec& base, int n_x) {
  switch (base.family) {
    case SamplerFamily::kGaussian:
      return StateSamplerSpec::Gaussian(n_x, base.scale);
    case SamplerFamily::kUniformBox:
      return StateSamplerSpec::Uniform(n_x, base.scale);
    case SamplerFamily::kLifted:
      break;
  }
  throw ConfigError("error sweeps need a gaussian or uniform sampler");
}

std::vector<int> sample_counts(const std::vector<ExperimentDataset>& data) {
  std::vector<int> out;
  for (const auto& d : data) out.push_back(d.samples());
  return out;
}

}  // namespace

BoundStage compute_bounds(const std::vector<ExperimentDataset>& data, const StateSamplerSpec& sampler,
                          const NoiseSpec& noise, double delta, BoundKind kind, const InputBox& box,
                          bool overestimate) {
  if (data.size() < 2) throw DimensionError("bounds need the unforced and at least one forced experiment");
  const int n_x = data.front().state_dim();
  const int n_u = static_cast<int>(data.size()) - 1;
  const double sx = sigma_x(sampler);
  BoundStage b;
  b.kind = kind;
  switch (kind) {
    case BoundKind::kAPriori:
      b.spectral = a_priori_bounds(n_x, n_u, delta, noise.sigma, sx, sample_counts(data));
      b.q_raw = qdelta_individual(*b.spectral, box, n_x);
      break;
    case BoundKind::kDataDependent:
      b.spectral = data_dependent_bounds(grams(data, sx), delta, noise.sigma, sx);
      b.q_raw = qdelta_individual(*b.spectral, box, n_x);
      break;
    case BoundKind::kEllipsoidal:
      if (noise.family != NoiseFamily::kGaussian) throw ConfigError("ellipsoidal bounds require gaussian noise");
      b.ellipsoid = ellipsoidal_bounds(grams(data, sx), delta, noise.sigma, n_x, n_u);
      b.q_raw = qdelta_ellipsoidal(*b.ellipsoid, box);
      break;
  }
  b.q = overestimate ? overestimate_norm(b.q_raw) : b.q_raw;
  return b;
}

PipelineResult run_pipeline(const std::vector<ExperimentDataset>& data, const ExperimentConfig& cfg,
                            BoundKind kind, const StateRegion& region, const sdp::ConicSolver& solver) {
  PipelineResult r;
  r.samples = sample_counts(data);
  r.solution.status = SynthesisStatus::kInfeasible;
  try {
    r.estimate = identify(data);
  } catch (const RankDeficientError& e) {
    r.failure = e.what();
    return r;
  }
  r.bounds = compute_bounds(data, cfg.sampler, cfg.noise, cfg.delta, kind, cfg.box(r.estimate->input_dim()),
                            cfg.overestimate);
  if (r.bounds->q.infeasible) {
    r.failure = "error bound is infinite (burn-in not met or singular Gram matrix)";
    return r;
  }
  try {
    r.solution = synthesize(*r.estimate, region, r.bounds->q, solver, cfg.synthesis);
  } catch (const SolverError& e) {
    r.solution = {};
    r.solution.status = SynthesisStatus::kSolverError;
    r.solution.diagnostics = e.what();
  }
  if (!r.feasible()) r.failure = r.solution.diagnostics;
  return r;
}

Json to_json(const BoundStage& b) {
  Json j;
  j["kind"] = to_string(b.kind);
  if (b.spectral) j["spectral"] = to_json(*b.spectral);
  if (b.ellipsoid) j["ellipsoid"] = to_json(*b.ellipsoid);
  j["q_delta"] = to_json(b.q_raw);
  j["q_delta_used"] = to_json(b.q);
  return j;
}

Json to_json(const PipelineResult& r) {
  Json j;
  j["samples"] = r.samples;
  j["status"] = to_string(r.status());
  if (!r.failure.empty()) j["failure"] = r.failure;
  if (r.estimate) j["estimate"] = to_json(*r.estimate);
  if (r.bounds) j["bounds"] = to_json(*r.bounds);
  if (r.feasible()) j["controller"] = to_json(r.solution);
  return j;
}

// Error sweeps -------------------------------------------------------------

namespace {

struct TrialValues {
  double error = 0.0;
  double data_bound = 0.0;
  double apriori_bound = 0.0;
};

std::vector<SweepRow> sweep_rows(double grid_value, const SweepPoint& p) {
  std::vector<SweepRow> rows;
  const int n = static_cast<int>(p.error.size());
  auto add = [&](const std::string& name, double mean, double sd, int trials) {
    rows.push_back({grid_value, name, mean, sd, trials});
  };
  add("empirical_error", mean_of(p.error), std_of(p.error), n);
  add("data_bound", mean_of(p.data_bound), std_of(p.data_bound), n);
  add("apriori_bound", mean_of(p.apriori_bound), std_of(p.apriori_bound), n);
  std::vector<double> scaled, data_ratio, apriori_ratio;
  for (int k = 0; k < n; ++k) {
    scaled.push_back(p.error[k] * std::sqrt(static_cast<double>(p.samples)));
    data_ratio.push_back(p.data_bound[k] / p.error[k]);
    apriori_ratio.push_back(p.apriori_bound[k] / p.error[k]);
  }
  add("error_sqrtT", mean_of(scaled), std_of(scaled), n);
  add("data_ratio", mean_of(p.data_bound) / mean_of(p.error), std_of(data_ratio), n);
  add("apriori_ratio", mean_of(p.apriori_bound) / mean_of(p.error), std_of(apriori_ratio), n);
  const double rate = p.finite_bounds > 0 ? static_cast<double>(p.violations) / p.finite_bounds : kNaN;
  add("data_bound_violation", rate, p.finite_bounds > 0 ? std::sqrt(rate * (1.0 - rate) / p.finite_bounds) : kNaN,
      p.finite_bounds);
  return rows;
}

}  // namespace

SweepResult run_error_sweep(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::kErrorVsT && cfg.kind != ExperimentKind::kErrorVsNx)
    throw ConfigError("run_error_sweep needs an error-vs-T or error-vs-nx config");
  const bool over_T = cfg.kind == ExperimentKind::kErrorVsT;
  const std::vector<int>& grid = over_T ? cfg.T_grid : cfg.n_x_grid;
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  const int n_u = cfg.random_n_u;
  auto dims = [&](int g) {
    return over_T ? std::pair{cfg.random_n_x, grid[g]} : std::pair{grid[g], cfg.sweep_samples};
  };
  for (int g = 0; g < static_cast<int>(grid.size()); ++g) {
    const auto [n_x, T] = dims(g);
    if (T < n_x + 1) throw ConfigError("every sweep point needs T >= n_x + 1");
  }

  const int trials = cfg.trials;
  const int tasks = static_cast<int>(grid.size()) * trials;
  const std::vector<TrialValues> values = parallel_map<TrialValues>(tasks, [&](int task) {
    const int g = task / trials;
    const int trial = task % trials;
    const auto [n_x, T] = dims(g);
    const BilinearSystemd sys = cfg.system ? *cfg.system
                                           : random_system(n_x, n_u,
                                                           derive_seed(cfg.seed, {stream::kSystem,
                                                                                  static_cast<std::uint64_t>(n_x),
                                                                                  static_cast<std::uint64_t>(trial)}),
                                                           cfg.random_scale);
    CollectionPlan plan;
    plan.samples = std::vector<int>(n_u + 1, T);
    plan.sampler = sampler_with_dim(cfg.sampler, n_x);
    plan.noise = cfg.noise;
    plan.seed = derive_seed(cfg.seed, {stream::kTrial, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(trial)});
    const ExperimentDataset d = collect_experiment(sys, plan, 1);
    const ExperimentEstimate est = identify_experiment(d);
    const double sx = sigma_x(plan.sampler);
    const double scale = cfg.noise.sigma / sx;
    TrialValues v;
    v.error = spectral_norm(est.matrix - sys.B[0]);
    v.data_bound = T >= burn_in_data_dependent(n_x, n_u, cfg.delta).forced
                       ? scale * data_dependent_forced_factor(n_x, n_u, cfg.delta, gram(d, sx))
                       : kInfinity;
    v.apriori_bound = a_priori_bounds(n_x, n_u, cfg.delta, cfg.noise.sigma, sx, plan.samples).eps_B[0];
    return v;
  });

  SweepResult out;
  out.kind = cfg.kind;
  for (int g = 0; g < static_cast<int>(grid.size()); ++g) {
    SweepPoint p;
    std::tie(p.n_x, p.samples) = dims(g);
    for (int trial = 0; trial < trials; ++trial) {
      const TrialValues& v = values[g * trials + trial];
      p.error.push_back(v.error);
      p.data_bound.push_back(v.data_bound);
      p.apriori_bound.push_back(v.apriori_bound);
      if (std::isfinite(v.data_bound)) {
        ++p.finite_bounds;
        if (v.error > v.data_bound) ++p.violations;
      }
    }
    const auto rows = sweep_rows(grid[g], p);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    out.points.push_back(std::move(p));
  }
  return out;
}

// Minimal data length ------------------------------------------------------

std::string SearchEntry::minimal_T_string(int cap) const {
  return minimal_T ? std::to_string(*minimal_T) : ">" + std::to_string(cap);
}

namespace {

SearchEntry search_minimal_T(const std::vector<ExperimentDataset>& full, const ExperimentConfig& cfg,
                             const StateRegion& region, BoundKind kind, const sdp::ConicSolver& solver) {
  const int n_u = static_cast<int>(full.size()) - 1;
  SearchEntry e;
  e.kind = kind;
  e.region = region;
  std::map<int, PipelineResult> cache;
  auto feasible = [&](int T) {
    auto it = cache.find(T);
    if (it == cache.end()) {
      PipelineResult r = run_pipeline(prefix(full, std::vector<int>(n_u + 1, T)), cfg, kind, region, solver);
      e.trace.push_back({T, r.status(), r.failure});
      it = cache.emplace(T, std::move(r)).first;
    }
    return it->second.feasible();
  };
  int lo = 0;
  std::optional<int> hi;
  for (int T = 4; T <= cfg.cap; T *= 2) {
    if (feasible(T)) {
      hi = T;
      break;
    }
    lo = T;
  }
  if (!hi && lo < cfg.cap && feasible(cfg.cap)) hi = cfg.cap;
  if (!hi) return e;
  while (*hi - lo > 1) {
    const int mid = lo + (*hi - lo) / 2;
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  e.minimal_T = *hi;
  e.solution = cache.at(*hi).solution;
  e.trace_P = e.solution->P.trace();
  return e;
}

}  // namespace

FeasibilitySearchResult run_feasibility_search(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::kFeasibilitySearch) throw ConfigError("run_feasibility_search needs a feasibility-search config");
  const BilinearSystemd sys = cfg.system_for_trial(0);
  const int n_x = sys.state_dim();
  const int n_u = sys.input_dim();
  const std::vector<std::uint64_t> seeds = cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : cfg.seeds;

  std::vector<std::vector<ExperimentDataset>> data;
  for (std::uint64_t s : seeds) {
    CollectionPlan plan;
    plan.samples = std::vector<int>(n_u + 1, cfg.cap);
    plan.sampler = cfg.sampler;
    plan.noise = cfg.noise;
    plan.seed = s;
    data.push_back(collect(sys, plan));
  }

  const int n_values = static_cast<int>(cfg.region_grid.values.size());
  const int n_kinds = static_cast<int>(cfg.bound_kinds.size());
  const int n_seeds = static_cast<int>(seeds.size());
  const int tasks = n_values * n_kinds * n_seeds;
  const sdp::BarrierSdpSolver solver(cfg.solver);
  std::vector<SearchEntry> entries = parallel_map<SearchEntry>(tasks, [&](int task) {
    const int s = task % n_seeds;
    const int k = (task / n_seeds) % n_kinds;
    const int v = task / (n_seeds * n_kinds);
    const double value = cfg.region_grid.values[v];
    SearchEntry e = search_minimal_T(data[s], cfg, cfg.region_grid.region(value, n_x), cfg.bound_kinds[k], solver);
    e.value = value;
    e.seed = seeds[s];
    return e;
  });

  FeasibilitySearchResult out;
  out.cap = cfg.cap;
  for (int v = 0; v < n_values; ++v) {
    for (int k = 0; k < n_kinds; ++k) {
      SearchSummary sum;
      sum.value = cfg.region_grid.values[v];
      sum.kind = cfg.bound_kinds[k];
      sum.seeds = n_seeds;
      std::vector<double> Ts;
      for (int s = 0; s < n_seeds; ++s) {
        const SearchEntry& e = entries[(v * n_kinds + k) * n_seeds + s];
        Ts.push_back(e.minimal_T ? static_cast<double>(*e.minimal_T) : kInfinity);
        if (e.minimal_T) ++sum.feasible_seeds;
      }
      std::sort(Ts.begin(), Ts.end());
      const std::size_t m = Ts.size() / 2;
      const double median = Ts.size() % 2 ? Ts[m] : 0.5 * (Ts[m - 1] + Ts[m]);
      if (std::isfinite(median)) sum.median_T = median;
      out.summary.push_back(sum);
    }
  }
  out.entries = std::move(entries);
  return out;
}

// End to end -----------------------------------------------------------------

std::vector<ClosedLoopCertificate> closed_loop_certificates(const BilinearSystemd& truth,
                                                            const ControllerSolution& sol,
                                                            const StateRegion& region, int count,
                                                            int steps, std::uint64_t seed) {
  Engine rng = make_engine(seed);
  ClosedLoopOptions options;
  options.steps = steps;
  std::vector<ClosedLoopCertificate> out;
  for (int k = 0; k < count; ++k) out.push_back(simulate_closed_loop(truth, sol, region, sample_in_roa(sol, rng), options));
  return out;
}

namespace {

Json certificate_summary(const ClosedLoopCertificate& c) {
  Json j = to_json(c, false);
  j["x0"] = to_json(c.states.front());
  j["final_lyapunov"] = number_to_json(c.lyapunov.back());
  j["steps"] = static_cast<int>(c.states.size()) - 1;
  return j;
}

}  // namespace

EndToEndResult run_end_to_end(const ExperimentConfig& cfg, const sdp::ConicSolver& solver) {
  if (!cfg.region) throw ConfigError("end-to-end needs a region");
  const BilinearSystemd sys = cfg.system_for_trial(0);
  const int n_u = sys.input_dim();
  if (cfg.sampler.state_dim() != sys.state_dim()) throw ConfigError("sampler dimension differs from n_x");
  std::vector<int> samples = cfg.sample_list(n_u);

  EndToEndResult out;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    CollectionPlan plan;
    plan.samples = samples;
    plan.sampler = cfg.sampler;
    plan.noise = cfg.noise;
    plan.seed = attempt == 0 ? cfg.seed : derive_seed(cfg.seed, {stream::kAttempt, static_cast<std::uint64_t>(attempt)});
    out.attempt_seeds.push_back(plan.seed);
    out.attempts.push_back(run_pipeline(collect(sys, plan), cfg, cfg.bound_kind, *cfg.region, solver));
    out.status = out.attempts.back().status();
    if (out.success()) break;
    for (int& T : samples) T *= 2;
  }

  Json report;
  report["config"] = config_to_json(cfg);
  report["seed"] = cfg.seed;
  report["system"] = to_json(sys);
  report["system"]["name"] = cfg.system_name;
  report["solver"] = solver.name();
  Json attempts = Json::array();
  for (std::size_t a = 0; a < out.attempts.size(); ++a) {
    Json j = to_json(out.attempts[a]);
    j["seed"] = out.attempt_seeds[a];
    attempts.push_back(std::move(j));
  }
  report["attempts"] = attempts;
  report["status"] = to_string(out.status);

  if (out.success()) {
    const ControllerSolution& sol = out.attempts.back().solution;
    const std::uint64_t base = derive_seed(out.attempt_seeds.back(), {stream::kInitialState});
    out.roa = roa_report(sol, *cfg.region, 2000, derive_seed(base, {1}));
    out.closed_loop = closed_loop_certificates(sys, sol, *cfg.region, cfg.closed_loop_initial_states,
                                               cfg.closed_loop_steps, base);
    out.certificates_passed = out.roa->contained() && sol.main_lmi_min_eig > 0.0;
    Json loops = Json::array();
    for (const auto& c : out.closed_loop) {
      out.certificates_passed = out.certificates_passed && c.passed;
      loops.push_back(certificate_summary(c));
    }
    report["roa"] = to_json(*out.roa);
    report["closed_loop"] = loops;
    report["certificates_passed"] = out.certificates_passed;
  } else {
    report["failure"] = {{"reason", "retries exhausted"},
                         {"attempts", static_cast<int>(out.attempts.size())},
                         {"last_status", to_string(out.status)},
                         {"last_failure", out.attempts.back().failure}};
  }
  out.report = std::move(report);
  return out;
}

// Pendulum -------------------------------------------------------------------

std::vector<Eigen::Vector2d> pendulum_roa_boundary(const ControllerSolution& sol, const LiftingSpec& lifting,
                                                   int points, double max_radius) {
  std::vector<Eigen::Vector2d> out;
  const int scan = 400;
  for (int k = 0; k < points; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / points;
    const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
    auto V = [&](double r) { return lyapunov_value(sol, lift(lifting, Eigen::VectorXd(r * dir))); };
    // First crossing of V = 1 on a uniform scan, refined by bisection.
    double lo = 0.0, hi = max_radius;
    for (int s = 1; s <= scan; ++s) {
      const double r = max_radius * s / scan;
      if (V(r) > 1.0) {
        hi = r;
        break;
      }
      lo = r;
    }
    for (int it = 0; it < 60 && hi - lo > 1e-12 * max_radius; ++it) {
      const double mid = 0.5 * (lo + hi);
      (V(mid) > 1.0 ? hi : lo) = mid;
    }
    out.push_back(lo * dir);
  }
  return out;
}

namespace {

Json bound_magnitudes(const PipelineResult& r) {
  Json j;
  if (!r.bounds) return j;
  const BoundStage& b = *r.bounds;
  j["q_delta_norm"] = number_to_json(max_eigenvalue(b.q_raw.Q));
  j["q_delta_used_norm"] = number_to_json(max_eigenvalue(b.q.Q));
  if (b.ellipsoid) {
    j["E_A_norm"] = number_to_json(max_eigenvalue(b.ellipsoid->E_A));
    Json eb = Json::array();
    for (const auto& E : b.ellipsoid->E_B) eb.push_back(number_to_json(max_eigenvalue(E)));
    j["E_B_norm"] = eb;
    j["C_A"] = number_to_json(b.ellipsoid->C_A);
    j["C1"] = number_to_json(b.ellipsoid->C1);
  }
  if (b.spectral) {
    j["eps_A"] = number_to_json(b.spectral->eps_A);
    Json eb = Json::array();
    for (double e : b.spectral->eps_B) eb.push_back(number_to_json(e));
    j["eps_B"] = eb;
  }
  return j;
}

}  // namespace

PendulumResult run_pendulum(const ExperimentConfig& cfg, const sdp::ConicSolver& solver) {
  if (!cfg.region) throw ConfigError("pendulum needs a region");
  const BilinearSystemd sys = cfg.system ? *cfg.system : pendulum_lifted_system(cfg.pendulum);
  const LiftingSpec lifting = pendulum_lifting();
  if (sys.state_dim() != lifting.lifted_dim() || sys.input_dim() != 1)
    throw ConfigError("pendulum study needs the lifted pendulum system");
  if (cfg.sampler.state_dim() != sys.state_dim()) throw ConfigError("sampler dimension differs from n_x");

  CollectionPlan plan;
  plan.samples = cfg.sample_list(1);
  plan.sampler = cfg.sampler;
  plan.noise = cfg.noise;
  plan.seed = cfg.seed;

  PendulumResult out;
  out.pipeline = run_pipeline(collect(sys, plan), cfg, cfg.bound_kind, *cfg.region, solver);

  Json report;
  report["config"] = config_to_json(cfg);
  report["seed"] = cfg.seed;
  report["status"] = to_string(out.pipeline.status());
  report["bound_magnitudes"] = bound_magnitudes(out.pipeline);
  report["pipeline"] = to_json(out.pipeline);

  if (out.pipeline.feasible()) {
    const ControllerSolution& sol = out.pipeline.solution;
    out.roa = roa_report(sol, *cfg.region, 2000, derive_seed(cfg.seed, {stream::kInitialState}));
    const double radius = 1.01 * std::sqrt(max_eigenvalue(sol.P));
    out.roa_boundary = pendulum_roa_boundary(sol, lifting, cfg.boundary_points, radius);

    ClosedLoopOptions options;
    options.steps = cfg.pendulum_steps;
    out.all_converged = true;
    Json trajectories = Json::array();
    for (const Eigen::Vector2d& z0 : cfg.initial_conditions) {
      PendulumTrajectory tr;
      tr.z0 = z0;
      const Eigen::VectorXd x0 = lift(lifting, z0);
      tr.starts_in_roa = roa_membership(sol, x0);
      tr.lifted = simulate_closed_loop(sys, sol, *cfg.region, x0, options);
      Eigen::Vector2d z = z0;
      try {
        for (int t = 0; t <= cfg.pendulum_steps; ++t) {
          const Eigen::VectorXd x = lift(lifting, z);
          const double u = control_input(sol, x)(0);
          tr.z.push_back(z);
          tr.u.push_back(u);
          tr.lyapunov.push_back(lyapunov_value(sol, x));
          if (t < cfg.pendulum_steps) z = pendulum_step(cfg.pendulum, z, u);
        }
        tr.nonlinear_monotone = true;
        for (std::size_t t = 1; t < tr.lyapunov.size(); ++t)
          tr.nonlinear_monotone = tr.nonlinear_monotone && (tr.lyapunov[t] < tr.lyapunov[t - 1] || tr.lyapunov[t] < 1e-24);
        tr.nonlinear_converged = z.norm() <= 1e-3 * std::max(1.0, z0.norm());
        if (!tr.nonlinear_converged) tr.failure = "nonlinear pendulum did not reach the origin";
      } catch (const SingularGainError& e) {
        tr.failure = e.what();
      }
      if (!tr.starts_in_roa) tr.failure = "initial condition outside the RoA";
      out.all_converged = out.all_converged && tr.starts_in_roa && tr.lifted.passed && tr.nonlinear_converged;
      trajectories.push_back({{"z0", to_json(Eigen::VectorXd(z0))},
                              {"starts_in_roa", tr.starts_in_roa},
                              {"lifted", certificate_summary(tr.lifted)},
                              {"nonlinear_monotone", tr.nonlinear_monotone},
                              {"nonlinear_converged", tr.nonlinear_converged},
                              {"final_z", to_json(Eigen::VectorXd(tr.z.empty() ? z0 : tr.z.back()))},
                              {"failure", tr.failure}});
      out.trajectories.push_back(std::move(tr));
    }
    report["roa"] = to_json(*out.roa);
    report["trajectories"] = trajectories;
    report["all_converged"] = out.all_converged;
  } else {
    report["failure"] = {{"reason", "synthesis " + to_string(out.pipeline.status())},
                         {"detail", out.pipeline.failure}};
  }
  out.report = std::move(report);
  return out;
}

// Output ---------------------------------------------------------------------

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string provenance_header(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# experiment: " << to_string(cfg.kind) << "\n";
  os << "# seed: " << cfg.seed << "\n";
  os << "# config: " << config_to_json(cfg).dump() << "\n";
  return os.str();
}

namespace {

std::ofstream open_output(const std::filesystem::path& file) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

}  // namespace

void write_sweep(const SweepResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const char* name = r.kind == ExperimentKind::kErrorVsT ? "error_vs_T.csv" : "error_vs_nx.csv";
  std::ofstream out = open_output(dir / name);
  out << provenance_header(cfg);
  out << "grid_value,statistic,mean,std,trials\n";
  for (const SweepRow& row : r.rows)
    out << format_number(row.grid_value) << ',' << row.statistic << ',' << format_number(row.mean) << ','
        << format_number(row.std) << ',' << row.trials << '\n';
}

void write_feasibility(const FeasibilitySearchResult& r, const ExperimentConfig& cfg,
                       const std::filesystem::path& dir) {
  {
    std::ofstream out = open_output(dir / "feasibility_entries.csv");
    out << provenance_header(cfg);
    out << "region_parameter,value,bound_kind,seed,minimal_T,trace_P,evaluations,status_trace\n";
    for (const SearchEntry& e : r.entries) {
      std::string trace;
      for (const SearchEvaluation& ev : e.trace) {
        if (!trace.empty()) trace += ';';
        trace += std::to_string(ev.samples) + ':' + to_string(ev.status);
      }
      out << cfg.region_grid.parameter << ',' << format_number(e.value) << ',' << to_string(e.kind) << ','
          << e.seed << ',' << e.minimal_T_string(r.cap) << ',' << format_number(e.minimal_T ? e.trace_P : kNaN)
          << ',' << e.trace.size() << ',' << trace << '\n';
    }
  }
  std::ofstream out = open_output(dir / "feasibility_summary.csv");
  out << provenance_header(cfg);
  out << "region_parameter,value,bound_kind,median_T,feasible_seeds,seeds\n";
  for (const SearchSummary& s : r.summary)
    out << cfg.region_grid.parameter << ',' << format_number(s.value) << ',' << to_string(s.kind) << ','
        << (s.median_T ? format_number(*s.median_T) : ">" + std::to_string(r.cap)) << ',' << s.feasible_seeds
        << ',' << s.seeds << '\n';
}

void write_end_to_end(const EndToEndResult& r, const std::filesystem::path& dir) {
  std::ofstream out = open_output(dir / "end_to_end_report.json");
  out << r.report.dump(2) << '\n';
}

void write_pendulum(const PendulumResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  {
    std::ofstream out = open_output(dir / "pendulum_report.json");
    out << r.report.dump(2) << '\n';
  }
  {
    std::ofstream out = open_output(dir / "pendulum_roa.csv");
    out << provenance_header(cfg);
    out << "z1,z2\n";
    for (const auto& z : r.roa_boundary) out << format_number(z(0)) << ',' << format_number(z(1)) << '\n';
  }
  std::ofstream out = open_output(dir / "pendulum_trajectories.csv");
  out << provenance_header(cfg);
  out << "ic,model,t,z1,z2,x3,u,V\n";
  for (std::size_t k = 0; k < r.trajectories.size(); ++k) {
    const PendulumTrajectory& tr = r.trajectories[k];
    for (std::size_t t = 0; t < tr.lifted.states.size(); ++t) {
      const Eigen::VectorXd& x = tr.lifted.states[t];
      const double u = t < tr.lifted.inputs.size() ? tr.lifted.inputs[t](0) : kNaN;
      out << k << ",lifted," << t << ',' << format_number(x(0)) << ',' << format_number(x(1)) << ','
          << format_number(x(2)) << ',' << format_number(u) << ',' << format_number(tr.lifted.lyapunov[t]) << '\n';
    }
    for (std::size_t t = 0; t < tr.z.size(); ++t)
      out << k << ",nonlinear," << t << ',' << format_number(tr.z[t](0)) << ',' << format_number(tr.z[t](1))
          << ',' << format_number(std::sin(tr.z[t](0))) << ',' << format_number(tr.u[t]) << ','
          << format_number(tr.lyapunov[t]) << '\n';
  }
}

}  // namespace bddc
