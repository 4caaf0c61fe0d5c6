#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bddc/config.hpp"
#include "bddc/data_collection.hpp"
#include "bddc/error_bounds.hpp"
#include "bddc/synthesis.hpp"

namespace bddc {

/// Error bounds and the residual bound derived from one dataset.
struct BoundStage {
  BoundKind kind = BoundKind::kEllipsoidal;
  std::optional<SpectralBoundSet> spectral;
  std::optional<EllipsoidBoundSet> ellipsoid;
  ResidualQuadBound q_raw;  // before any norm over-estimate
  ResidualQuadBound q;      // passed to synthesis
};

/// Throws ConfigError when ellipsoidal bounds are requested for non-Gaussian
/// noise.
BoundStage compute_bounds(const std::vector<ExperimentDataset>& data, const StateSamplerSpec& sampler,
                          const NoiseSpec& noise, double delta, BoundKind kind, const InputBox& box,
                          bool overestimate);

/// identify -> bound -> Q_Delta -> synthesize on given data. A rank-deficient
/// regressor or an infinite bound is reported as infeasible, not thrown.
struct PipelineResult {
  std::vector<int> samples;
  std::optional<EstimateSet> estimate;
  std::optional<BoundStage> bounds;
  ControllerSolution solution;
  std::string failure;

  SynthesisStatus status() const { return solution.status; }
  bool feasible() const { return solution.feasible(); }
};

PipelineResult run_pipeline(const std::vector<ExperimentDataset>& data, const ExperimentConfig& cfg,
                            BoundKind kind, const StateRegion& region, const sdp::ConicSolver& solver);

Json to_json(const BoundStage& b);
Json to_json(const PipelineResult& r);

// Error sweeps -------------------------------------------------------------

/// One row of the long-format CSV.
struct SweepRow {
  double grid_value = 0.0;
  std::string statistic;
  double mean = 0.0;
  double std = 0.0;
  int trials = 0;
};

/// Raw per-trial values at one grid point.
struct SweepPoint {
  int n_x = 0;
  int samples = 0;
  std::vector<double> error;           // ||B1_hat - B1||_2
  std::vector<double> data_bound;      // +inf below burn-in
  std::vector<double> apriori_bound;   // +inf below burn-in
  int violations = 0;                  // error > finite data_bound
  int finite_bounds = 0;
};

struct SweepResult {
  ExperimentKind kind = ExperimentKind::kErrorVsT;
  std::vector<SweepPoint> points;
  std::vector<SweepRow> rows;
};

/// Forced-experiment study of ||B1_hat - B1||_2 against its data-dependent
/// and a priori bounds, over T (kErrorVsT) or n_x (kErrorVsNx). Statistics:
/// empirical_error, data_bound, apriori_bound, error_sqrtT, data_ratio and
/// apriori_ratio (ratio of trial means; std is that of per-trial ratios) and
/// data_bound_violation (mean = fraction of trials escaping a finite bound).
SweepResult run_error_sweep(const ExperimentConfig& cfg);

// Minimal data length ------------------------------------------------------

struct SearchEvaluation {
  int samples = 0;
  SynthesisStatus status = SynthesisStatus::kInfeasible;
  std::string note;
};

struct SearchEntry {
  double value = 0.0;
  BoundKind kind = BoundKind::kEllipsoidal;
  std::uint64_t seed = 0;
  /// Empty when no T <= cap is feasible.
  std::optional<int> minimal_T;
  double trace_P = 0.0;
  std::vector<SearchEvaluation> trace;
  /// Controller at minimal_T.
  std::optional<ControllerSolution> solution;
  std::optional<StateRegion> region;

  std::string minimal_T_string(int cap) const;
};

struct SearchSummary {
  double value = 0.0;
  BoundKind kind = BoundKind::kEllipsoidal;
  /// Median over seeds, with infeasible seeds ranked above every T; empty if
  /// the median itself is above the cap.
  std::optional<double> median_T;
  int feasible_seeds = 0;
  int seeds = 0;
};

struct FeasibilitySearchResult {
  std::vector<SearchEntry> entries;
  std::vector<SearchSummary> summary;
  int cap = 0;
};

/// Collects once at the cap per seed and searches over prefixes: doubling
/// from T = 4 until feasible, then bisection.
FeasibilitySearchResult run_feasibility_search(const ExperimentConfig& cfg);

// End to end -----------------------------------------------------------------

struct EndToEndResult {
  std::vector<PipelineResult> attempts;
  std::vector<std::uint64_t> attempt_seeds;
  SynthesisStatus status = SynthesisStatus::kInfeasible;
  std::optional<RoaReport> roa;
  std::vector<ClosedLoopCertificate> closed_loop;
  bool certificates_passed = false;
  Json report;

  bool success() const { return status == SynthesisStatus::kFeasible; }
};

/// Collect, identify, bound and synthesize; on failure double every T_i and
/// retry with fresh data, up to cfg.max_retries times.
EndToEndResult run_end_to_end(const ExperimentConfig& cfg, const sdp::ConicSolver& solver);

/// Noise-free closed loops from `count` initial states drawn uniformly from
/// the RoA.
std::vector<ClosedLoopCertificate> closed_loop_certificates(const BilinearSystemd& truth,
                                                            const ControllerSolution& sol,
                                                            const StateRegion& region, int count,
                                                            int steps, std::uint64_t seed);

// Pendulum -------------------------------------------------------------------

struct PendulumTrajectory {
  Eigen::Vector2d z0;
  bool starts_in_roa = false;
  /// Lifted bilinear model with the certified controller.
  ClosedLoopCertificate lifted;
  /// Nonlinear pendulum under u = k(Phi(z)).
  std::vector<Eigen::Vector2d> z;
  std::vector<double> u;
  std::vector<double> lyapunov;
  /// V need not decrease here: the certificate covers the lifted model only.
  bool nonlinear_monotone = false;
  /// ||z_final|| <= 1e-3 max(1, ||z0||).
  bool nonlinear_converged = false;
  std::string failure;
};

struct PendulumResult {
  PipelineResult pipeline;
  std::vector<Eigen::Vector2d> roa_boundary;  // (z1, z2)
  std::optional<RoaReport> roa;
  std::vector<PendulumTrajectory> trajectories;
  bool all_converged = false;
  Json report;

  bool feasible() const { return pipeline.feasible(); }
};

PendulumResult run_pendulum(const ExperimentConfig& cfg, const sdp::ConicSolver& solver);

/// Radius along each of `points` rays in the (z1, z2) plane where
/// Phi(z)^T P^{-1} Phi(z) first reaches 1.
std::vector<Eigen::Vector2d> pendulum_roa_boundary(const ControllerSolution& sol, const LiftingSpec& lifting,
                                                   int points, double max_radius);

// Output ---------------------------------------------------------------------

/// Header comment lines carrying the config and master seed.
std::string provenance_header(const ExperimentConfig& cfg);

/// Full-precision number for CSV output ("inf" for +infinity).
std::string format_number(double v);

void write_sweep(const SweepResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir);
void write_feasibility(const FeasibilitySearchResult& r, const ExperimentConfig& cfg,
                       const std::filesystem::path& dir);
void write_end_to_end(const EndToEndResult& r, const std::filesystem::path& dir);
void write_pendulum(const PendulumResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir);

}  // namespace bddc
