#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bddc/error_bounds.hpp"
#include "bddc/lifting.hpp"
#include "bddc/sdp.hpp"
#include "bddc/serialization.hpp"
#include "bddc/state_sampler.hpp"
#include "bddc/synthesis.hpp"
#include "bddc/uncertainty.hpp"

namespace bddc {

enum class ExperimentKind { kEndToEnd, kErrorVsT, kErrorVsNx, kFeasibilitySearch, kPendulum };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Grid for the minimal-data search: either norm balls ||x||^2 <= c or
/// regions (Qx, Sx, Rx) sharing Qx and Sx with Rx on the grid.
struct RegionGrid {
  std::string parameter = "c";  // "c" or "Rx"
  std::vector<double> values;
  Eigen::MatrixXd Qx;  // used when parameter == "Rx"
  Eigen::VectorXd Sx;

  StateRegion region(double value, int n_x) const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kEndToEnd;
  std::uint64_t seed = 0;
  int trials = 1;

  /// Named example, "custom" (matrices in the config) or "random" (drawn per
  /// trial with random_n_x, random_n_u).
  std::string system_name = "academic";
  std::optional<BilinearSystemd> system;
  int random_n_x = 2;
  int random_n_u = 1;
  double random_scale = 1.0;

  StateSamplerSpec sampler = StateSamplerSpec::Gaussian(2, 1.0);
  NoiseSpec noise{NoiseFamily::kGaussian, 0.1};
  double delta = 0.05;
  /// T_0, ..., T_{n_u}; a single entry applies to every experiment.
  std::vector<int> samples{1000};
  double input_half_width = 2.0;
  std::optional<InputBox> input_box;
  std::optional<StateRegion> region;
  BoundKind bound_kind = BoundKind::kEllipsoidal;
  /// Replace Q_Delta by ||Q_Delta||_2 I before synthesis.
  bool overestimate = false;
  SynthesisOptions synthesis;
  sdp::BarrierOptions solver;
  /// Number of times all T_i are doubled after an infeasible attempt.
  int max_retries = 0;
  int closed_loop_initial_states = 20;
  int closed_loop_steps = 200;

  // Sweeps.
  std::vector<int> T_grid;
  std::vector<int> n_x_grid;
  int sweep_samples = 250000;  // T for the n_x sweep
  RegionGrid region_grid;
  int cap = 100000;
  std::vector<std::uint64_t> seeds;
  std::vector<BoundKind> bound_kinds{BoundKind::kEllipsoidal, BoundKind::kDataDependent};

  // Pendulum.
  PendulumParameters pendulum;
  std::vector<Eigen::Vector2d> initial_conditions;
  int boundary_points = 360;
  int pendulum_steps = 3000;

  std::filesystem::path output_dir = "out";

  /// The parsed document, echoed into every output for provenance.
  Json raw;

  int state_dim() const;
  int input_dim() const;
  /// Samples per experiment expanded to n_u + 1 entries.
  std::vector<int> sample_list(int n_u) const;
  InputBox box(int n_u) const;
  /// The configured system, or a random one drawn from (seed, trial).
  BilinearSystemd system_for_trial(int trial) const;
};

/// Defaults for a kind; used before the document is applied.
ExperimentConfig default_config(ExperimentKind kind);

/// Throws ConfigError on any schema or value problem.
ExperimentConfig parse_config(const Json& doc);

/// Reads JSON from a file, or from standard input when `path` is "-".
Json read_config_document(const std::string& path);
ExperimentConfig load_config(const std::string& path);

/// The effective configuration (after defaults and overrides) as JSON.
Json config_to_json(const ExperimentConfig& cfg);

}  // namespace bddc
