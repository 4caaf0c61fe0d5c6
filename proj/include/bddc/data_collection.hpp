#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bddc/bilinear_system.hpp"
#include "bddc/random.hpp"
#include "bddc/state_sampler.hpp"

namespace bddc {

/// Samples of one constant-input experiment. Row t of Xplus is
/// step(sys, X.row(t), u, W.row(t)) with u = 0 for input_index 0 and
/// u = e_i (or column i of the input basis) otherwise.
struct ExperimentDataset {
  int input_index = 0;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Xplus;
  /// Realized noise. Only test oracles read this; the estimators take
  /// (X, Xplus) and never see it. Empty for imported data.
  Eigen::MatrixXd W;

  int samples() const { return static_cast<int>(X.rows()); }
  int state_dim() const { return static_cast<int>(X.cols()); }

  /// First T rows. Collection draws (x_t, w_t) sequentially, so a prefix of a
  /// long dataset equals a shorter collection with the same seed.
  ExperimentDataset prefix(int T) const;
};

struct CollectionPlan {
  std::vector<int> samples;  // T_0, ..., T_{n_u}
  StateSamplerSpec sampler;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  /// Optional invertible n_u x n_u matrix; experiment i then applies its
  /// i-th column instead of e_i.
  std::optional<Eigen::MatrixXd> input_basis;
};

void validate(const CollectionPlan& plan, const BilinearSystemd& sys);

/// Seed of experiment i's stream.
std::uint64_t experiment_seed(std::uint64_t master, int input_index);

/// Constant input applied in experiment i.
Eigen::VectorXd experiment_input(int n_u, int input_index,
                                 const std::optional<Eigen::MatrixXd>& basis = std::nullopt);

ExperimentDataset collect_experiment(const BilinearSystemd& sys,
                                     const CollectionPlan& plan, int input_index);

/// Runs all n_u + 1 experiments. Each draws from its own seed stream; the
/// result is ordered by input index and independent of scheduling.
std::vector<ExperimentDataset> collect(const BilinearSystemd& sys,
                                       const CollectionPlan& plan);

std::vector<ExperimentDataset> prefix(const std::vector<ExperimentDataset>& data,
                                      const std::vector<int>& samples);

struct AssumptionReport {
  int samples = 0;
  double mean_norm = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd covariance_eigenvalues;
  double tolerance = 0.0;  // 4 sigma_x / sqrt(T)
  std::vector<int> flagged_coordinates;
  bool flagged() const { return !flagged_coordinates.empty(); }
};

/// Advisory check of the i.i.d. zero-mean sampling assumption.
AssumptionReport validate_assumption(const ExperimentDataset& data, double sigma_x);

/// One CSV per experiment (x_1..x_n, xplus_1..xplus_n) plus manifest.json.
/// Values are written with 17 significant digits so a round trip is exact.
void export_datasets(const std::vector<ExperimentDataset>& data,
                     const CollectionPlan& plan,
                     const std::filesystem::path& dir);

std::vector<ExperimentDataset> import_datasets(const std::filesystem::path& dir);

void write_dataset_csv(const ExperimentDataset& data, const std::filesystem::path& file);
ExperimentDataset read_dataset_csv(const std::filesystem::path& file, int input_index);

}  // namespace bddc
