#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace bddc {

struct SubGaussianCheckOptions {
  /// Directions: an evenly spaced half-circle for n = 2, otherwise the
  /// coordinate axes plus seeded random unit vectors up to this count.
  int directions = 32;
  /// Symmetric grid of lambda in [-max_lambda_sigma / sigma, max_lambda_sigma / sigma],
  /// counting lambda = 0, which is skipped.
  int lambda_points = 13;
  double max_lambda_sigma = 3.0;
  /// Batch-means bootstrap for the simultaneous band.
  int batches = 200;
  int bootstrap = 500;
  double confidence = 0.99;
  std::uint64_t seed = 0;
  int min_samples = 10000;
};

struct SubGaussianReport {
  /// max over (v, lambda) of log E exp(lambda <v, xi>) - lambda^2 sigma^2 / 2.
  double max_excess = 0.0;
  /// Same maximum after subtracting the band half-width c * se.
  double max_excess_lower = 0.0;
  double band_quantile = 0.0;  // c
  Eigen::VectorXd worst_direction;
  double worst_lambda = 0.0;
  int directions = 0;
  int grid_points = 0;
  bool pass = false;
  std::string summary() const;
};

/// Tests E exp(lambda <v, xi>) <= exp(lambda^2 sigma2 / 2) on a grid of unit
/// directions v and lambda values, using the rows of `samples` as draws of
/// xi. PASS iff the lower end of a simultaneous bootstrap confidence band
/// lies below the envelope at every grid point.
SubGaussianReport empirical_subgaussian_check(const Eigen::MatrixXd& samples, double sigma2,
                                              const SubGaussianCheckOptions& options = {});

/// n x 2 rows [x, sin x] with x ~ U[-a, a].
Eigen::MatrixXd uniform_sine_samples(double a, int n, std::uint64_t seed);

}  // namespace bddc
