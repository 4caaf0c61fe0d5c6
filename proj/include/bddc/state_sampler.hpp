#pragma once

#include <string>

#include <Eigen/Dense>

#include "bddc/lifting.hpp"
#include "bddc/random.hpp"

namespace bddc {

enum class SamplerFamily { kGaussian, kUniformBox, kLifted };

/// Distribution of the regressor states x_t.
///   kGaussian    x ~ N(0, scale^2 I_dim)
///   kUniformBox  x ~ U([-scale, scale]^dim)
///   kLifted      x = Phi(z) with z drawn from `base` (kGaussian or
///                kUniformBox) of dimension lifting.base_dim.
struct StateSamplerSpec {
  SamplerFamily family = SamplerFamily::kGaussian;
  SamplerFamily base = SamplerFamily::kGaussian;
  int dim = 0;
  double scale = 1.0;
  LiftingSpec lifting;

  int state_dim() const { return family == SamplerFamily::kLifted ? lifting.lifted_dim() : dim; }

  static StateSamplerSpec Gaussian(int n, double s);
  static StateSamplerSpec Uniform(int n, double a);
  static StateSamplerSpec Lifted(const LiftingSpec& lifting,
                                 SamplerFamily base, double scale);
};

void validate(const StateSamplerSpec& spec);

/// Sub-Gaussian variance proxy sigma_x^2 of the sampled x.
double variance_proxy(const StateSamplerSpec& spec);

/// sqrt(variance_proxy(spec)).
double sigma_x(const StateSamplerSpec& spec);

Eigen::VectorXd sample_state(const StateSamplerSpec& spec, Engine& rng);

std::string to_string(SamplerFamily family);
SamplerFamily sampler_family_from_string(const std::string& name);

}  // namespace bddc
